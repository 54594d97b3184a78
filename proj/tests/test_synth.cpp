#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "growl/error.hpp"
#include "growl/graph.hpp"
#include "growl/synth.hpp"

using namespace growl;

namespace {

SynthConfig jitter_free() {
  SynthConfig c;
  c.position_jitter = 0.0;
  c.orientation_jitter = 0.0;
  return c;
}

struct Center {
  double x = 0, y = 0;
};

// Group centers recovered as member centroids (exact for evenly spaced members).
std::vector<Center> centers(const Scene& s) {
  std::vector<Center> out;
  for (const auto& g : *s.groups) {
    Center c;
    for (const auto& id : g) {
      c.x += s.find(id)->x / static_cast<double>(g.size());
      c.y += s.find(id)->y / static_cast<double>(g.size());
    }
    out.push_back(c);
  }
  return out;
}

std::map<std::string, long> membership(const Scene& s) {
  std::map<std::string, long> m;
  for (const auto& p : s.individuals) m[p.id] = -1;
  for (std::size_t g = 0; g < s.groups->size(); ++g)
    for (const auto& id : (*s.groups)[g]) m[id] = static_cast<long>(g);
  return m;
}

}  // namespace

TEST(GenerateScene, FacingPair) {
  SynthConfig c = jitter_free();
  c.people_min = c.people_max = 2;
  c.group_min = c.group_max = 2;
  c.formation_radius = 0.5;
  c.min_center_separation = 1.5;
  c.singleton_fraction = 0.0;
  std::mt19937_64 rng(1);
  const Scene s = generate_scene(c, rng, "pair");
  ASSERT_EQ(s.individuals.size(), 2u);
  ASSERT_EQ(s.groups->size(), 1u);
  EXPECT_NEAR(pair_distance(s.individuals[0], s.individuals[1]), 1.0, 1e-12);
  EXPECT_NEAR(effort_angle(s.individuals[0], s.individuals[1]).radians, 0.0, 1e-9);
}

TEST(GenerateScene, FourMembersAtQuarterTurns) {
  SynthConfig c = jitter_free();
  c.people_min = c.people_max = 4;
  c.group_min = c.group_max = 4;
  c.singleton_fraction = 0.0;
  std::mt19937_64 rng(2);
  const Scene s = generate_scene(c, rng, "four");
  ASSERT_EQ(s.groups->size(), 1u);
  const Center ctr = centers(s)[0];
  std::vector<double> bearings;
  for (const auto& p : s.individuals) {
    EXPECT_NEAR(std::hypot(p.x - ctr.x, p.y - ctr.y), c.formation_radius, 1e-12);
    const double to_center = std::atan2(ctr.y - p.y, ctr.x - p.x);
    EXPECT_NEAR(std::abs(wrap_angle(to_center - p.theta)), 0.0, 1e-9);
    bearings.push_back(std::atan2(p.y - ctr.y, p.x - ctr.x));
  }
  std::sort(bearings.begin(), bearings.end());
  for (std::size_t i = 1; i < bearings.size(); ++i) EXPECT_NEAR(bearings[i] - bearings[i - 1], kPi / 2, 1e-9);
}

TEST(GenerateCorpus, DefaultConfigPassesAudit) {
  SynthConfig c;
  const Dataset d = generate_corpus(c);
  ASSERT_EQ(d.scenes.size(), 500u);
  EXPECT_NO_THROW(validate(d));
  for (const auto& s : d.scenes) {
    EXPECT_GE(s.individuals.size(), 10u);
    EXPECT_LE(s.individuals.size(), 20u);
    for (const auto& g : *s.groups) {
      EXPECT_GE(g.size(), 2u);
      EXPECT_LE(g.size(), 6u);
    }
    for (const auto& p : s.individuals) {
      EXPECT_GE(p.x, -0.5);
      EXPECT_LE(p.x, c.area_size + 0.5);
    }
    // Centers carry at most member-averaged jitter.
    const auto cs = centers(s);
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = i + 1; j < cs.size(); ++j)
        EXPECT_GE(std::hypot(cs[i].x - cs[j].x, cs[i].y - cs[j].y), c.min_center_separation - 0.4);
  }
}

TEST(GenerateCorpus, JitterFreeGeometry) {
  SynthConfig c = jitter_free();
  c.n_scenes = 200;
  const Dataset d = generate_corpus(c);
  double co_sum = 0, co_n = 0, non_sum = 0, non_n = 0;
  for (const auto& s : d.scenes) {
    const auto cs = centers(s);
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = i + 1; j < cs.size(); ++j)
        EXPECT_GE(std::hypot(cs[i].x - cs[j].x, cs[i].y - cs[j].y), c.min_center_separation - 1e-9);
    const auto member = membership(s);
    for (std::size_t i = 0; i < s.individuals.size(); ++i)
      for (std::size_t j = i + 1; j < s.individuals.size(); ++j) {
        const auto& a = s.individuals[i];
        const auto& b = s.individuals[j];
        const long ga = member.at(a.id), gb = member.at(b.id);
        const double e = effort_angle(a, b).radians;
        const double dist = pair_distance(a, b);
        if (ga >= 0 && ga == gb) {
          // Members on a circle facing its center: each turns half the
          // inscribed angle, so the total is pi minus the central angle.
          const Center ctr = cs[static_cast<std::size_t>(ga)];
          const double central = std::abs(wrap_angle(std::atan2(a.y - ctr.y, a.x - ctr.x) -
                                                     std::atan2(b.y - ctr.y, b.x - ctr.x)));
          EXPECT_NEAR(e, kPi - central, 1e-9);
          EXPECT_LT(e, kPi);
          EXPECT_LE(dist, 2 * c.formation_radius + 1e-9);
          co_sum += e;
          ++co_n;
        } else {
          if (ga >= 0 && gb >= 0) EXPECT_GE(dist, c.min_center_separation - 2 * c.formation_radius - 1e-9);
          non_sum += e;
          ++non_n;
        }
      }
  }
  EXPECT_LT(co_sum / co_n, non_sum / non_n);
}

TEST(GenerateCorpus, DeterministicAndConfigRanges) {
  SynthConfig c;
  c.n_scenes = 20;
  c.seed = 77;
  EXPECT_EQ(dataset_to_json(generate_corpus(c)), dataset_to_json(generate_corpus(c)));
  c.n_scenes = 0;
  const Dataset empty = generate_corpus(c);
  EXPECT_TRUE(empty.scenes.empty());
  EXPECT_NO_THROW(validate(empty));
  c.n_scenes = 30;
  c.people_min = 3;
  c.people_max = 5;
  for (const auto& s : generate_corpus(c).scenes) {
    EXPECT_GE(s.individuals.size(), 3u);
    EXPECT_LE(s.individuals.size(), 5u);
  }
}

TEST(GenerateCorpus, HardScenesPairAdjacentGroups) {
  SynthConfig c = jitter_free();
  c.n_scenes = 50;
  const Dataset d = generate_hard_corpus(c);
  for (const auto& s : d.scenes) {
    EXPECT_NO_THROW(validate(s));
    ASSERT_EQ(s.groups->size(), 2 * c.hard_pairs);
    const auto cs = centers(s);
    for (std::size_t p = 0; p < c.hard_pairs; ++p) {
      const auto& a = cs[2 * p];
      const auto& b = cs[2 * p + 1];
      EXPECT_NEAR(std::hypot(a.x - b.x, a.y - b.y), c.adjacent_spacing * c.formation_radius, 1e-9);
    }
  }
}

TEST(SynthConfig, Validation) {
  SynthConfig c;
  c.min_center_separation = 1.2;  // = 2r
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("min_center_separation"), std::string::npos);
  }
  c = SynthConfig{};
  c.people_min = 30;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.group_min = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SynthConfig, JsonOverrides) {
  SynthConfig c;
  update_from_json(c, nlohmann::ordered_json::parse(R"({"people_range": [4, 8], "formation_radius": 0.5})"));
  EXPECT_EQ(c.people_min, 4u);
  EXPECT_EQ(c.people_max, 8u);
  EXPECT_DOUBLE_EQ(c.min_center_separation, 1.5);
  EXPECT_THROW(update_from_json(c, nlohmann::ordered_json::parse(R"({"bogus": 1})")), ConfigError);
  SynthConfig back;
  update_from_json(back, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(SynthConfig, CrowdedAreaFailsPlacement) {
  SynthConfig c;
  c.area_size = 3.0;
  c.people_min = c.people_max = 20;
  c.max_attempts = 50;
  std::mt19937_64 rng(1);
  EXPECT_THROW(generate_scene(c, rng, "x"), PlacementFailure);
}
