#include "growl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "growl/error.hpp"
#include "growl/io_util.hpp"

namespace growl {

using json = nlohmann::ordered_json;

void SynthConfig::validate() const {
  if (people_min > people_max) throw ConfigError("people_range: min must not exceed max");
  if (group_min < 2) throw ConfigError("group_size_range: groups need at least 2 members");
  if (group_min > group_max) throw ConfigError("group_size_range: min must not exceed max");
  if (!(formation_radius > 0.0)) throw ConfigError("formation_radius must be positive");
  if (!(min_center_separation > 2.0 * formation_radius))
    throw ConfigError("min_center_separation must exceed 2 x formation_radius");
  if (!(position_jitter >= 0.0) || !(orientation_jitter >= 0.0)) throw ConfigError("jitters must be >= 0");
  if (!(singleton_fraction >= 0.0 && singleton_fraction <= 1.0))
    throw ConfigError("singleton_fraction must lie in [0, 1]");
  if (!(area_size > 2.0 * formation_radius)) throw ConfigError("area_size must exceed 2 x formation_radius");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (!(adjacent_spacing > 2.0)) throw ConfigError("adjacent_spacing must exceed 2 (circles would overlap)");
}

json to_json(const SynthConfig& c) {
  return json{{"n_scenes", c.n_scenes},
              {"people_range", {c.people_min, c.people_max}},
              {"group_size_range", {c.group_min, c.group_max}},
              {"formation_radius", c.formation_radius},
              {"min_center_separation", c.min_center_separation},
              {"position_jitter", c.position_jitter},
              {"orientation_jitter", c.orientation_jitter},
              {"singleton_fraction", c.singleton_fraction},
              {"area_size", c.area_size},
              {"max_attempts", c.max_attempts},
              {"seed", c.seed},
              {"hard_pairs", c.hard_pairs},
              {"adjacent_spacing", c.adjacent_spacing}};
}

void update_from_json(SynthConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  bool separation_given = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_scenes") c.n_scenes = value.get<std::size_t>();
      else if (key == "people_range") {
        const auto r = value.get<std::vector<std::size_t>>();
        if (r.size() != 2) throw ConfigError("people_range needs [min, max]");
        c.people_min = r[0];
        c.people_max = r[1];
      } else if (key == "group_size_range") {
        const auto r = value.get<std::vector<std::size_t>>();
        if (r.size() != 2) throw ConfigError("group_size_range needs [min, max]");
        c.group_min = r[0];
        c.group_max = r[1];
      } else if (key == "formation_radius") c.formation_radius = value.get<double>();
      else if (key == "min_center_separation") {
        c.min_center_separation = value.get<double>();
        separation_given = true;
      } else if (key == "position_jitter") c.position_jitter = value.get<double>();
      else if (key == "orientation_jitter") c.orientation_jitter = value.get<double>();
      else if (key == "singleton_fraction") c.singleton_fraction = value.get<double>();
      else if (key == "area_size") c.area_size = value.get<double>();
      else if (key == "max_attempts") c.max_attempts = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "hard_pairs") c.hard_pairs = value.get<std::size_t>();
      else if (key == "adjacent_spacing") c.adjacent_spacing = value.get<double>();
      else throw ConfigError("unknown synth config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  // The separation defaults to three formation radii.
  if (!separation_given && j.contains("formation_radius")) c.min_center_separation = 3.0 * c.formation_radius;
  c.validate();
}

namespace {

struct Point {
  double x, y;
};

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

class Placer {
 public:
  Placer(const SynthConfig& cfg, std::mt19937_64& rng, double margin)
      : cfg_(cfg), rng_(rng), coord_(margin, cfg.area_size - margin) {}

  // Uniform point at least `separation` from every point placed so far.
  Point place(double separation) {
    for (std::size_t attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
      const Point p{coord_(rng_), coord_(rng_)};
      if (std::all_of(placed_.begin(), placed_.end(), [&](Point q) { return dist(p, q) >= separation; })) {
        placed_.push_back(p);
        return p;
      }
    }
    throw PlacementFailure("could not place point " + std::to_string(placed_.size() + 1) + " after " +
                           std::to_string(cfg_.max_attempts) + " attempts; area too crowded");
  }

 private:
  const SynthConfig& cfg_;
  std::mt19937_64& rng_;
  std::uniform_real_distribution<double> coord_;
  std::vector<Point> placed_;
};

struct Person {
  double x, y, theta;
  long group;  // -1 for singletons
};

// Members equally spaced on the formation circle, facing the center.
void add_formation(std::vector<Person>& people, Point center, std::size_t size, long group, const SynthConfig& cfg,
                   std::mt19937_64& rng, double phase) {
  std::normal_distribution<double> pos_noise(0.0, 1.0);
  for (std::size_t k = 0; k < size; ++k) {
    const double angle = phase + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(size);
    const double px = center.x + cfg.formation_radius * std::cos(angle);
    const double py = center.y + cfg.formation_radius * std::sin(angle);
    const double facing = angle + kPi;
    const double jx = cfg.position_jitter * pos_noise(rng);
    const double jy = cfg.position_jitter * pos_noise(rng);
    const double jt = cfg.orientation_jitter * pos_noise(rng);
    people.push_back({px + jx, py + jy, facing + jt, group});
  }
}

std::vector<std::size_t> partition_group_sizes(std::size_t members, const SynthConfig& cfg, std::mt19937_64& rng,
                                               std::size_t& leftover) {
  std::vector<std::size_t> sizes;
  std::size_t m = members;
  while (m > 0) {
    if (m < cfg.group_min) break;
    std::uniform_int_distribution<std::size_t> pick(cfg.group_min, std::min(cfg.group_max, m));
    std::size_t s = pick(rng);
    const std::size_t rest = m - s;
    if (rest > 0 && rest < cfg.group_min) {
      if (m <= cfg.group_max)
        s = m;
      else if (m - cfg.group_min >= cfg.group_min)
        s = m - cfg.group_min;
    }
    sizes.push_back(s);
    m -= s;
  }
  leftover = m;
  return sizes;
}

Scene finish_scene(std::vector<Person> people, std::size_t n_groups, std::mt19937_64& rng, std::string frame_id) {
  std::shuffle(people.begin(), people.end(), rng);
  Scene scene{std::move(frame_id), {}, std::vector<Group>(n_groups), ViewTag::topdown};
  char id[16];
  for (std::size_t i = 0; i < people.size(); ++i) {
    std::snprintf(id, sizeof id, "p%02zu", i);
    scene.individuals.push_back(make_individual(id, people[i].x, people[i].y, people[i].theta));
    if (people[i].group >= 0) (*scene.groups)[static_cast<std::size_t>(people[i].group)].push_back(id);
  }
  validate(scene);
  return scene;
}

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05zu", prefix, i);
  return buf;
}

}  // namespace

Scene generate_scene(const SynthConfig& cfg, std::mt19937_64& rng, std::string frame_id) {
  cfg.validate();
  std::uniform_int_distribution<std::size_t> count(cfg.people_min, cfg.people_max);
  const std::size_t n = count(rng);
  std::size_t singles = static_cast<std::size_t>(std::llround(cfg.singleton_fraction * static_cast<double>(n)));
  singles = std::min(singles, n);
  std::size_t leftover = 0;
  const auto sizes = partition_group_sizes(n - singles, cfg, rng, leftover);
  singles += leftover;

  Placer placer(cfg, rng, cfg.formation_radius);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<Person> people;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const Point c = placer.place(cfg.min_center_separation);
    add_formation(people, c, sizes[g], static_cast<long>(g), cfg, rng, phase(rng));
  }
  for (std::size_t s = 0; s < singles; ++s) {
    const Point p = placer.place(cfg.min_center_separation);
    people.push_back({p.x, p.y, phase(rng), -1});
  }
  return finish_scene(std::move(people), sizes.size(), rng, std::move(frame_id));
}

Dataset generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  Dataset d{"synthetic", "meters", {}};
  d.scenes.reserve(cfg.n_scenes);
  for (std::size_t i = 0; i < cfg.n_scenes; ++i) {
    std::mt19937_64 rng(mix_seed(cfg.seed, i));
    d.scenes.push_back(generate_scene(cfg, rng, numbered("synth", i)));
  }
  return d;
}

Scene generate_hard_scene(const SynthConfig& cfg, std::mt19937_64& rng, std::string frame_id) {
  cfg.validate();
  const double r = cfg.formation_radius;
  const double half_gap = 0.5 * cfg.adjacent_spacing * r;
  // A pair occupies a disc of radius half_gap + r around its midpoint.
  Placer placer(cfg, rng, half_gap + r);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_int_distribution<std::size_t> size(cfg.group_min, cfg.group_max);
  std::vector<Person> people;
  long group = 0;
  for (std::size_t p = 0; p < cfg.hard_pairs; ++p) {
    const Point mid = placer.place(2.0 * half_gap + cfg.min_center_separation);
    const double axis = phase(rng);
    for (double side : {-1.0, 1.0}) {
      const Point c{mid.x + side * half_gap * std::cos(axis), mid.y + side * half_gap * std::sin(axis)};
      add_formation(people, c, size(rng), group++, cfg, rng, phase(rng));
    }
  }
  return finish_scene(std::move(people), static_cast<std::size_t>(group), rng, std::move(frame_id));
}

Dataset generate_hard_corpus(const SynthConfig& cfg) {
  cfg.validate();
  Dataset d{"synthetic-hard", "meters", {}};
  for (std::size_t i = 0; i < cfg.n_scenes; ++i) {
    std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x68617264ULL, i));
    d.scenes.push_back(generate_hard_scene(cfg, rng, numbered("hard", i)));
  }
  return d;
}

}  // namespace growl
