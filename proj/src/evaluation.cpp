#include "growl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "growl/error.hpp"
#include "growl/io_util.hpp"

namespace growl {

void EvalConfig::validate() const {
  if (!(tolerance > 0.0 && tolerance <= 1.0)) throw ConfigError("tolerance must lie in (0, 1]");
}

bool group_matches(const Group& det, const Group& gt, const EvalConfig& cfg) {
  const std::set<std::string_view> truth(gt.begin(), gt.end());
  std::size_t correct = 0;
  for (const auto& id : det) correct += truth.contains(id) ? 1 : 0;
  const std::size_t wrong = det.size() - correct;
  const double n = static_cast<double>(gt.size());
  // The epsilon keeps exact products such as (2/3) * 3 on the intended side.
  constexpr double eps = 1e-9;
  double need = 0.0, allow = 0.0;
  if (cfg.rounding == Rounding::strict) {
    need = std::ceil(cfg.tolerance * n - eps);
    allow = std::floor((1.0 - cfg.tolerance) * n + eps);
  } else {
    need = std::floor(cfg.tolerance * n + eps);
    allow = std::ceil((1.0 - cfg.tolerance) * n - eps);
  }
  return static_cast<double>(correct) >= need && static_cast<double>(wrong) <= allow;
}

namespace {

std::size_t overlap(const Group& a, const Group& b) {
  const std::set<std::string_view> sb(b.begin(), b.end());
  std::size_t k = 0;
  for (const auto& id : a) k += sb.contains(id) ? 1 : 0;
  return k;
}

std::string smallest_member(const Group& g) { return g.empty() ? std::string{} : *std::min_element(g.begin(), g.end()); }

std::size_t greedy_matches(const std::vector<Group>& gt, const std::vector<Group>& det, const EvalConfig& cfg) {
  struct Candidate {
    std::size_t overlap;
    std::string det_key, gt_key;
    std::size_t d, g;
  };
  std::vector<Candidate> cands;
  for (std::size_t d = 0; d < det.size(); ++d)
    for (std::size_t g = 0; g < gt.size(); ++g)
      if (group_matches(det[d], gt[g], cfg))
        cands.push_back({overlap(det[d], gt[g]), smallest_member(det[d]), smallest_member(gt[g]), d, g});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.overlap, a.det_key, a.gt_key) < std::tie(a.overlap, b.det_key, b.gt_key);
  });
  std::vector<bool> det_used(det.size()), gt_used(gt.size());
  std::size_t tp = 0;
  for (const auto& c : cands) {
    if (det_used[c.d] || gt_used[c.g]) continue;
    det_used[c.d] = gt_used[c.g] = true;
    ++tp;
  }
  return tp;
}

std::size_t optimal_matches(const std::vector<Group>& gt, const std::vector<Group>& det, const EvalConfig& cfg) {
  std::vector<std::vector<std::size_t>> adj(det.size());
  for (std::size_t d = 0; d < det.size(); ++d)
    for (std::size_t g = 0; g < gt.size(); ++g)
      if (group_matches(det[d], gt[g], cfg)) adj[d].push_back(g);
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(gt.size(), none);
  std::vector<bool> visited;
  auto augment = [&](auto&& self, std::size_t d) -> bool {
    for (auto g : adj[d]) {
      if (visited[g]) continue;
      visited[g] = true;
      if (owner[g] == none || self(self, owner[g])) {
        owner[g] = d;
        return true;
      }
    }
    return false;
  };
  std::size_t tp = 0;
  for (std::size_t d = 0; d < det.size(); ++d) {
    visited.assign(gt.size(), false);
    if (augment(augment, d)) ++tp;
  }
  return tp;
}

}  // namespace

MatchCounts match_groups(const GroupSet& gt, const GroupSet& det, const EvalConfig& cfg) {
  cfg.validate();
  const GroupSet* truth = &gt;
  GroupSet restricted;
  const auto det_universe = det.universe();
  if (cfg.restrict_universe_to_detected) {
    const std::set<std::string> keep(det_universe.begin(), det_universe.end());
    for (const auto& g : gt.groups) {
      Group kept;
      for (const auto& id : g)
        if (keep.contains(id)) kept.push_back(id);
      if (kept.size() >= 2) restricted.groups.push_back(std::move(kept));
    }
    for (const auto& id : det_universe) {
      bool grouped = false;
      for (const auto& g : restricted.groups) grouped = grouped || std::find(g.begin(), g.end(), id) != g.end();
      if (!grouped) restricted.singletons.push_back(id);
    }
    const auto gt_universe = gt.universe();
    if (!std::includes(gt_universe.begin(), gt_universe.end(), det_universe.begin(), det_universe.end()))
      throw UniverseMismatch("detections name individuals absent from the ground truth");
    truth = &restricted;
  } else if (gt.universe() != det_universe) {
    throw UniverseMismatch("ground truth and detections cover different individuals");
  }

  const std::size_t tp = cfg.matching == Matching::greedy ? greedy_matches(truth->groups, det.groups, cfg)
                                                          : optimal_matches(truth->groups, det.groups, cfg);
  return {tp, det.groups.size() - tp, truth->groups.size() - tp};
}

FrameScore frame_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  FrameScore s;
  s.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  s.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

EvalReport evaluate(const std::vector<FramePrediction>& predictions, const Dataset& ground_truth,
                    const EvalConfig& cfg) {
  cfg.validate();
  std::map<std::string_view, const FramePrediction*> by_frame;
  for (const auto& p : predictions) {
    if (!by_frame.emplace(p.frame_id, &p).second)
      throw FrameMismatch("frame '" + p.frame_id + "' is predicted more than once");
    if (ground_truth.find(p.frame_id) == nullptr)
      throw FrameMismatch("prediction for frame '" + p.frame_id + "' has no ground truth");
  }
  EvalReport report;
  report.tolerance = cfg.tolerance;
  std::vector<double> f1s;
  for (const auto& scene : ground_truth.scenes) {
    auto it = by_frame.find(scene.frame_id);
    if (it == by_frame.end()) throw FrameMismatch("no prediction for frame '" + scene.frame_id + "'");
    MatchCounts counts;
    try {
      counts = match_groups(ground_truth_groups(scene), it->second->groups, cfg);
    } catch (const UniverseMismatch& e) {
      throw UniverseMismatch("frame '" + scene.frame_id + "': " + e.what());
    }
    const auto s = frame_f1(counts.tp, counts.fp, counts.fn);
    report.per_frame.push_back({scene.frame_id, s.precision, s.recall, s.f1, counts.tp, counts.fp, counts.fn});
    f1s.push_back(s.f1);
  }
  report.mean_f1 = mean_of(f1s);
  report.std_f1 = population_std(f1s);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "frame_id,precision,recall,f1,tp,fp,fn\n";
  for (const auto& f : report.per_frame)
    out += f.frame_id + "," + format_double(f.precision) + "," + format_double(f.recall) + "," +
           format_double(f.f1) + "," + std::to_string(f.tp) + "," + std::to_string(f.fp) + "," +
           std::to_string(f.fn) + "\n";
  return out;
}

std::string report_summary_json(const EvalReport& report) {
  nlohmann::ordered_json doc{
      {"mean_f1", report.mean_f1}, {"std_f1", report.std_f1}, {"tolerance", report.tolerance},
      {"frames", report.per_frame.size()}};
  return doc.dump(1) + "\n";
}

}  // namespace growl
