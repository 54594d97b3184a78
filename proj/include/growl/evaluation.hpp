#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "growl/grouping.hpp"
#include "growl/scene.hpp"

namespace growl {

// strict:  |D n G| >= ceil(T |G|)  and |D \ G| <= floor((1 - T) |G|)
// lenient: |D n G| >= floor(T |G|) and |D \ G| <= ceil((1 - T) |G|)
enum class Rounding { strict, lenient };

// greedy: descending overlap, ties broken by the smallest member ids.
// optimal: maximum one-to-one matching (augmenting paths).
enum class Matching { greedy, optimal };

struct EvalConfig {
  double tolerance = 2.0 / 3.0;
  Rounding rounding = Rounding::strict;
  Matching matching = Matching::greedy;
  // Drop ground-truth members absent from the detections' universe before
  // matching (evaluation against an automatic person detector).
  bool restrict_universe_to_detected = false;

  void validate() const;  // throws ConfigError
};

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// Whether detected group `det` counts as a detection of ground-truth group `gt`.
bool group_matches(const Group& det, const Group& gt, const EvalConfig& cfg);

// Singletons are ignored; throws UniverseMismatch when the two sets do not
// cover the same ids.
MatchCounts match_groups(const GroupSet& gt, const GroupSet& det, const EvalConfig& cfg = {});

struct FrameScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Any 0/0 ratio evaluates to 0.
FrameScore frame_f1(std::size_t tp, std::size_t fp, std::size_t fn);

struct FrameReport {
  std::string frame_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  std::vector<FrameReport> per_frame;  // in ground-truth dataset order
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // population standard deviation
  double tolerance = 2.0 / 3.0;
};

struct FramePrediction {
  std::string frame_id;
  GroupSet groups;
};

// Frames are aligned by frame_id; FrameMismatch unless predictions and
// ground truth name exactly the same frames.
EvalReport evaluate(const std::vector<FramePrediction>& predictions, const Dataset& ground_truth,
                    const EvalConfig& cfg = {});

std::string report_csv(const EvalReport& report);
std::string report_summary_json(const EvalReport& report);

double mean_of(const std::vector<double>& values);
// Divides by n; a single value has deviation 0.
double population_std(const std::vector<double>& values);

}  // namespace growl
