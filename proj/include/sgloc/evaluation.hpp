#ifndef SGLOC_EVALUATION_HPP
#define SGLOC_EVALUATION_HPP

#include <functional>
#include <limits>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgloc/io.hpp"
#include "sgloc/localizer.hpp"
#include "sgloc/synth.hpp"

namespace sgloc {

struct SuccessThresholds {
  double max_trans = 5.0;  // m
  double max_rot = 10.0;   // deg
};

struct EvalRow {
  double stamp = 0;
  std::optional<double> gt_stamp;  // nullopt: no ground truth within tolerance
  PoseErrord error;
  bool success = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t matched = 0;
  std::size_t successes = 0;
  double success_rate = 0;  // successes / estimate rows
  double ate = 0;           // mean e_trans over successes
  double are = 0;           // mean e_rot over successes
};

/// Nearest-timestamp matching of estimates to ground truth. Unmatched estimates
/// stay in the report and count as failures.
EvalReport evaluateTrajectory(const std::vector<TimedPose>& estimates, const std::vector<TimedPose>& ground_truth,
                              double stamp_tolerance = 0.05, const SuccessThresholds& thresholds = {});

/// CSV: stamp,gt_stamp,matched,e_trans,e_rot,success,ecdf_e_trans,ecdf_e_rot,ecdf_p
/// followed by "# key = value" summary lines. The ecdf columns hold the sorted
/// errors of matched rows and their cumulative probability.
void writeEvalCsv(std::ostream& os, const EvalReport& report);

/// One synthetic Monte Carlo trial.
struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  LocalizationStatus status = LocalizationStatus::NoCorrespondences;
  bool success = false;
  PoseErrord error{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  std::optional<Posed> estimate;
  Posed ground_truth;
  std::size_t query_clusters = 0;
  std::size_t outliers = 0;
  std::size_t correspondences = 0;
  std::size_t clique_size = 0;
  bool clique_exact = true;
  std::size_t inliers = 0;
  StageTimings timings;
  double wall_ms = 0;
};

TrialRecord runSynthTrial(const SynthParams& params, const RunConfig& config, std::size_t trial);

/// Runs `trials` independent trials on `workers` threads (0: hardware concurrency,
/// overridden by SGLOC_WORKERS). Records come back in trial order.
std::vector<TrialRecord> runSynthTrials(const SynthParams& params, const RunConfig& config, std::size_t trials,
                                        unsigned workers = 0);

unsigned workerCount(unsigned requested);

/// CSV header documented in README. Deterministic columns come first; timing
/// columns (suffix _ms) are last.
void writeTrialCsv(std::ostream& os, const std::vector<TrialRecord>& records);

struct TrialSummary {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0;
  double median_e_trans = 0;  // over successes
  double median_e_rot = 0;
  double mean_e_trans = 0;
  double mean_e_rot = 0;
};

TrialSummary summarize(const std::vector<TrialRecord>& records);

}  // namespace sgloc

#endif  // SGLOC_EVALUATION_HPP
