#include "sgloc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace sgloc {
namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmtMs(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void writePoseColumns(std::ostream& os, const std::optional<Posed>& pose) {
  if (!pose) {
    os << ",,,,,,,";
    return;
  }
  const Eigen::Quaterniond q = pose->quaternion();
  os << ',' << fmt(pose->translation.x()) << ',' << fmt(pose->translation.y()) << ',' << fmt(pose->translation.z())
     << ',' << fmt(q.x()) << ',' << fmt(q.y()) << ',' << fmt(q.z()) << ',' << fmt(q.w());
}

}  // namespace

EvalReport evaluateTrajectory(const std::vector<TimedPose>& estimates, const std::vector<TimedPose>& ground_truth,
                              double stamp_tolerance, const SuccessThresholds& thresholds) {
  EvalReport report;
  double sum_trans = 0, sum_rot = 0;
  for (const auto& est : estimates) {
    EvalRow row;
    row.stamp = est.stamp;
    // Ground truth is sorted by stamp (readPoses enforces it).
    const auto it = std::lower_bound(ground_truth.begin(), ground_truth.end(), est.stamp,
                                     [](const TimedPose& p, double s) { return p.stamp < s; });
    const TimedPose* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (auto cand : {it, it == ground_truth.begin() ? it : std::prev(it)}) {
      if (cand == ground_truth.end()) continue;
      const double d = std::abs(cand->stamp - est.stamp);
      if (d < best) {
        best = d;
        nearest = &*cand;
      }
    }
    if (nearest && best <= stamp_tolerance) {
      row.gt_stamp = nearest->stamp;
      row.error = poseError(est.pose, nearest->pose);
      row.success = isSuccess(row.error, thresholds.max_trans, thresholds.max_rot);
      ++report.matched;
      if (row.success) {
        ++report.successes;
        sum_trans += row.error.e_trans;
        sum_rot += row.error.e_rot;
      }
    }
    report.rows.push_back(row);
  }
  if (!estimates.empty()) report.success_rate = static_cast<double>(report.successes) / static_cast<double>(estimates.size());
  if (report.successes > 0) {
    report.ate = sum_trans / static_cast<double>(report.successes);
    report.are = sum_rot / static_cast<double>(report.successes);
  }
  return report;
}

void writeEvalCsv(std::ostream& os, const EvalReport& report) {
  std::vector<double> et, er;
  for (const auto& r : report.rows) {
    if (!r.gt_stamp) continue;
    et.push_back(r.error.e_trans);
    er.push_back(r.error.e_rot);
  }
  std::sort(et.begin(), et.end());
  std::sort(er.begin(), er.end());

  os << "stamp,gt_stamp,matched,e_trans,e_rot,success,ecdf_e_trans,ecdf_e_rot,ecdf_p\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    os << fmt(r.stamp) << ',';
    if (r.gt_stamp) {
      os << fmt(*r.gt_stamp) << ",1," << fmt(r.error.e_trans) << ',' << fmt(r.error.e_rot) << ',' << (r.success ? 1 : 0);
    } else {
      os << ",0,,,0";
    }
    if (i < et.size()) {
      os << ',' << fmt(et[i]) << ',' << fmt(er[i]) << ',' << fmt(static_cast<double>(i + 1) / static_cast<double>(et.size()));
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  os << "# estimates = " << report.rows.size() << '\n'
     << "# matched = " << report.matched << '\n'
     << "# unmatched = " << report.rows.size() - report.matched << '\n'
     << "# successes = " << report.successes << '\n'
     << "# success_rate = " << fmt(report.success_rate) << '\n'
     << "# ate = " << fmt(report.ate) << '\n'
     << "# are = " << fmt(report.are) << '\n';
}

TrialRecord runSynthTrial(const SynthParams& params, const RunConfig& config, std::size_t trial) {
  SynthParams p = params;
  p.seed = trialSeed(params.seed, trial);
  const SynthScene scene = synthScene(p);
  const DescriptorDb db = DescriptorDb::build(scene.map, config.triangulation, config.retrieval.quantum);

  TrialRecord rec;
  rec.trial = trial;
  rec.seed = p.seed;
  rec.ground_truth = scene.ground_truth;
  rec.query_clusters = scene.query.size();
  rec.outliers = scene.outlier_count;

  const Stopwatch wall;
  const LocalizationResult res = localize(scene.query, scene.map, db, config);
  rec.wall_ms = wall.elapsedMs();

  rec.status = res.status;
  rec.correspondences = res.correspondence_count;
  rec.clique_size = res.clique_size;
  rec.clique_exact = res.clique_exact;
  rec.timings = res.timings;
  if (res.registration) rec.inliers = res.registration->inlier_count;
  if (res.ok()) {
    rec.estimate = res.pose();
    rec.error = poseError(res.pose(), scene.ground_truth);
    rec.success = isSuccess(rec.error, config.success_max_trans, config.success_max_rot);
  }
  return rec;
}

unsigned workerCount(unsigned requested) {
  if (const char* env = std::getenv("SGLOC_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialRecord> runSynthTrials(const SynthParams& params, const RunConfig& config, std::size_t trials,
                                        unsigned workers) {
  std::vector<TrialRecord> records(trials);
  const unsigned n = std::min<unsigned>(workerCount(workers), static_cast<unsigned>(std::max<std::size_t>(trials, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        records[t] = runSynthTrial(params, config, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

void writeTrialCsv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "trial,seed,status,success,e_trans,e_rot,"
        "est_tx,est_ty,est_tz,est_qx,est_qy,est_qz,est_qw,"
        "gt_tx,gt_ty,gt_tz,gt_qx,gt_qy,gt_qz,gt_qw,"
        "query_clusters,outliers,correspondences,clique_size,clique_exact,inliers,"
        "clustering_ms,query_ms,graph_ms,clique_ms,solve_ms,total_ms,wall_ms\n";
  for (const auto& r : records) {
    os << r.trial << ',' << r.seed << ',' << toString(r.status) << ',' << (r.success ? 1 : 0) << ','
       << fmt(r.error.e_trans) << ',' << fmt(r.error.e_rot);
    writePoseColumns(os, r.estimate);
    writePoseColumns(os, r.ground_truth);
    os << ',' << r.query_clusters << ',' << r.outliers << ',' << r.correspondences << ',' << r.clique_size << ','
       << (r.clique_exact ? 1 : 0) << ',' << r.inliers << ',' << fmtMs(r.timings.clustering_ms) << ','
       << fmtMs(r.timings.query_ms) << ',' << fmtMs(r.timings.graph_ms) << ',' << fmtMs(r.timings.clique_ms) << ','
       << fmtMs(r.timings.solve_ms) << ',' << fmtMs(r.timings.total_ms) << ',' << fmtMs(r.wall_ms) << '\n';
  }
}

TrialSummary summarize(const std::vector<TrialRecord>& records) {
  TrialSummary s;
  s.trials = records.size();
  std::vector<double> et, er;
  for (const auto& r : records) {
    if (!r.success) continue;
    et.push_back(r.error.e_trans);
    er.push_back(r.error.e_rot);
  }
  s.successes = et.size();
  if (s.trials > 0) s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.trials);
  if (!et.empty()) {
    s.median_e_trans = median(et);
    s.median_e_rot = median(er);
    for (std::size_t i = 0; i < et.size(); ++i) {
      s.mean_e_trans += et[i];
      s.mean_e_rot += er[i];
    }
    s.mean_e_trans /= static_cast<double>(et.size());
    s.mean_e_rot /= static_cast<double>(er.size());
  }
  return s;
}

}  // namespace sgloc
