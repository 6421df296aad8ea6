#ifndef SGLOC_LOCALIZER_HPP
#define SGLOC_LOCALIZER_HPP

#include <chrono>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sgloc/config.hpp"

namespace sgloc {

enum class LocalizationStatus { Success, NoCorrespondences, CliqueTooSmall, Degenerate };

std::string_view toString(LocalizationStatus s);

/// Wall-clock per stage, milliseconds.
struct StageTimings {
  double clustering_ms = 0;
  double query_ms = 0;  // query triangulation, retrieval, correspondence generation
  double graph_ms = 0;  // consistency graph construction
  double clique_ms = 0;
  double solve_ms = 0;
  double total_ms = 0;
};

struct LocalizationResult {
  LocalizationStatus status = LocalizationStatus::NoCorrespondences;
  std::optional<RegistrationResult> registration;  // set unless the pipeline stopped before solving
  std::size_t query_cluster_count = 0;
  std::size_t query_triangle_count = 0;
  std::size_t correspondence_count = 0;
  std::size_t graph_edge_count = 0;
  std::size_t clique_size = 0;
  bool clique_exact = true;
  std::vector<Correspondence> inliers;  // the clique
  StageTimings timings;

  bool ok() const { return status == LocalizationStatus::Success; }
  /// Estimated pose; only meaningful when ok().
  const Posed& pose() const { return registration->pose; }
};

/// One-shot localization of query clusters (sensor frame) against a map.
/// `db` must have been built from `map`.
LocalizationResult localize(std::span<const Cluster> query, const ClusterMap& map, const DescriptorDb& db,
                            const RunConfig& config);

/// Clusters the scan first, then localizes; clustering time lands in the timings.
LocalizationResult localizeScan(const SemanticPointCloud& scan, const ClusterMap& map, const DescriptorDb& db,
                                const RunConfig& config);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsedMs() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }
  void reset() { start_ = std::chrono::steady_clock::now(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace sgloc

#endif  // SGLOC_LOCALIZER_HPP
