#ifndef SGLOC_CLUSTERING_HPP
#define SGLOC_CLUSTERING_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgloc/gaussian.hpp"

namespace sgloc {

/// Labeled scan: (x, y, z, intensity) per point plus a dataset semantic label.
struct SemanticPointCloud {
  std::vector<Eigen::Vector4f> points;
  std::vector<std::uint16_t> labels;

  std::size_t size() const { return points.size(); }
};

/// Maps dataset label ids onto the canonical classes used for matching.
/// Canonical class ids are indices into `names`.
struct ClassTable {
  std::vector<std::string> names{"car", "trunk", "pole"};
  std::map<std::uint16_t, ClassId> from_label{{10, 0}, {71, 1}, {80, 2}};

  std::optional<ClassId> classOf(std::uint16_t label) const {
    const auto it = from_label.find(label);
    if (it == from_label.end()) return std::nullopt;
    return it->second;
  }

  std::optional<ClassId> idOf(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<ClassId>(i);
    }
    return std::nullopt;
  }

  std::size_t classCount() const { return names.size(); }
};

struct ClusterParams {
  /// Linking distance per canonical class, indexed by ClassId. Missing entries use `default_tolerance`.
  std::vector<double> tolerance{0.8, 0.5, 0.5};
  double default_tolerance = 0.5;
  std::size_t min_points = 20;
  /// Upper bound on whitelisted points accepted in one cloud.
  std::size_t max_points = 50'000'000;

  double toleranceFor(ClassId c) const {
    return c >= 0 && static_cast<std::size_t>(c) < tolerance.size() ? tolerance[c] : default_tolerance;
  }
};

/// Clusters in the world frame. Cluster ids are positions in `clusters`.
struct ClusterMap {
  std::vector<Cluster> clusters;
  std::string frame_id = "world";
  std::uint64_t config_hash = 0;
};

/// Euclidean connected components per canonical class, each fitted as a Gaussian.
///
/// Two same-class points are linked when their distance is at most the class
/// tolerance; components smaller than `min_points` are dropped. Output is sorted
/// by class, then by the lexicographically smallest point of each component, so
/// identical input yields identical ids.
std::vector<Cluster> clusterCloud(const SemanticPointCloud& cloud, const ClusterParams& params,
                                  const ClassTable& classes);

ClusterMap clusterMapCloud(const SemanticPointCloud& world_cloud, const ClusterParams& params,
                           const ClassTable& classes, std::uint64_t config_hash = 0);

/// Same components over plain points of one class; returns point-index lists in
/// deterministic order. Exposed for tests.
std::vector<std::vector<std::size_t>> euclideanComponents(const std::vector<Vec3d>& points, double tolerance);

}  // namespace sgloc

#endif  // SGLOC_CLUSTERING_HPP
