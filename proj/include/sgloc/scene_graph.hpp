#ifndef SGLOC_SCENE_GRAPH_HPP
#define SGLOC_SCENE_GRAPH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sgloc/clustering.hpp"

namespace sgloc {

struct TriangulationParams {
  int k_neighbors = 10;
  double min_side = 1.0;   // m
  double max_side = 120.0; // m
  double min_area = 0.5;   // m^2
};

struct RetrievalParams {
  double quantum = 0.5;          // hash bin width on side lengths, m
  double shape_threshold = 1.0;  // per-vertex zero-mean Wasserstein bound, m
  bool semantic = true;          // false: labels ignored (pure geometric descriptors)
};

/// Triangle over three clusters in canonical vertex order: the side between
/// vertex i and vertex i+1 (cyclic) has length sides[i], and sides are sorted
/// ascending, so sides = (d12, d23, d31).
struct TriangleDescriptor {
  std::array<std::uint32_t, 3> vertices{};
  std::array<double, 3> sides{};
  std::array<ClassId, 3> labels{};
  std::array<Mat3d, 3> covariances{Mat3d::Zero(), Mat3d::Zero(), Mat3d::Zero()};

  /// Length between canonical vertices i and j (i != j).
  double side(int i, int j) const {
    if ((i + 1) % 3 == j) return sides[i];
    return sides[j];
  }

  std::array<std::uint32_t, 3> sortedVertices() const;
};

using TriangleKey = std::array<int, 3>;

struct TriangleKeyHash {
  std::size_t operator()(const TriangleKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Canonical triangle over clusters a, b, c, or nothing if it fails the side or area filters.
std::optional<TriangleDescriptor> makeTriangle(std::span<const Cluster> clusters, std::uint32_t a,
                                               std::uint32_t b, std::uint32_t c,
                                               const TriangulationParams& params);

/// Each anchor joined with every pair of its K nearest clusters; deduplicated by vertex set.
std::vector<TriangleDescriptor> triangulate(std::span<const Cluster> clusters, const TriangulationParams& params);

/// floor(side / quantum) per side.
TriangleKey quantizeKey(const TriangleDescriptor& t, double quantum);

/// Hash table from quantized sorted side lengths to map triangles.
class DescriptorDb {
 public:
  DescriptorDb() = default;

  static DescriptorDb build(const ClusterMap& map, const TriangulationParams& tri, double quantum);
  /// Rebuilds the buckets from stored triangles (used when reading a serialized db).
  static DescriptorDb fromTriangles(std::vector<Cluster> clusters, std::vector<TriangleDescriptor> triangles,
                                    const TriangulationParams& tri, double quantum);

  const std::vector<TriangleDescriptor>& triangles() const { return triangles_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const TriangulationParams& triangulation() const { return tri_; }
  double quantum() const { return quantum_; }
  std::size_t size() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  /// Triangle indices stored under `key`; empty when absent.
  std::span<const std::uint32_t> bucket(const TriangleKey& key) const;
  std::size_t bucketCount() const { return buckets_.size(); }
  const std::unordered_map<TriangleKey, std::vector<std::uint32_t>, TriangleKeyHash>& buckets() const {
    return buckets_;
  }

  const Mat3d& sqrtCovariance(std::uint32_t cluster_id) const { return sqrt_cov_[cluster_id]; }

 private:
  void index();

  std::vector<Cluster> clusters_;
  std::vector<Mat3d> sqrt_cov_;
  std::vector<TriangleDescriptor> triangles_;
  std::unordered_map<TriangleKey, std::vector<std::uint32_t>, TriangleKeyHash> buckets_;
  TriangulationParams tri_;
  double quantum_ = 0.5;
};

/// Vertex alignment: query canonical vertex i corresponds to map canonical vertex alignment[i].
using Alignment = std::array<std::uint8_t, 3>;

struct TriangleMatch {
  std::uint32_t map_triangle = 0;
  std::vector<Alignment> alignments;  // identity first when it passes
};

/// Map triangles similar to `query`: probes the query key and its 26 neighbors,
/// then keeps candidates with at least one vertex alignment whose sides agree
/// within one quantum, whose labels agree (semantic mode) and whose per-vertex
/// shape distance is within the threshold.
std::vector<TriangleMatch> queryDb(const DescriptorDb& db, const TriangleDescriptor& query,
                                   const RetrievalParams& params);

struct Correspondence {
  std::uint32_t query_id = 0;
  std::uint32_t map_id = 0;
  std::uint32_t votes = 0;
  // First supporting triangle pair, kept for diagnostics.
  std::uint32_t query_triangle = 0;
  std::uint32_t map_triangle = 0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> correspondences;  // sorted by (query_id, map_id)
  std::vector<TriangleDescriptor> query_triangles;
};

CorrespondenceSet generateCorrespondences(std::span<const Cluster> query, const DescriptorDb& db,
                                          const TriangulationParams& tri, const RetrievalParams& params);

}  // namespace sgloc

#endif  // SGLOC_SCENE_GRAPH_HPP
