#include "sgloc/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace sgloc {
namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ull;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ull;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ull;
    return static_cast<std::size_t>(h);
  }
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

bool lexLess(const Vec3d& a, const Vec3d& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

}  // namespace

std::vector<std::vector<std::size_t>> euclideanComponents(const std::vector<Vec3d>& points, double tolerance) {
  if (!(tolerance > 0)) throw Error("euclideanComponents: tolerance must be positive");
  const auto cellOf = [tolerance](const Vec3d& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / tolerance)),
                   static_cast<std::int64_t>(std::floor(p.y() / tolerance)),
                   static_cast<std::int64_t>(std::floor(p.z() / tolerance))};
  };

  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  grid.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) grid[cellOf(points[i])].push_back(i);

  const double tol2 = tolerance * tolerance;
  DisjointSets sets(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CellKey c = cellOf(points[i]);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (j > i && (points[i] - points[j]).squaredNorm() <= tol2) sets.unite(i, j);
          }
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::size_t> root_to_component;
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = root_to_component.try_emplace(root, components.size());
    if (inserted) components.emplace_back();
    components[it->second].push_back(i);
  }

  // Order by each component's lexicographically smallest point.
  std::vector<std::pair<Vec3d, std::size_t>> keys;
  keys.reserve(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    Vec3d lo = points[components[c].front()];
    for (std::size_t i : components[c]) {
      if (lexLess(points[i], lo)) lo = points[i];
    }
    keys.emplace_back(lo, c);
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (lexLess(a.first, b.first)) return true;
    if (lexLess(b.first, a.first)) return false;
    return a.second < b.second;
  });
  std::vector<std::vector<std::size_t>> ordered;
  ordered.reserve(components.size());
  for (const auto& [lo, c] : keys) ordered.push_back(std::move(components[c]));
  return ordered;
}

std::vector<Cluster> clusterCloud(const SemanticPointCloud& cloud, const ClusterParams& params,
                                  const ClassTable& classes) {
  if (cloud.labels.size() != cloud.points.size()) throw Error("clusterCloud: label count does not match point count");

  std::vector<std::vector<Vec3d>> per_class(classes.classCount());
  std::size_t admitted = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto cls = classes.classOf(cloud.labels[i]);
    if (!cls || static_cast<std::size_t>(*cls) >= per_class.size()) continue;
    if (++admitted > params.max_points) {
      throw Error("clusterCloud: more than max_points (" + std::to_string(params.max_points) +
                  ") labeled points of interest");
    }
    per_class[*cls].push_back(cloud.points[i].head<3>().cast<double>());
  }

  std::vector<Cluster> clusters;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const auto& pts = per_class[c];
    if (pts.empty()) continue;
    const auto components = euclideanComponents(pts, params.toleranceFor(static_cast<ClassId>(c)));
    std::vector<Vec3d> members;
    for (const auto& comp : components) {
      if (comp.size() < params.min_points) continue;
      members.clear();
      for (std::size_t i : comp) members.push_back(pts[i]);
      clusters.push_back(fitGaussian<double>(members, static_cast<ClassId>(c)));
    }
  }
  return clusters;
}

ClusterMap clusterMapCloud(const SemanticPointCloud& world_cloud, const ClusterParams& params,
                           const ClassTable& classes, std::uint64_t config_hash) {
  ClusterMap map;
  map.clusters = clusterCloud(world_cloud, params, classes);
  map.config_hash = config_hash;
  return map;
}

}  // namespace sgloc
