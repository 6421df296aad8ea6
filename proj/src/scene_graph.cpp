#include "sgloc/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sgloc {
namespace {

constexpr std::array<Alignment, 6> kAlignments{{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

constexpr std::array<std::pair<int, int>, 3> kEdges{{{0, 1}, {1, 2}, {2, 0}}};

// Area of a triangle with sides a >= b >= c (Kahan's form of Heron's formula).
double heronArea(double a, double b, double c) {
  const double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return 0.25 * std::sqrt(std::max(0.0, p));
}

void checkQuantum(const DescriptorDb& db, const RetrievalParams& params) {
  if (std::abs(db.quantum() - params.quantum) > 1e-12) {
    throw Error("queryDb: retrieval quantum differs from the quantum the db was built with");
  }
}

// Every alignment of query vertices onto map vertices that passes the side,
// label and shape checks. `shape(qi, mi)` returns the shape distance between
// query vertex qi and map vertex mi.
template <typename ShapeFn>
std::vector<Alignment> alignTriangles(const TriangleDescriptor& q, const TriangleDescriptor& m, double quantum,
                                      const RetrievalParams& params, ShapeFn&& shape) {
  std::vector<Alignment> out;
  for (const Alignment& a : kAlignments) {
    bool ok = true;
    for (const auto& [i, j] : kEdges) {
      if (std::abs(q.side(i, j) - m.side(a[i], a[j])) > quantum) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (params.semantic) {
      for (int i = 0; i < 3 && ok; ++i) ok = q.labels[i] == m.labels[a[i]];
      if (!ok) continue;
    }
    for (int i = 0; i < 3 && ok; ++i) ok = shape(i, a[i]) <= params.shape_threshold;
    if (ok) out.push_back(a);
  }
  return out;
}

template <typename ShapeFn>
std::vector<TriangleMatch> matchTriangle(const DescriptorDb& db, const TriangleDescriptor& query,
                                         const RetrievalParams& params, ShapeFn&& shape) {
  const double quantum = db.quantum();
  const TriangleKey key = quantizeKey(query, quantum);
  std::vector<TriangleMatch> matches;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        for (std::uint32_t idx : db.bucket({key[0] + dx, key[1] + dy, key[2] + dz})) {
          const TriangleDescriptor& m = db.triangles()[idx];
          auto alignments = alignTriangles(query, m, quantum, params,
                                           [&](int qi, int mi) { return shape(qi, m, mi); });
          if (!alignments.empty()) matches.push_back(TriangleMatch{idx, std::move(alignments)});
        }
      }
    }
  }
  std::sort(matches.begin(), matches.end(),
            [](const TriangleMatch& a, const TriangleMatch& b) { return a.map_triangle < b.map_triangle; });
  return matches;
}

}  // namespace

std::array<std::uint32_t, 3> TriangleDescriptor::sortedVertices() const {
  auto v = vertices;
  std::sort(v.begin(), v.end());
  return v;
}

std::optional<TriangleDescriptor> makeTriangle(std::span<const Cluster> clusters, std::uint32_t a,
                                               std::uint32_t b, std::uint32_t c,
                                               const TriangulationParams& params) {
  if (a == b || b == c || a == c) return std::nullopt;
  const std::array<std::uint32_t, 3> ids{a, b, c};
  // Length of the side opposite each vertex.
  std::array<double, 3> opposite{};
  for (int i = 0; i < 3; ++i) {
    opposite[i] = (clusters[ids[(i + 1) % 3]].centroid - clusters[ids[(i + 2) % 3]].centroid).norm();
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (opposite[x] != opposite[y]) return opposite[x] < opposite[y];
    return ids[x] < ids[y];
  });
  // v3 faces the shortest side, v1 the middle one, v2 the longest.
  TriangleDescriptor t;
  t.vertices = {ids[order[1]], ids[order[2]], ids[order[0]]};
  t.sides = {opposite[order[0]], opposite[order[1]], opposite[order[2]]};
  for (int i = 0; i < 3; ++i) {
    t.labels[i] = clusters[t.vertices[i]].label;
    t.covariances[i] = clusters[t.vertices[i]].covariance;
  }
  if (t.sides[0] < params.min_side || t.sides[2] > params.max_side) return std::nullopt;
  if (heronArea(t.sides[2], t.sides[1], t.sides[0]) < params.min_area) return std::nullopt;
  return t;
}

std::vector<TriangleDescriptor> triangulate(std::span<const Cluster> clusters, const TriangulationParams& params) {
  const std::size_t n = clusters.size();
  if (n < 3 || params.k_neighbors < 2) return {};
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k_neighbors), n - 1);

  std::vector<std::array<std::uint32_t, 3>> triples;
  triples.reserve(n * k * (k - 1) / 2);
  std::vector<std::pair<double, std::uint32_t>> dist(n);
  for (std::uint32_t anchor = 0; anchor < n; ++anchor) {
    for (std::uint32_t j = 0; j < n; ++j) {
      dist[j] = {j == anchor ? std::numeric_limits<double>::infinity()
                             : (clusters[j].centroid - clusters[anchor].centroid).squaredNorm(),
                 j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t y = x + 1; y < k; ++y) {
        std::array<std::uint32_t, 3> t{anchor, dist[x].second, dist[y].second};
        std::sort(t.begin(), t.end());
        triples.push_back(t);
      }
    }
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  std::vector<TriangleDescriptor> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    if (auto tri = makeTriangle(clusters, t[0], t[1], t[2], params)) out.push_back(*tri);
  }
  return out;
}

TriangleKey quantizeKey(const TriangleDescriptor& t, double quantum) {
  TriangleKey key{};
  for (int i = 0; i < 3; ++i) key[i] = static_cast<int>(std::floor(t.sides[i] / quantum));
  return key;
}

DescriptorDb DescriptorDb::build(const ClusterMap& map, const TriangulationParams& tri, double quantum) {
  return fromTriangles(map.clusters, triangulate(map.clusters, tri), tri, quantum);
}

DescriptorDb DescriptorDb::fromTriangles(std::vector<Cluster> clusters, std::vector<TriangleDescriptor> triangles,
                                         const TriangulationParams& tri, double quantum) {
  if (!(quantum > 0)) throw Error("DescriptorDb: quantum must be positive");
  DescriptorDb db;
  db.clusters_ = std::move(clusters);
  db.triangles_ = std::move(triangles);
  db.tri_ = tri;
  db.quantum_ = quantum;
  db.index();
  return db;
}

void DescriptorDb::index() {
  sqrt_cov_.clear();
  sqrt_cov_.reserve(clusters_.size());
  for (const auto& c : clusters_) sqrt_cov_.push_back(sqrtPsd(c.covariance));
  buckets_.clear();
  for (std::uint32_t i = 0; i < triangles_.size(); ++i) {
    for (std::uint32_t v : triangles_[i].vertices) {
      if (v >= clusters_.size()) throw Error("DescriptorDb: triangle references unknown cluster " + std::to_string(v));
    }
    buckets_[quantizeKey(triangles_[i], quantum_)].push_back(i);
  }
}

std::span<const std::uint32_t> DescriptorDb::bucket(const TriangleKey& key) const {
  const auto it = buckets_.find(key);
  if (it == buckets_.end()) return {};
  return it->second;
}

std::vector<TriangleMatch> queryDb(const DescriptorDb& db, const TriangleDescriptor& query,
                                   const RetrievalParams& params) {
  checkQuantum(db, params);
  return matchTriangle(db, query, params, [&](int qi, const TriangleDescriptor& m, int mi) {
    return shapeDistance<double>(query.covariances[qi], m.covariances[mi], db.sqrtCovariance(m.vertices[mi]));
  });
}

CorrespondenceSet generateCorrespondences(std::span<const Cluster> query, const DescriptorDb& db,
                                          const TriangulationParams& tri, const RetrievalParams& params) {
  checkQuantum(db, params);
  CorrespondenceSet out;
  out.query_triangles = triangulate(query, tri);

  // Shape distances are reused across many triangle pairs.
  const std::size_t nm = db.clusters().size();
  std::vector<float> shape_cache(query.size() * nm, std::numeric_limits<float>::quiet_NaN());
  const auto shape = [&](std::uint32_t q, std::uint32_t m) {
    float& slot = shape_cache[q * nm + m];
    if (std::isnan(slot)) {
      slot = static_cast<float>(
          shapeDistance<double>(query[q].covariance, db.clusters()[m].covariance, db.sqrtCovariance(m)));
    }
    return static_cast<double>(slot);
  };

  std::unordered_map<std::uint64_t, Correspondence> pairs;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> support;
  for (std::uint32_t ti = 0; ti < out.query_triangles.size(); ++ti) {
    const TriangleDescriptor& qt = out.query_triangles[ti];
    const auto matches = matchTriangle(db, qt, params, [&](int qi, const TriangleDescriptor& m, int mi) {
      return shape(qt.vertices[qi], m.vertices[mi]);
    });
    for (const TriangleMatch& match : matches) {
      const TriangleDescriptor& mt = db.triangles()[match.map_triangle];
      support.clear();
      for (const Alignment& a : match.alignments) {
        for (int i = 0; i < 3; ++i) support.emplace_back(qt.vertices[i], mt.vertices[a[i]]);
      }
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      for (const auto& [q, m] : support) {
        const std::uint64_t key = (static_cast<std::uint64_t>(q) << 32) | m;
        auto [it, inserted] = pairs.try_emplace(key, Correspondence{q, m, 0, ti, match.map_triangle});
        ++it->second.votes;
      }
    }
  }

  out.correspondences.reserve(pairs.size());
  for (const auto& [key, c] : pairs) out.correspondences.push_back(c);
  std::sort(out.correspondences.begin(), out.correspondences.end(), [](const auto& a, const auto& b) {
    return a.query_id != b.query_id ? a.query_id < b.query_id : a.map_id < b.map_id;
  });
  return out;
}

}  // namespace sgloc
