#ifndef SGLOC_PRUNING_HPP
#define SGLOC_PRUNING_HPP

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgloc/scene_graph.hpp"

namespace sgloc {

enum class ConsistencyMetric { Euclidean, Wasserstein };

struct ConsistencyParams {
  ConsistencyMetric metric = ConsistencyMetric::Euclidean;
  double epsilon = 0.5;  // m
};

/// Undirected graph with bitset adjacency rows. Vertex i of a consistency graph
/// is correspondences[i].
class ConsistencyGraph {
 public:
  ConsistencyGraph() = default;
  explicit ConsistencyGraph(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t words() const { return words_; }
  std::size_t edgeCount() const { return edges_; }

  void addEdge(std::uint32_t i, std::uint32_t j);
  bool adjacent(std::uint32_t i, std::uint32_t j) const {
    return (rows_[i * words_ + (j >> 6)] >> (j & 63)) & 1u;
  }
  std::span<const std::uint64_t> row(std::uint32_t i) const { return {rows_.data() + i * words_, words_}; }
  std::size_t degree(std::uint32_t i) const;

  /// Edge list: header "n m", then one "i j" line per edge with i < j.
  void writeEdgeList(std::ostream& os) const;

  std::vector<Correspondence> correspondences;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint64_t> rows_;
};

/// Pairwise test between two correspondences (query cluster -> map cluster).
/// Correspondences sharing a query or a map cluster are never consistent.
bool consistent(const Correspondence& a, const Correspondence& b, std::span<const Cluster> query,
                std::span<const Cluster> map, const ConsistencyParams& params);

ConsistencyGraph buildConsistencyGraph(std::span<const Correspondence> correspondences,
                                       std::span<const Cluster> query, std::span<const Cluster> map,
                                       const ConsistencyParams& params);

struct CliqueResult {
  std::vector<std::uint32_t> vertices;  // ascending
  bool exact = true;                    // false when the time budget ran out
  std::size_t heuristic_size = 0;       // greedy lower bound before branch and bound
};

/// Maximum clique: greedy bound over a degeneracy ordering, core pruning, then
/// branch and bound with greedy-coloring upper bounds. Anytime: on timeout the
/// best clique so far is returned with exact = false.
CliqueResult maxClique(const ConsistencyGraph& g,
                       std::chrono::duration<double> budget = std::chrono::duration<double>(10.0));

/// Exhaustive clique enumeration; n <= 25.
std::vector<std::uint32_t> bruteForceMaxClique(const ConsistencyGraph& g);

bool isClique(const ConsistencyGraph& g, std::span<const std::uint32_t> vertices);

/// Core number of every vertex.
std::vector<std::uint32_t> coreNumbers(const ConsistencyGraph& g);

}  // namespace sgloc

#endif  // SGLOC_PRUNING_HPP
