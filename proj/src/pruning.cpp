#include "sgloc/pruning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

namespace sgloc {
namespace {

using Clock = std::chrono::steady_clock;

struct Degeneracy {
  std::vector<std::uint32_t> order;     // removal order, lowest core first
  std::vector<std::uint32_t> position;  // position[v] in order
  std::vector<std::uint32_t> core;
};

template <typename Fn>
void forEachBit(std::span<const std::uint64_t> bits, Fn&& fn) {
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word) {
      const int b = std::countr_zero(word);
      fn(static_cast<std::uint32_t>(w * 64 + b));
      word &= word - 1;
    }
  }
}

std::size_t popcount(std::span<const std::uint64_t> bits) {
  std::size_t c = 0;
  for (auto w : bits) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

// Batagelj-Zaversnik bucket peeling.
Degeneracy degeneracy(const ConsistencyGraph& g) {
  const std::size_t n = g.size();
  Degeneracy d;
  d.core.resize(n);
  d.order.resize(n);
  d.position.resize(n);
  std::size_t max_deg = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    d.core[v] = static_cast<std::uint32_t>(g.degree(v));
    max_deg = std::max<std::size_t>(max_deg, d.core[v]);
  }
  std::vector<std::uint32_t> bin(max_deg + 2, 0);
  for (std::uint32_t v = 0; v < n; ++v) ++bin[d.core[v]];
  std::uint32_t start = 0;
  for (std::size_t k = 0; k <= max_deg; ++k) {
    const std::uint32_t count = bin[k];
    bin[k] = start;
    start += count;
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    d.position[v] = bin[d.core[v]]++;
    d.order[d.position[v]] = v;
  }
  for (std::size_t k = max_deg; k > 0; --k) bin[k] = bin[k - 1];
  bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t v = d.order[i];
    forEachBit(g.row(v), [&](std::uint32_t u) {
      if (d.core[u] > d.core[v]) {
        const std::uint32_t du = d.core[u];
        const std::uint32_t pu = d.position[u];
        const std::uint32_t pw = bin[du];
        const std::uint32_t w = d.order[pw];
        if (u != w) {
          d.position[u] = pw;
          d.order[pu] = w;
          d.position[w] = pu;
          d.order[pw] = u;
        }
        ++bin[du];
        --d.core[u];
      }
    });
  }
  return d;
}

// Greedy clique grown from each vertex by repeatedly taking the candidate with
// the highest core number.
std::vector<std::uint32_t> greedyClique(const ConsistencyGraph& g, const Degeneracy& d) {
  const std::size_t n = g.size();
  const std::size_t words = g.words();
  std::vector<std::uint32_t> best;
  std::vector<std::uint64_t> cand(words);
  std::vector<std::uint32_t> clique;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint32_t v = d.order[i];
    if (d.core[v] + 1 <= best.size()) continue;
    clique.assign(1, v);
    std::copy(g.row(v).begin(), g.row(v).end(), cand.begin());
    while (true) {
      std::int64_t pick = -1;
      forEachBit(cand, [&](std::uint32_t u) {
        if (pick < 0 || d.core[u] > d.core[static_cast<std::uint32_t>(pick)]) pick = u;
      });
      if (pick < 0) break;
      const auto u = static_cast<std::uint32_t>(pick);
      clique.push_back(u);
      const auto row = g.row(u);
      for (std::size_t w = 0; w < words; ++w) cand[w] &= row[w];
    }
    if (clique.size() > best.size()) best = clique;
  }
  return best;
}

// Branch and bound with greedy coloring bounds on a dense local subgraph.
class LocalSearch {
 public:
  LocalSearch(std::vector<std::uint32_t> globals, const ConsistencyGraph& g, Clock::time_point deadline,
              std::size_t& nodes)
      : globals_(std::move(globals)), deadline_(deadline), nodes_(nodes) {
    s_ = globals_.size();
    w_ = (s_ + 63) / 64;
    adj_.assign(s_ * w_, 0);
    for (std::size_t i = 0; i < s_; ++i) {
      for (std::size_t j = i + 1; j < s_; ++j) {
        if (g.adjacent(globals_[i], globals_[j])) {
          adj_[i * w_ + (j >> 6)] |= 1ull << (j & 63);
          adj_[j * w_ + (i >> 6)] |= 1ull << (i & 63);
        }
      }
    }
  }

  // Searches cliques extending `root`; updates best when something larger is found.
  // Returns false when the deadline passed.
  bool run(const std::vector<std::uint32_t>& root, std::vector<std::uint32_t>& best) {
    root_ = &root;
    best_ = &best;
    std::vector<std::uint64_t> p(w_, 0);
    for (std::size_t i = 0; i < s_; ++i) p[i >> 6] |= 1ull << (i & 63);
    current_.clear();
    if (s_ == 0) {
      record();
      return true;
    }
    expand(p);
    return !aborted_;
  }

 private:
  std::span<const std::uint64_t> adj(std::size_t v) const { return {adj_.data() + v * w_, w_}; }

  void record() {
    if (root_->size() + current_.size() <= best_->size()) return;
    std::vector<std::uint32_t> clique = *root_;
    for (auto v : current_) clique.push_back(globals_[v]);
    *best_ = std::move(clique);
  }

  void expand(std::vector<std::uint64_t>& p) {
    if ((++nodes_ & 255u) == 0 && Clock::now() > deadline_) aborted_ = true;
    if (aborted_) return;

    // Greedy sequential coloring: color classes are independent sets, so a
    // vertex colored k bounds the clique within the prefix by k.
    const std::size_t count = popcount(p);
    std::vector<std::uint32_t> order(count);
    std::vector<std::uint32_t> colors(count);
    std::vector<std::uint64_t> uncolored = p;
    std::vector<std::uint64_t> q(w_);
    std::size_t idx = 0;
    std::uint32_t color = 0;
    while (idx < count) {
      ++color;
      q = uncolored;
      for (std::size_t w = 0; w < w_; ++w) {
        while (q[w]) {
          const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(q[w]));
          uncolored[w] &= ~(1ull << (v & 63));
          q[w] &= ~(1ull << (v & 63));
          const auto row = adj(v);
          for (std::size_t x = w; x < w_; ++x) q[x] &= ~row[x];
          order[idx] = static_cast<std::uint32_t>(v);
          colors[idx] = color;
          ++idx;
        }
      }
    }

    const std::size_t base = root_->size();
    std::vector<std::uint64_t> next(w_);
    for (std::size_t k = count; k-- > 0;) {
      if (base + current_.size() + colors[k] <= best_->size()) return;
      const std::uint32_t v = order[k];
      current_.push_back(v);
      const auto row = adj(v);
      bool any = false;
      for (std::size_t w = 0; w < w_; ++w) {
        next[w] = p[w] & row[w];
        any |= next[w] != 0;
      }
      if (any) {
        expand(next);
      } else {
        record();
      }
      current_.pop_back();
      p[v >> 6] &= ~(1ull << (v & 63));
      if (aborted_) return;
    }
  }

  std::vector<std::uint32_t> globals_;
  std::size_t s_ = 0;
  std::size_t w_ = 0;
  std::vector<std::uint64_t> adj_;
  Clock::time_point deadline_;
  std::size_t& nodes_;
  const std::vector<std::uint32_t>* root_ = nullptr;
  std::vector<std::uint32_t>* best_ = nullptr;
  std::vector<std::uint32_t> current_;
  bool aborted_ = false;
};

}  // namespace

ConsistencyGraph::ConsistencyGraph(std::size_t n) : n_(n), words_((n + 63) / 64), rows_(n * words_, 0) {}

void ConsistencyGraph::addEdge(std::uint32_t i, std::uint32_t j) {
  if (i >= n_ || j >= n_) throw Error("ConsistencyGraph::addEdge: vertex out of range");
  if (i == j) throw Error("ConsistencyGraph::addEdge: self loop");
  if (adjacent(i, j)) return;
  rows_[i * words_ + (j >> 6)] |= 1ull << (j & 63);
  rows_[j * words_ + (i >> 6)] |= 1ull << (i & 63);
  ++edges_;
}

std::size_t ConsistencyGraph::degree(std::uint32_t i) const { return popcount(row(i)); }

void ConsistencyGraph::writeEdgeList(std::ostream& os) const {
  os << n_ << ' ' << edges_ << '\n';
  for (std::uint32_t i = 0; i < n_; ++i) {
    forEachBit(row(i), [&](std::uint32_t j) {
      if (i < j) os << i << ' ' << j << '\n';
    });
  }
}

bool consistent(const Correspondence& a, const Correspondence& b, std::span<const Cluster> query,
                std::span<const Cluster> map, const ConsistencyParams& params) {
  if (a.query_id == b.query_id || a.map_id == b.map_id) return false;
  const Cluster& qa = query[a.query_id];
  const Cluster& qb = query[b.query_id];
  const Cluster& ma = map[a.map_id];
  const Cluster& mb = map[b.map_id];
  const double dq = (qa.centroid - qb.centroid).norm();
  const double dm = (ma.centroid - mb.centroid).norm();
  if (std::abs(dq - dm) > params.epsilon) return false;
  if (params.metric == ConsistencyMetric::Wasserstein) {
    // Spread of the difference Gaussian N(a_i - a_j, S_i + S_j); the trace is rotation invariant.
    const double sq = std::sqrt(std::max(0.0, (qa.covariance + qb.covariance).trace()));
    const double sm = std::sqrt(std::max(0.0, (ma.covariance + mb.covariance).trace()));
    if (std::abs(sq - sm) > params.epsilon) return false;
  }
  return true;
}

ConsistencyGraph buildConsistencyGraph(std::span<const Correspondence> correspondences,
                                       std::span<const Cluster> query, std::span<const Cluster> map,
                                       const ConsistencyParams& params) {
  const std::size_t n = correspondences.size();
  for (const auto& c : correspondences) {
    if (c.query_id >= query.size()) throw Error("buildConsistencyGraph: unknown query cluster " + std::to_string(c.query_id));
    if (c.map_id >= map.size()) throw Error("buildConsistencyGraph: unknown map cluster " + std::to_string(c.map_id));
  }
  ConsistencyGraph g(n);
  g.correspondences.assign(correspondences.begin(), correspondences.end());
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (consistent(correspondences[i], correspondences[j], query, map, params)) g.addEdge(i, j);
    }
  }
  return g;
}

std::vector<std::uint32_t> coreNumbers(const ConsistencyGraph& g) { return degeneracy(g).core; }

CliqueResult maxClique(const ConsistencyGraph& g, std::chrono::duration<double> budget) {
  CliqueResult result;
  const std::size_t n = g.size();
  if (n == 0) return result;
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(budget);

  const Degeneracy d = degeneracy(g);
  std::vector<std::uint32_t> best = greedyClique(g, d);
  result.heuristic_size = best.size();

  // A clique larger than `best` lives in the (|best|)-core; each one is found
  // from its earliest vertex in degeneracy order, searching only later neighbors.
  std::size_t nodes = 0;
  std::vector<std::uint32_t> root(1);
  std::vector<std::uint32_t> candidates;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint32_t v = d.order[i];
    if (d.core[v] < best.size()) continue;
    candidates.clear();
    forEachBit(g.row(v), [&](std::uint32_t u) {
      if (d.position[u] > i && d.core[u] >= best.size()) candidates.push_back(u);
    });
    if (candidates.size() + 1 <= best.size()) continue;
    // Higher local degree first gives tighter colorings.
    std::vector<std::size_t> local_degree(candidates.size(), 0);
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      for (std::size_t b = a + 1; b < candidates.size(); ++b) {
        if (g.adjacent(candidates[a], candidates[b])) {
          ++local_degree[a];
          ++local_degree[b];
        }
      }
    }
    std::vector<std::size_t> idx(candidates.size());
    for (std::size_t a = 0; a < idx.size(); ++a) idx[a] = a;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (local_degree[a] != local_degree[b]) return local_degree[a] > local_degree[b];
      return candidates[a] < candidates[b];
    });
    std::vector<std::uint32_t> sorted;
    sorted.reserve(idx.size());
    for (auto a : idx) sorted.push_back(candidates[a]);

    root[0] = v;
    LocalSearch search(std::move(sorted), g, deadline, nodes);
    if (!search.run(root, best)) {
      result.exact = false;
      break;
    }
  }

  std::sort(best.begin(), best.end());
  result.vertices = std::move(best);
  if (!isClique(g, result.vertices)) throw Error("maxClique: internal error, result is not a clique");
  return result;
}

std::vector<std::uint32_t> bruteForceMaxClique(const ConsistencyGraph& g) {
  const std::size_t n = g.size();
  if (n > 25) throw Error("bruteForceMaxClique: graph too large (n > 25)");
  std::vector<std::uint32_t> adj(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i != j && g.adjacent(i, j)) adj[i] |= 1u << j;
    }
  }
  std::uint32_t best = 0;
  // Enumerates every clique once: extend only with higher-numbered common neighbors.
  auto extend = [&](auto&& self, std::uint32_t clique, std::uint32_t cand) -> void {
    if (std::popcount(clique) > std::popcount(best)) best = clique;
    while (cand) {
      const int v = std::countr_zero(cand);
      cand &= cand - 1;
      const std::uint32_t higher = v == 31 ? 0u : ~((2u << v) - 1u);
      self(self, clique | (1u << v), cand & adj[v] & higher);
    }
  };
  const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
  extend(extend, 0u, all);
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (best & (1u << v)) out.push_back(v);
  }
  return out;
}

bool isClique(const ConsistencyGraph& g, std::span<const std::uint32_t> vertices) {
  for (std::size_t a = 0; a < vertices.size(); ++a) {
    if (vertices[a] >= g.size()) return false;
    for (std::size_t b = a + 1; b < vertices.size(); ++b) {
      if (vertices[a] == vertices[b] || !g.adjacent(vertices[a], vertices[b])) return false;
    }
  }
  return true;
}

}  // namespace sgloc
