#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sgloc/pruning.hpp"
#include "test_support.hpp"

namespace sgloc {
namespace {

using testing::makeCluster;

ConsistencyGraph randomGraph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution edge(p);
  ConsistencyGraph g(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (edge(rng)) g.addEdge(i, j);
    }
  }
  return g;
}

// Plain Bron-Kerbosch over vectors, kept deliberately different from the library code.
void bronKerbosch(const ConsistencyGraph& g, std::vector<std::uint32_t>& r, std::vector<std::uint32_t> p,
                  std::vector<std::uint32_t> x, std::size_t& best) {
  if (p.empty() && x.empty()) {
    best = std::max(best, r.size());
    return;
  }
  while (!p.empty()) {
    const std::uint32_t v = p.back();
    std::vector<std::uint32_t> np, nx;
    for (auto u : p) {
      if (u != v && g.adjacent(u, v)) np.push_back(u);
    }
    for (auto u : x) {
      if (g.adjacent(u, v)) nx.push_back(u);
    }
    r.push_back(v);
    bronKerbosch(g, r, np, nx, best);
    r.pop_back();
    p.pop_back();
    x.push_back(v);
  }
}

std::size_t oracleCliqueSize(const ConsistencyGraph& g) {
  std::vector<std::uint32_t> r, p(g.size());
  std::iota(p.begin(), p.end(), 0u);
  std::size_t best = 0;
  bronKerbosch(g, r, p, {}, best);
  return best;
}

TEST(ConsistencyGraph, EdgeBookkeeping) {
  ConsistencyGraph g(70);
  g.addEdge(0, 65);
  g.addEdge(65, 0);
  g.addEdge(3, 4);
  EXPECT_EQ(g.edgeCount(), 2u);
  EXPECT_TRUE(g.adjacent(65, 0));
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_THROW(g.addEdge(5, 5), Error);
  EXPECT_THROW(g.addEdge(5, 70), Error);
  std::ostringstream os;
  g.writeEdgeList(os);
  EXPECT_EQ(os.str(), "70 2\n0 65\n3 4\n");
}

TEST(MaxClique, TriangleAndIsolatedVertex) {
  ConsistencyGraph g(4);
  g.addEdge(0, 1);
  g.addEdge(1, 2);
  g.addEdge(0, 2);
  const auto r = maxClique(g);
  EXPECT_EQ(r.vertices, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(bruteForceMaxClique(g).size(), 3u);
}

TEST(MaxClique, CompleteGraph) {
  ConsistencyGraph g(8);
  for (std::uint32_t i = 0; i < 8; ++i) {
    for (std::uint32_t j = i + 1; j < 8; ++j) g.addEdge(i, j);
  }
  EXPECT_EQ(maxClique(g).vertices.size(), 8u);
  EXPECT_EQ(bruteForceMaxClique(g).size(), 8u);
}

TEST(MaxClique, EmptyAndEdgelessGraphs) {
  EXPECT_TRUE(maxClique(ConsistencyGraph{}).vertices.empty());
  EXPECT_TRUE(bruteForceMaxClique(ConsistencyGraph{}).empty());
  EXPECT_EQ(maxClique(ConsistencyGraph(5)).vertices.size(), 1u);
}

TEST(MaxClique, MatchesBothOraclesOnRandomGraphs) {
  std::mt19937_64 rng(60);
  const double densities[] = {0.3, 0.5, 0.7};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const ConsistencyGraph g = randomGraph(rng, n, densities[trial % 3]);
    const auto r = maxClique(g);
    const auto brute = bruteForceMaxClique(g);
    ASSERT_TRUE(isClique(g, r.vertices));
    ASSERT_TRUE(isClique(g, brute));
    ASSERT_TRUE(r.exact);
    EXPECT_EQ(r.vertices.size(), brute.size()) << "trial " << trial;
    EXPECT_EQ(brute.size(), oracleCliqueSize(g)) << "trial " << trial;
    EXPECT_GE(r.vertices.size(), r.heuristic_size);
    EXPECT_TRUE(std::is_sorted(r.vertices.begin(), r.vertices.end()));
  }
}

TEST(MaxClique, LargerGraphsAgainstBronKerbosch) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const ConsistencyGraph g = randomGraph(rng, 60 + rng() % 90, 0.3 + 0.05 * (trial % 6));
    const auto r = maxClique(g);
    ASSERT_TRUE(isClique(g, r.vertices));
    EXPECT_EQ(r.vertices.size(), oracleCliqueSize(g)) << "trial " << trial;
  }
}

TEST(MaxClique, FindsPlantedClique) {
  std::mt19937_64 rng(62);
  ConsistencyGraph g = randomGraph(rng, 600, 0.05);
  std::vector<std::uint32_t> planted(600);
  std::iota(planted.begin(), planted.end(), 0u);
  std::shuffle(planted.begin(), planted.end(), rng);
  planted.resize(40);
  for (std::size_t a = 0; a < planted.size(); ++a) {
    for (std::size_t b = a + 1; b < planted.size(); ++b) g.addEdge(planted[a], planted[b]);
  }
  std::sort(planted.begin(), planted.end());
  const auto r = maxClique(g);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.vertices, planted);
}

TEST(MaxClique, ZeroBudgetStillReturnsAClique) {
  std::mt19937_64 rng(63);
  const ConsistencyGraph g = randomGraph(rng, 300, 0.6);
  const auto r = maxClique(g, std::chrono::duration<double>(0.0));
  EXPECT_TRUE(isClique(g, r.vertices));
  EXPECT_GE(r.vertices.size(), r.heuristic_size);
  EXPECT_FALSE(r.exact);
}

TEST(MaxClique, Deterministic) {
  std::mt19937_64 rng(64);
  const ConsistencyGraph g = randomGraph(rng, 120, 0.5);
  EXPECT_EQ(maxClique(g).vertices, maxClique(g).vertices);
}

TEST(BruteForce, RefusesLargeGraphs) { EXPECT_THROW(bruteForceMaxClique(ConsistencyGraph(26)), Error); }

TEST(CoreNumbers, MatchNaivePeeling) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 30; ++trial) {
    const ConsistencyGraph g = randomGraph(rng, 5 + rng() % 60, 0.1 + 0.1 * (trial % 6));
    const std::size_t n = g.size();
    // core(v) = largest k such that v survives repeatedly deleting vertices of degree < k.
    std::vector<std::uint32_t> expected(n, 0);
    for (std::uint32_t k = 1; k <= n; ++k) {
      std::vector<bool> alive(n, true);
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::uint32_t v = 0; v < n; ++v) {
          if (!alive[v]) continue;
          std::uint32_t deg = 0;
          for (std::uint32_t u = 0; u < n; ++u) deg += alive[u] && u != v && g.adjacent(u, v);
          if (deg < k) {
            alive[v] = false;
            changed = true;
          }
        }
      }
      for (std::uint32_t v = 0; v < n; ++v) {
        if (alive[v]) expected[v] = k;
      }
    }
    EXPECT_EQ(coreNumbers(g), expected);
  }
}

TEST(Consistency, RigidPairIsConsistent) {
  std::mt19937_64 rng(66);
  const std::vector<Cluster> query{makeCluster(0, Vec3d(1, 2, 3)), makeCluster(1, Vec3d(-4, 8, 0))};
  const std::vector<Cluster> map = testing::transformedAll(query, testing::randomPose(rng, 300));
  const Correspondence a{0, 0}, b{1, 1};
  EXPECT_TRUE(consistent(a, b, query, map, ConsistencyParams{}));
}

TEST(Consistency, LengthMismatchBreaksTheEdge) {
  const std::vector<Cluster> query{makeCluster(0, Vec3d(0, 0, 0)), makeCluster(0, Vec3d(10, 0, 0))};
  const std::vector<Cluster> map{makeCluster(0, Vec3d(0, 0, 0)), makeCluster(0, Vec3d(0, 12, 0))};
  EXPECT_FALSE(consistent({0, 0}, {1, 1}, query, map, ConsistencyParams{}));
}

TEST(Consistency, SharedEndpointsAreNeverConsistent) {
  const std::vector<Cluster> cl{makeCluster(0, Vec3d(0, 0, 0)), makeCluster(0, Vec3d(1, 0, 0)),
                                makeCluster(0, Vec3d(1, 0, 0))};
  EXPECT_FALSE(consistent({0, 1}, {0, 2}, cl, cl, ConsistencyParams{}));
  EXPECT_FALSE(consistent({1, 0}, {2, 0}, cl, cl, ConsistencyParams{}));
}

TEST(Consistency, WassersteinModeAlsoComparesSpread) {
  const std::vector<Cluster> query{makeCluster(0, Vec3d(0, 0, 0), Mat3d::Identity()),
                                   makeCluster(0, Vec3d(5, 0, 0), Mat3d::Identity())};
  std::vector<Cluster> map = query;
  map[1].covariance = 4.0 * Mat3d::Identity();
  ConsistencyParams w;
  w.metric = ConsistencyMetric::Wasserstein;
  EXPECT_TRUE(consistent({0, 0}, {1, 1}, query, map, ConsistencyParams{}));
  // |sqrt(6) - sqrt(15)| > 0.5
  EXPECT_FALSE(consistent({0, 0}, {1, 1}, query, map, w));
  EXPECT_TRUE(consistent({0, 0}, {1, 1}, query, query, w));
}

std::vector<Correspondence> randomCorrespondences(std::mt19937_64& rng, std::size_t count, std::size_t nq,
                                                  std::size_t nm) {
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({static_cast<std::uint32_t>(rng() % nq), static_cast<std::uint32_t>(rng() % nm), 1});
  }
  return out;
}

TEST(BuildConsistencyGraph, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(67);
  for (const auto metric : {ConsistencyMetric::Euclidean, ConsistencyMetric::Wasserstein}) {
    std::vector<Cluster> query, map;
    for (int i = 0; i < 30; ++i) query.push_back(makeCluster(0, testing::randomVec(rng, 6), testing::randomPsd(rng, 0.2)));
    for (int i = 0; i < 30; ++i) map.push_back(makeCluster(0, testing::randomVec(rng, 6), testing::randomPsd(rng, 0.2)));
    const auto corr = randomCorrespondences(rng, 150, query.size(), map.size());
    const ConsistencyParams params{metric, 0.5};
    const ConsistencyGraph g = buildConsistencyGraph(corr, query, map, params);
    for (std::uint32_t i = 0; i < corr.size(); ++i) {
      for (std::uint32_t j = 0; j < corr.size(); ++j) {
        const auto &a = corr[i], &b = corr[j];
        bool expected = i != j && a.query_id != b.query_id && a.map_id != b.map_id;
        const double dq = (query[a.query_id].centroid - query[b.query_id].centroid).norm();
        const double dm = (map[a.map_id].centroid - map[b.map_id].centroid).norm();
        expected = expected && std::abs(dq - dm) <= 0.5;
        if (metric == ConsistencyMetric::Wasserstein) {
          const double sq = std::sqrt((query[a.query_id].covariance + query[b.query_id].covariance).trace());
          const double sm = std::sqrt((map[a.map_id].covariance + map[b.map_id].covariance).trace());
          expected = expected && std::abs(sq - sm) <= 0.5;
        }
        ASSERT_EQ(g.adjacent(i, j), expected) << i << " " << j;
      }
    }
  }
}

TEST(BuildConsistencyGraph, InvariantUnderMapSideRigidMotion) {
  std::mt19937_64 rng(68);
  std::vector<Cluster> query, map;
  for (int i = 0; i < 40; ++i) query.push_back(makeCluster(0, testing::randomVec(rng, 8)));
  for (int i = 0; i < 40; ++i) map.push_back(makeCluster(0, testing::randomVec(rng, 8)));
  const auto corr = randomCorrespondences(rng, 200, query.size(), map.size());
  const auto moved = testing::transformedAll(map, testing::randomPose(rng, 500));
  const auto g0 = buildConsistencyGraph(corr, query, map, ConsistencyParams{});
  const auto g1 = buildConsistencyGraph(corr, query, moved, ConsistencyParams{});
  std::ostringstream a, b;
  g0.writeEdgeList(a);
  g1.writeEdgeList(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_GT(g0.edgeCount(), 0u);
}

TEST(BuildConsistencyGraph, UnknownClusterIdThrows) {
  const std::vector<Cluster> cl{makeCluster(0, Vec3d::Zero())};
  const std::vector<Correspondence> corr{{0, 3, 1}};
  EXPECT_THROW(buildConsistencyGraph(corr, cl, cl, ConsistencyParams{}), Error);
}

}  // namespace
}  // namespace sgloc
