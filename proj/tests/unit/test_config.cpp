#include <gtest/gtest.h>

#include "sgloc/config.hpp"

namespace sgloc {
namespace {

TEST(Config, EmptyFileGivesDefaults) {
  const RunConfig cfg = parseConfig("");
  const RunConfig defaults;
  EXPECT_EQ(cfg.canonical(), defaults.canonical());
  EXPECT_EQ(cfg.triangulation.k_neighbors, 10);
  EXPECT_DOUBLE_EQ(cfg.retrieval.quantum, 0.5);
  EXPECT_DOUBLE_EQ(cfg.consistency.epsilon, 0.5);
  EXPECT_DOUBLE_EQ(cfg.gnc.truncation, 1.0);
  EXPECT_EQ(cfg.classes.classOf(10), 0);
  EXPECT_EQ(cfg.classes.classOf(71), 1);
  EXPECT_EQ(cfg.classes.classOf(80), 2);
  EXPECT_DOUBLE_EQ(cfg.clustering.toleranceFor(0), 0.8);
}

TEST(Config, SingleOverride) {
  const RunConfig cfg = parseConfig("k_neighbors = 8\n");
  EXPECT_EQ(cfg.triangulation.k_neighbors, 8);
  RunConfig expected;
  expected.triangulation.k_neighbors = 8;
  EXPECT_EQ(cfg.canonical(), expected.canonical());
}

TEST(Config, NegativeEpsilonIsRejected) {
  try {
    parseConfig("epsilon = -1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("epsilon"), std::string::npos);
  }
}

TEST(Config, TypeMismatchNamesTheKey) {
  for (const char* text : {"k_neighbors = true", "k_neighbors = 2.5", "semantic = 1", "side_quantum = fast"}) {
    try {
      parseConfig(text);
      FAIL() << text;
    } catch (const Error& e) {
      const std::string key = std::string(text).substr(0, std::string(text).find(' '));
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  }
}

TEST(Config, UnknownKeysWarnButLoad) {
  std::vector<std::string> warnings;
  const RunConfig cfg = parseConfig("bogus = 3\nsemantic = false # pure geometry\n", &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("bogus"), std::string::npos);
  EXPECT_FALSE(cfg.retrieval.semantic);
}

TEST(Config, ClassMapAndPerClassTolerance) {
  const RunConfig cfg = parseConfig(
      "class_map = \"10:car, 18:car, 71:trunk, 80:pole, 81:sign\"\n"
      "cluster_tolerance.sign = 0.3\n"
      "consistency_metric = wasserstein\n");
  ASSERT_EQ(cfg.classes.names.size(), 4u);
  EXPECT_EQ(cfg.classes.classOf(18), 0);
  EXPECT_EQ(cfg.classes.classOf(81), 3);
  EXPECT_FALSE(cfg.classes.classOf(40).has_value());
  EXPECT_DOUBLE_EQ(cfg.clustering.toleranceFor(3), 0.3);
  EXPECT_DOUBLE_EQ(cfg.clustering.toleranceFor(0), 0.8);
  EXPECT_EQ(cfg.consistency.metric, ConsistencyMetric::Wasserstein);
}

TEST(Config, StructuralErrors) {
  EXPECT_THROW(parseConfig("k_neighbors 8"), Error);
  EXPECT_THROW(parseConfig("k_neighbors = 8\nk_neighbors = 9"), Error);
  EXPECT_THROW(parseConfig("k_neighbors = 1"), Error);
  EXPECT_THROW(parseConfig("min_cluster_points = 2"), Error);
  EXPECT_THROW(parseConfig("consistency_metric = spectral"), Error);
  EXPECT_THROW(parseConfig("class_map = \"10car\""), Error);
}

TEST(Config, HashTracksSettings) {
  EXPECT_EQ(parseConfig("").hash(), RunConfig{}.hash());
  EXPECT_NE(parseConfig("side_quantum = 0.25").hash(), RunConfig{}.hash());
}

}  // namespace
}  // namespace sgloc
