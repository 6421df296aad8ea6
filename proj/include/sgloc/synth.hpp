#ifndef SGLOC_SYNTH_HPP
#define SGLOC_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sgloc/clustering.hpp"
#include "sgloc/config.hpp"

namespace sgloc {

/// Synthetic cluster world with one query taken around a random origin.
/// Classes are the default car / trunk / pole ids 0, 1, 2.
struct SynthParams {
  double extent = 500.0;  // square world side, m
  std::size_t cluster_count = 500;
  std::array<double, 3> class_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double query_radius = 60.0;     // m
  double noise_sigma = 0.1;       // centroid noise, m
  double outlier_fraction = 0.3;  // injected outliers per retained in-radius cluster
  double dropout_fraction = 0.1;  // in-radius map clusters missing from the query
  double height_range = 4.0;      // centroid z drawn from [0, height_range], m
  bool full_rotation = false;     // yaw only unless set
  std::uint64_t seed = 42;
  std::array<Mat3d, 3> templates{
      Vec3d(1.0, 0.5, 0.3).asDiagonal().toDenseMatrix(),
      Vec3d(0.1, 0.1, 0.8).asDiagonal().toDenseMatrix(),
      Vec3d(0.02, 0.02, 1.5).asDiagonal().toDenseMatrix(),
  };

  void validate() const;
};

struct SynthScene {
  ClusterMap map;
  std::vector<Cluster> query;      // sensor frame
  std::vector<int> query_truth;    // map id per query cluster, -1 for injected outliers
  Posed ground_truth;              // sensor -> world
  std::size_t outlier_count = 0;
  std::size_t dropped_count = 0;
};

SynthScene synthScene(const SynthParams& params);

/// Reads synth keys from a key-value file (same syntax as run configs).
SynthParams parseSynthParams(const KeyValueFile& kv, std::vector<std::string>* warnings = nullptr);

/// Per-trial seed derived from a master seed (splitmix64 of seed ^ index).
std::uint64_t trialSeed(std::uint64_t master, std::uint64_t trial);

}  // namespace sgloc

#endif  // SGLOC_SYNTH_HPP
