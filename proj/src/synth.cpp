#include "sgloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace sgloc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform random rotation from a normalized 4D Gaussian.
Mat3d randomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  return q.normalized().toRotationMatrix();
}

Cluster makeCluster(ClassId label, const Vec3d& centroid, const SynthParams& p) {
  Cluster c;
  c.label = label;
  c.centroid = centroid;
  c.covariance = p.templates[static_cast<std::size_t>(label)];
  c.point_count = 100;
  return c;
}

}  // namespace

void SynthParams::validate() const {
  if (!(extent > 0) || !(query_radius > 0)) throw Error("synth: extent and query_radius must be positive");
  if (!(extent > 2.0 * query_radius)) throw Error("synth: extent must exceed twice the query radius");
  if (cluster_count == 0) throw Error("synth: cluster_count must be positive");
  if (!(noise_sigma >= 0)) throw Error("synth: noise_sigma must be nonnegative");
  if (!(outlier_fraction >= 0 && outlier_fraction < 1)) throw Error("synth: outlier_fraction must be in [0, 1)");
  if (!(dropout_fraction >= 0 && dropout_fraction < 1)) throw Error("synth: dropout_fraction must be in [0, 1)");
  if (!(height_range >= 0)) throw Error("synth: height_range must be nonnegative");
  double total = 0;
  for (double f : class_mix) {
    if (!(f >= 0 && f <= 1)) throw Error("synth: class_mix fractions must be in [0, 1]");
    total += f;
  }
  if (!(total > 0)) throw Error("synth: class_mix must not be all zero");
  for (const auto& t : templates) {
    if (!isPsd(t)) throw Error("synth: covariance templates must be symmetric PSD");
  }
}

std::uint64_t trialSeed(std::uint64_t master, std::uint64_t trial) { return splitmix64(master ^ splitmix64(trial)); }

SynthScene synthScene(const SynthParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::discrete_distribution<int> class_dist(params.class_mix.begin(), params.class_mix.end());

  SynthScene scene;
  scene.map.clusters.reserve(params.cluster_count);
  for (std::size_t i = 0; i < params.cluster_count; ++i) {
    const ClassId label = class_dist(rng);
    const Vec3d pos(unit(rng) * params.extent, unit(rng) * params.extent, unit(rng) * params.height_range);
    scene.map.clusters.push_back(makeCluster(label, pos, params));
  }

  constexpr int kMaxAttempts = 100;
  constexpr std::size_t kMinQueryClusters = 10;
  const double r = params.query_radius;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec3d origin(r + unit(rng) * (params.extent - 2 * r), r + unit(rng) * (params.extent - 2 * r), 0.0);
    std::vector<std::uint32_t> in_radius;
    for (std::uint32_t i = 0; i < scene.map.clusters.size(); ++i) {
      if ((scene.map.clusters[i].centroid - origin).head<2>().norm() <= r) in_radius.push_back(i);
    }
    if (in_radius.size() < kMinQueryClusters) continue;

    Posed gt;
    gt.translation = origin;
    gt.rotation = params.full_rotation ? randomRotation(rng)
                                       : Posed::FromYaw(-M_PI + 2 * M_PI * unit(rng)).rotation;

    std::shuffle(in_radius.begin(), in_radius.end(), rng);
    const auto dropped = static_cast<std::size_t>(std::llround(params.dropout_fraction * static_cast<double>(in_radius.size())));
    std::vector<std::uint32_t> kept(in_radius.begin() + static_cast<std::ptrdiff_t>(dropped), in_radius.end());
    std::sort(kept.begin(), kept.end());

    std::vector<Cluster> world;
    std::vector<int> truth;
    for (auto id : kept) {
      world.push_back(scene.map.clusters[id]);
      truth.push_back(static_cast<int>(id));
    }
    const auto outliers = static_cast<std::size_t>(std::llround(params.outlier_fraction * static_cast<double>(kept.size())));
    for (std::size_t k = 0; k < outliers; ++k) {
      const ClassId label = class_dist(rng);
      const double rho = r * std::sqrt(unit(rng));
      const double phi = 2 * M_PI * unit(rng);
      const Vec3d pos = origin + Vec3d(rho * std::cos(phi), rho * std::sin(phi), unit(rng) * params.height_range);
      world.push_back(makeCluster(label, pos, params));
      truth.push_back(-1);
    }

    if (params.noise_sigma > 0) {
      std::normal_distribution<double> noise(0.0, params.noise_sigma);
      for (auto& c : world) c.centroid += Vec3d(noise(rng), noise(rng), noise(rng));
    }

    std::vector<std::size_t> order(world.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const Posed to_sensor = inverse(gt);
    for (auto i : order) {
      scene.query.push_back(transformed(world[i], to_sensor));
      scene.query_truth.push_back(truth[i]);
    }
    scene.ground_truth = gt;
    scene.outlier_count = outliers;
    scene.dropped_count = dropped;
    return scene;
  }
  throw Error("synth: no query region with at least 10 clusters after 100 attempts");
}

SynthParams parseSynthParams(const KeyValueFile& kv, std::vector<std::string>* warnings) {
  SynthParams p;
  std::set<std::string> used;
  const auto use = [&](const std::string& key) {
    used.insert(key);
    return key;
  };
  p.extent = getNumber(kv, use("extent"), p.extent);
  const auto count = getInteger(kv, use("cluster_count"), static_cast<std::int64_t>(p.cluster_count));
  if (count <= 0) throw Error("synth key 'cluster_count' must be positive");
  p.cluster_count = static_cast<std::size_t>(count);
  p.query_radius = getNumber(kv, use("query_radius"), p.query_radius);
  p.noise_sigma = getNumber(kv, use("noise_sigma"), p.noise_sigma);
  p.outlier_fraction = getNumber(kv, use("outlier_fraction"), p.outlier_fraction);
  p.dropout_fraction = getNumber(kv, use("dropout_fraction"), p.dropout_fraction);
  p.height_range = getNumber(kv, use("height_range"), p.height_range);
  p.full_rotation = getBool(kv, use("full_rotation"), p.full_rotation);
  const auto seed = getInteger(kv, use("seed"), static_cast<std::int64_t>(p.seed));
  if (seed < 0) throw Error("synth key 'seed' must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);
  if (kv.values.count("class_mix")) {
    // "car,trunk,pole" fractions.
    std::stringstream ss(getString(kv, use("class_mix"), ""));
    std::string item;
    std::size_t k = 0;
    while (std::getline(ss, item, ',')) {
      if (k >= 3) throw Error("synth key 'class_mix': expected three fractions");
      try {
        p.class_mix[k++] = std::stod(item);
      } catch (const std::exception&) {
        throw Error("synth key 'class_mix': bad number '" + item + "'");
      }
    }
    if (k != 3) throw Error("synth key 'class_mix': expected three fractions");
  }
  const char* names[3] = {"car", "trunk", "pole"};
  for (int c = 0; c < 3; ++c) {
    const std::string key = std::string("template.") + names[c];
    if (!kv.values.count(key)) continue;
    std::stringstream ss(getString(kv, use(key), ""));
    double d[3];
    char sep;
    if (!(ss >> d[0] >> sep >> d[1] >> sep >> d[2])) throw Error("synth key '" + key + "': expected 'sxx,syy,szz'");
    p.templates[c] = Vec3d(d[0], d[1], d[2]).asDiagonal();
  }
  for (const auto& [key, value] : kv.values) {
    if (!used.count(key) && warnings) warnings->push_back("unknown synth key '" + key + "' ignored");
  }
  p.validate();
  return p;
}

}  // namespace sgloc
