#include "sgloc/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "sgloc/gaussian.hpp"

namespace sgloc {
namespace {

void checkSizes(std::span<const Vec3d> query, std::span<const Vec3d> map) {
  if (query.size() != map.size()) throw Error("registration: query and map point counts differ");
}

std::vector<double> residuals(std::span<const Vec3d> query, std::span<const Vec3d> map, const Posed& pose) {
  std::vector<double> r(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) r[i] = (map[i] - apply(pose, query[i])).norm();
  return r;
}

}  // namespace

Posed weightedProcrustes(std::span<const Vec3d> query, std::span<const Vec3d> map,
                         std::span<const double> weights) {
  checkSizes(query, map);
  if (weights.size() != query.size()) throw Error("weightedProcrustes: weight count differs from pair count");
  std::size_t positive = 0;
  double total = 0;
  Vec3d mu_q = Vec3d::Zero();
  Vec3d mu_m = Vec3d::Zero();
  for (std::size_t i = 0; i < query.size(); ++i) {
    if (weights[i] < 0) throw Error("weightedProcrustes: negative weight");
    if (weights[i] > 0) ++positive;
    total += weights[i];
    mu_q += weights[i] * query[i];
    mu_m += weights[i] * map[i];
  }
  if (positive < 3 || !(total > 0)) throw Error("weightedProcrustes: fewer than 3 positively weighted pairs");
  mu_q /= total;
  mu_m /= total;

  Mat3d h = Mat3d::Zero();
  for (std::size_t i = 0; i < query.size(); ++i) {
    if (weights[i] == 0) continue;
    h.noalias() += weights[i] * (query[i] - mu_q) * (map[i] - mu_m).transpose();
  }
  Eigen::JacobiSVD<Mat3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3d& u = svd.matrixU();
  const Mat3d& v = svd.matrixV();
  Vec3d diag(1.0, 1.0, (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0);
  Posed pose;
  pose.rotation = v * diag.asDiagonal() * u.transpose();
  pose.translation = mu_m - pose.rotation * mu_q;
  return pose;
}

Posed procrustes(std::span<const Vec3d> query, std::span<const Vec3d> map) {
  const std::vector<double> ones(query.size(), 1.0);
  return weightedProcrustes(query, map, ones);
}

double truncatedCost(std::span<const Vec3d> query, std::span<const Vec3d> map, const Posed& pose,
                     double truncation) {
  checkSizes(query, map);
  double cost = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    cost += std::min((map[i] - apply(pose, query[i])).norm(), truncation);
  }
  return cost;
}

bool isDegenerate(std::span<const Vec3d> points, double threshold) {
  if (points.size() < 3) return true;
  Vec3d mean = Vec3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix<double, 3, Eigen::Dynamic> centered(3, points.size());
  for (std::size_t i = 0; i < points.size(); ++i) centered.col(static_cast<Eigen::Index>(i)) = points[i] - mean;
  // Singular values of the 3xN matrix are the square roots of the eigenvalues of its 3x3 Gram matrix.
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, Eigen::Dynamic>> svd(centered);
  return svd.singularValues()(1) < threshold;
}

RegistrationResult gncTlsRegister(std::span<const Vec3d> query, std::span<const Vec3d> map,
                                  const GncParams& params) {
  checkSizes(query, map);
  if (query.size() < 3) throw Error("gncTlsRegister: fewer than 3 pairs");
  if (!(params.truncation > 0) || !(params.mu_factor > 1)) throw Error("gncTlsRegister: invalid GNC parameters");

  const std::size_t n = query.size();
  const double c2 = params.truncation * params.truncation;
  RegistrationResult result;
  std::vector<double> w(n, 1.0);
  double mu = 0;
  double prev_cost = std::numeric_limits<double>::infinity();
  Posed pose;
  std::vector<double> r;

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const auto positive = std::count_if(w.begin(), w.end(), [](double x) { return x > 0; });
    if (positive < 3) {
      result.stop = GncStop::TooFewInliers;
      break;
    }
    result.iterations = iter;
    Posed candidate = weightedProcrustes(query, map, w);
    const double truncated = truncatedCost(query, map, candidate, params.truncation);
    // Step rejection: a candidate that raises the truncated cost is dropped and
    // the schedule continues from the accepted pose.
    if (iter == 1 || truncated <= result.truncated_costs.back()) {
      pose = candidate;
      r = residuals(query, map, pose);
      result.truncated_costs.push_back(truncated);
    } else {
      result.truncated_costs.push_back(result.truncated_costs.back());
    }

    double cost = 0;
    for (std::size_t i = 0; i < n; ++i) cost += w[i] * r[i] * r[i];

    if (iter == 1) {
      double r_max2 = 0;
      for (double x : r) r_max2 = std::max(r_max2, x * x);
      const double denom = 2.0 * r_max2 - c2;
      // Every residual already inside the truncation: the TLS weights are all 1.
      mu = denom > 0 ? std::max(c2 / denom, 1e-6) : std::numeric_limits<double>::infinity();
    } else {
      const bool binary = std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0 || x == 1.0; });
      if (binary) {
        result.stop = GncStop::WeightsBinary;
        result.converged = true;
        break;
      }
      if (std::abs(cost - prev_cost) < params.cost_tolerance) {
        result.stop = GncStop::CostConverged;
        result.converged = true;
        break;
      }
    }
    prev_cost = cost;

    if (iter == params.max_iterations) {
      result.stop = GncStop::MaxIterations;
      break;
    }

    // Black-Rangarajan weights of the GNC surrogate of the TLS cost.
    const double lower = std::isinf(mu) ? c2 : mu / (mu + 1.0) * c2;
    const double upper = std::isinf(mu) ? c2 : (mu + 1.0) / mu * c2;
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = r[i] * r[i];
      if (r2 <= lower) {
        w[i] = 1.0;
      } else if (r2 >= upper) {
        w[i] = 0.0;
      } else {
        w[i] = std::clamp(params.truncation * std::sqrt(mu * (mu + 1.0)) / r[i] - mu, 0.0, 1.0);
      }
    }
    mu *= params.mu_factor;
  }

  result.gnc_pose = pose;
  result.weights = w;
  std::vector<double> binary(n, 0.0);
  std::vector<Vec3d> inlier_points;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] >= 0.5) {
      binary[i] = 1.0;
      inlier_points.push_back(query[i]);
    }
  }
  result.inlier_count = inlier_points.size();
  result.pose = result.inlier_count >= 3 ? weightedProcrustes(query, map, binary) : pose;
  result.degenerate = isDegenerate(inlier_points, params.degeneracy_threshold);
  return result;
}

}  // namespace sgloc
