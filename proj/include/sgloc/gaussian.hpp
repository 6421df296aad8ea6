#ifndef SGLOC_GAUSSIAN_HPP
#define SGLOC_GAUSSIAN_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sgloc/pose.hpp"

namespace sgloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical semantic class id (index into the configured class names).
using ClassId = int;

/// A semantic instance summarized as a Gaussian: label, centroid, population covariance.
template <typename Scalar>
struct GaussianCluster {
  ClassId label = 0;
  Vec3<Scalar> centroid = Vec3<Scalar>::Zero();
  Mat3<Scalar> covariance = Mat3<Scalar>::Zero();
  std::size_t point_count = 0;
};

using Cluster = GaussianCluster<double>;

template <typename Scalar>
bool isPsd(const Mat3<Scalar>& m, Scalar tol = Scalar(1e-9)) {
  if (!m.allFinite()) return false;
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues clamp to zero.
template <typename Scalar>
Mat3<Scalar> sqrtPsd(const Mat3<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> es(m);
  const Vec3<Scalar> roots = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

/// Bures term trace(A + B - 2 (B^1/2 A B^1/2)^1/2), clamped at zero.
/// `sqrt_b` must be sqrtPsd(b); callers comparing against one matrix many times cache it.
template <typename Scalar>
Scalar buresSquared(const Mat3<Scalar>& a, const Mat3<Scalar>& b, const Mat3<Scalar>& sqrt_b) {
  const Mat3<Scalar> inner = sqrt_b * a * sqrt_b;
  const Mat3<Scalar> cross = sqrtPsd<Scalar>(Scalar(0.5) * (inner + inner.transpose()));
  return std::max(Scalar(0), a.trace() + b.trace() - Scalar(2) * cross.trace());
}

/// 2-Wasserstein distance between two Gaussians, in meters.
template <typename Scalar>
Scalar wasserstein2(const GaussianCluster<Scalar>& a, const GaussianCluster<Scalar>& b) {
  if (!isPsd(a.covariance) || !isPsd(b.covariance)) {
    throw Error("wasserstein2: covariance is not symmetric positive semidefinite");
  }
  const Scalar mean_term = (a.centroid - b.centroid).squaredNorm();
  // Bures term as min over orthogonal U of |A^1/2 - B^1/2 U|_F^2, attained at the
  // polar factor of B^1/2 A^1/2. Same value as the trace form without its
  // cancellation, so equal inputs give zero to rounding.
  const Mat3<Scalar> sa = sqrtPsd(a.covariance), sb = sqrtPsd(b.covariance);
  Eigen::JacobiSVD<Mat3<Scalar>> svd(sb * sa, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3<Scalar> u = svd.matrixU() * svd.matrixV().transpose();
  return std::sqrt(mean_term + (sa - sb * u).squaredNorm());
}

/// Wasserstein distance between the zero-mean Gaussians N(0, a) and N(0, b): shape only.
template <typename Scalar>
Scalar shapeDistance(const Mat3<Scalar>& a, const Mat3<Scalar>& b, const Mat3<Scalar>& sqrt_b) {
  return std::sqrt(buresSquared<Scalar>(a, b, sqrt_b));
}

template <typename Scalar>
Scalar shapeDistance(const Mat3<Scalar>& a, const Mat3<Scalar>& b) {
  return shapeDistance<Scalar>(a, b, sqrtPsd(b));
}

/// Mean and population (1/n) covariance of a point set.
template <typename Scalar>
GaussianCluster<Scalar> fitGaussian(std::span<const Vec3<Scalar>> points, ClassId label) {
  if (points.empty()) throw Error("fitGaussian: empty point set");
  const auto n = static_cast<Scalar>(points.size());
  Vec3<Scalar> mean = Vec3<Scalar>::Zero();
  for (const auto& p : points) mean += p;
  mean /= n;
  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (const auto& p : points) {
    const Vec3<Scalar> d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= n;
  return GaussianCluster<Scalar>{label, mean, cov, points.size()};
}

template <typename Scalar>
GaussianCluster<Scalar> fitGaussian(const std::vector<Vec3<Scalar>>& points, ClassId label) {
  return fitGaussian<Scalar>(std::span<const Vec3<Scalar>>(points), label);
}

/// Cluster moved by a rigid transform: centroid R mu + t, covariance R S R^T.
template <typename Scalar>
GaussianCluster<Scalar> transformed(const GaussianCluster<Scalar>& c, const Pose<Scalar>& pose) {
  GaussianCluster<Scalar> out = c;
  out.centroid = apply(pose, c.centroid);
  out.covariance = pose.rotation * c.covariance * pose.rotation.transpose();
  return out;
}

}  // namespace sgloc

#endif  // SGLOC_GAUSSIAN_HPP
