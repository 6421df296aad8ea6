#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include "sgloc/gaussian.hpp"
#include "test_support.hpp"

namespace sgloc {
namespace {

using testing::makeCluster;
using testing::randomPsd;

// W2 for diagonal (hence commuting) covariances: |dmu|^2 + sum (sqrt a_i - sqrt b_i)^2.
double commutingW2(const Vec3d& dmu, const Vec3d& a, const Vec3d& b) {
  return std::sqrt(dmu.squaredNorm() + (a.cwiseSqrt() - b.cwiseSqrt()).squaredNorm());
}

TEST(Wasserstein2, IdenticalGaussiansAreAtZero) {
  std::mt19937_64 rng(10);
  const Cluster a = makeCluster(0, Vec3d(1, 2, 3), randomPsd(rng));
  EXPECT_NEAR(wasserstein2(a, a), 0.0, 1e-7);
}

TEST(Wasserstein2, CommutingCovarianceExample) {
  const Cluster a = makeCluster(0, Vec3d(0, 0, 0), Mat3d::Identity());
  const Cluster b = makeCluster(0, Vec3d(3, 0, 0), 4.0 * Mat3d::Identity());
  // sqrt(9 + trace(5I - 2 * 2I)) = sqrt(12)
  EXPECT_NEAR(wasserstein2(a, b), std::sqrt(12.0), 1e-12);
}

TEST(Wasserstein2, MatchesClosedFormOnDiagonalPairs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3d da(u(rng), u(rng), u(rng)), db(u(rng), u(rng), u(rng));
    const Cluster a = makeCluster(0, testing::randomVec(rng, 5), da.asDiagonal());
    const Cluster b = makeCluster(0, testing::randomVec(rng, 5), db.asDiagonal());
    EXPECT_NEAR(wasserstein2(a, b), commutingW2(a.centroid - b.centroid, da, db), 1e-8);
  }
}

TEST(Wasserstein2, MetricAxiomsOnRandomPsdPairs) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Cluster a = makeCluster(0, testing::randomVec(rng, 3), randomPsd(rng));
    const Cluster b = makeCluster(0, testing::randomVec(rng, 3), randomPsd(rng));
    const double ab = wasserstein2(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, wasserstein2(b, a), 1e-8);
    EXPECT_LT(wasserstein2(a, a), 1e-7);
    EXPECT_GT(ab, 1e-7);
  }
}

TEST(Wasserstein2, TriangleInequalitySpotCheck) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const Cluster a = makeCluster(0, testing::randomVec(rng, 2), randomPsd(rng));
    const Cluster b = makeCluster(0, testing::randomVec(rng, 2), randomPsd(rng));
    const Cluster c = makeCluster(0, testing::randomVec(rng, 2), randomPsd(rng));
    EXPECT_LE(wasserstein2(a, c), wasserstein2(a, b) + wasserstein2(b, c) + 1e-9);
  }
}

TEST(Wasserstein2, RankDeficientCovariancesAreAccepted) {
  Mat3d line = Mat3d::Zero();
  line(2, 2) = 1.5;
  const Cluster a = makeCluster(0, Vec3d::Zero(), line);
  const Cluster b = makeCluster(0, Vec3d::Zero(), Mat3d::Zero());
  EXPECT_NEAR(wasserstein2(a, b), std::sqrt(1.5), 1e-12);
}

TEST(Wasserstein2, RejectsNonPsdCovariance) {
  const Cluster bad = makeCluster(0, Vec3d::Zero(), Vec3d(1, -0.5, 1).asDiagonal());
  const Cluster ok = makeCluster(0, Vec3d::Zero(), Mat3d::Identity());
  EXPECT_THROW(wasserstein2(bad, ok), Error);
  EXPECT_THROW(wasserstein2(ok, bad), Error);
}

TEST(ShapeDistance, IgnoresCentroidsAndIsRotationSensitive) {
  const Mat3d car = Vec3d(1.0, 0.5, 0.3).asDiagonal();
  const Mat3d rotated = Posed::FromYaw(M_PI / 2).rotation * car * Posed::FromYaw(M_PI / 2).rotation.transpose();
  EXPECT_NEAR(shapeDistance<double>(car, car), 0.0, 1e-7);
  EXPECT_NEAR(shapeDistance<double>(car, rotated),
              commutingW2(Vec3d::Zero(), Vec3d(1.0, 0.5, 0.3), Vec3d(0.5, 1.0, 0.3)), 1e-9);
}

TEST(FitGaussian, TwoPointPopulationCovariance) {
  const std::vector<Vec3d> pts{Vec3d(0, 0, 0), Vec3d(2, 0, 0)};
  const Cluster c = fitGaussian(pts, 2);
  EXPECT_TRUE(c.centroid.isApprox(Vec3d(1, 0, 0)));
  EXPECT_TRUE(c.covariance.isApprox(Vec3d(1, 0, 0).asDiagonal().toDenseMatrix()));
  EXPECT_EQ(c.point_count, 2u);
  EXPECT_EQ(c.label, 2);
}

TEST(FitGaussian, SinglePoint) {
  const std::vector<Vec3d> pts{Vec3d(4, -1, 2)};
  const Cluster c = fitGaussian(pts, 0);
  EXPECT_EQ(c.centroid, pts[0]);
  EXPECT_TRUE(c.covariance.isZero());
}

TEST(FitGaussian, EmptyInputThrows) { EXPECT_THROW(fitGaussian(std::vector<Vec3d>{}, 0), Error); }

TEST(FitGaussian, MonteCarloConsistency) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n01;
  const Vec3d mu0(3, -2, 1);
  const Mat3d r = testing::randomRotation(rng);
  const Mat3d sigma0 = r * Vec3d(1.0, 0.5, 0.2).asDiagonal() * r.transpose();
  const Mat3d l = sigma0.llt().matrixL();
  std::vector<Vec3d> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(mu0 + l * Vec3d(n01(rng), n01(rng), n01(rng)));
  const Cluster c = fitGaussian(pts, 0);
  EXPECT_LT((c.centroid - mu0).norm(), 0.2);
  EXPECT_LT((c.covariance - sigma0).norm(), 0.3);
}

TEST(FitGaussian, RigidEquivariance) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3d> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(testing::randomVec(rng, 3));
    const Posed pose = testing::randomPose(rng, 20);
    std::vector<Vec3d> moved;
    for (const auto& p : pts) moved.push_back(apply(pose, p));
    const Cluster expected = transformed(fitGaussian(pts, 1), pose);
    const Cluster actual = fitGaussian(moved, 1);
    EXPECT_LT((actual.centroid - expected.centroid).norm(), 1e-9);
    EXPECT_LT((actual.covariance - expected.covariance).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FitGaussian, DuplicatingPointsLeavesMomentsUnchanged) {
  std::mt19937_64 rng(16);
  std::vector<Vec3d> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(testing::randomVec(rng, 2));
  std::vector<Vec3d> doubled = pts;
  doubled.insert(doubled.end(), pts.begin(), pts.end());
  const Cluster a = fitGaussian(pts, 0), b = fitGaussian(doubled, 0);
  EXPECT_LT((a.centroid - b.centroid).norm(), 1e-12);
  EXPECT_LT((a.covariance - b.covariance).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitGaussian, FloatScalarInstantiates) {
  const std::vector<Vec3<float>> pts{Vec3<float>(0, 0, 0), Vec3<float>(2, 0, 0)};
  const auto c = fitGaussian(pts, 0);
  EXPECT_FLOAT_EQ(c.covariance(0, 0), 1.0f);
}

}  // namespace
}  // namespace sgloc
