#include <gtest/gtest.h>

#include "sgloc/pose.hpp"
#include "test_support.hpp"

namespace sgloc {
namespace {

const Posed kRotZ90 = Posed::FromYaw(M_PI / 2);

TEST(PoseApply, IdentityLeavesPointUnchanged) {
  EXPECT_TRUE(apply(Posed::Identity(), Vec3d(1, 2, 3)).isApprox(Vec3d(1, 2, 3)));
}

TEST(PoseApply, RotationAboutZ) {
  EXPECT_LT((apply(kRotZ90, Vec3d(1, 0, 0)) - Vec3d(0, 1, 0)).norm(), 1e-15);
}

TEST(PoseApply, RotationThenTranslation) {
  const Posed p = Posed::FromYaw(M_PI / 2, Vec3d(1, 1, 0));
  EXPECT_LT((apply(p, Vec3d(1, 0, 0)) - Vec3d(1, 2, 0)).norm(), 1e-15);
}

TEST(PoseGroup, ComposeIdentities) {
  const Posed p = compose(Posed::Identity(), Posed::Identity());
  EXPECT_TRUE(p.rotation.isIdentity());
  EXPECT_TRUE(p.translation.isZero());
}

TEST(PoseGroup, InverseOfRotZ90IsRotZMinus90) {
  const Posed inv = inverse(kRotZ90);
  EXPECT_LT((inv.rotation - Posed::FromYaw(-M_PI / 2).rotation).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PoseGroup, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Posed a = testing::randomPose(rng);
    ASSERT_TRUE(a.isValid());
    for (const Posed& p : {compose(a, inverse(a)), compose(inverse(a), a)}) {
      EXPECT_LT((p.rotation - Mat3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT(p.translation.norm(), 1e-9);
    }
  }
}

TEST(PoseError, IdenticalPosesGiveZero) {
  std::mt19937_64 rng(2);
  const Posed a = testing::randomPose(rng);
  const auto e = poseError(a, a);
  EXPECT_NEAR(e.e_trans, 0.0, 1e-12);
  EXPECT_NEAR(e.e_rot, 0.0, 1e-5);
}

TEST(PoseError, PureTranslation345) {
  const Posed est{Mat3d::Identity(), Vec3d(3, 4, 0)};
  const auto e = poseError(est, Posed::Identity());
  EXPECT_DOUBLE_EQ(e.e_trans, 5.0);
  EXPECT_DOUBLE_EQ(e.e_rot, 0.0);
}

TEST(PoseError, PureRotation90) {
  // trace(dR) = 1, so arccos((1 - 1) / 2) = 90 degrees.
  const auto e = poseError(kRotZ90, Posed::Identity());
  EXPECT_NEAR(kRotZ90.rotation.trace(), 1.0, 1e-15);
  EXPECT_NEAR(e.e_rot, 90.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.e_trans, 0.0);
}

TEST(PoseError, HomogeneousTraceFormMatchesRotationTraceForm) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Posed a = testing::randomPose(rng), b = testing::randomPose(rng);
    const Eigen::Matrix4d dt = a.matrix() * b.matrix().inverse();
    const double c = std::clamp(dt.trace() / 2.0 - 1.0, -1.0, 1.0);
    EXPECT_NEAR(poseError(a, b).e_rot, radToDeg(std::acos(c)), 1e-6);
    EXPECT_NEAR(poseError(a, b).e_trans, (dt.topRightCorner<3, 1>().norm()), 1e-9);
  }
}

TEST(PoseError, RotationAngleIsSymmetricAndBounded) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const Posed a = testing::randomPose(rng), b = testing::randomPose(rng);
    const auto ab = poseError(a, b), ba = poseError(b, a);
    EXPECT_NEAR(ab.e_rot, ba.e_rot, 1e-6);
    EXPECT_GE(ab.e_rot, 0.0);
    EXPECT_LE(ab.e_rot, 180.0);
    EXPECT_GE(ab.e_trans, 0.0);
  }
}

TEST(PoseError, InvariantUnderCommonRightMotion) {
  // (T_est S)(T_gt S)^-1 = T_est T_gt^-1.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Posed a = testing::randomPose(rng), b = testing::randomPose(rng), s = testing::randomPose(rng);
    const auto e0 = poseError(a, b), e1 = poseError(compose(a, s), compose(b, s));
    EXPECT_NEAR(e0.e_trans, e1.e_trans, 1e-8);
    EXPECT_NEAR(e0.e_rot, e1.e_rot, 1e-6);
  }
}

TEST(PoseError, RotationErrorInvariantUnderCommonLeftMotion) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const Posed a = testing::randomPose(rng), b = testing::randomPose(rng), s = testing::randomPose(rng);
    EXPECT_NEAR(poseError(a, b).e_rot, poseError(compose(s, a), compose(s, b)).e_rot, 1e-6);
  }
}

TEST(PoseError, SuccessThresholdsAreStrict) {
  EXPECT_TRUE(isSuccess(PoseErrord{4.99, 9.99}));
  EXPECT_FALSE(isSuccess(PoseErrord{5.0, 1.0}));
  EXPECT_FALSE(isSuccess(PoseErrord{1.0, 10.0}));
}

}  // namespace
}  // namespace sgloc
