#ifndef SGLOC_POSE_HPP
#define SGLOC_POSE_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sgloc {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

/// Rigid transform x -> R x + t. The rotation is kept as a 3x3 matrix; quaternions
/// only appear at file boundaries.
template <typename Scalar>
struct Pose {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  static Pose Identity() { return Pose{}; }

  static Pose FromQuaternion(const Eigen::Quaternion<Scalar>& q, const Vec3<Scalar>& t) {
    return Pose{q.normalized().toRotationMatrix(), t};
  }

  static Pose FromYaw(Scalar yaw, const Vec3<Scalar>& t = Vec3<Scalar>::Zero()) {
    return Pose{Eigen::AngleAxis<Scalar>(yaw, Vec3<Scalar>::UnitZ()).toRotationMatrix(), t};
  }

  Eigen::Quaternion<Scalar> quaternion() const { return Eigen::Quaternion<Scalar>(rotation).normalized(); }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  // R R^T = I and det R = +1 within tol.
  bool isValid(Scalar tol = Scalar(1e-9)) const {
    const Scalar ortho = (rotation * rotation.transpose() - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - Scalar(1)) <= tol && translation.allFinite();
  }

  template <typename Other>
  Pose<Other> cast() const {
    return Pose<Other>{rotation.template cast<Other>(), translation.template cast<Other>()};
  }
};

using Posed = Pose<double>;

template <typename Scalar>
struct PoseError {
  Scalar e_trans = 0;  // meters
  Scalar e_rot = 0;    // degrees
};

using PoseErrord = PoseError<double>;

template <typename Scalar, typename Derived>
Vec3<Scalar> apply(const Pose<Scalar>& pose, const Eigen::MatrixBase<Derived>& point) {
  return pose.rotation * point + pose.translation;
}

template <typename Scalar>
Pose<Scalar> compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return Pose<Scalar>{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

template <typename Scalar>
Pose<Scalar> inverse(const Pose<Scalar>& a) {
  const Mat3<Scalar> rt = a.rotation.transpose();
  return Pose<Scalar>{rt, -(rt * a.translation)};
}

template <typename Scalar>
Pose<Scalar> operator*(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return compose(a, b);
}

/// Rotation angle of R in radians. Equal to acos(clamp((tr R - 1) / 2)) for a
/// rotation, but taken as atan2(sin, cos) so it stays exact near 0 and pi.
template <typename Derived>
typename Derived::Scalar rotationAngle(const Eigen::MatrixBase<Derived>& rotation) {
  using Scalar = typename Derived::Scalar;
  const Scalar c = std::clamp((rotation.trace() - Scalar(1)) / Scalar(2), Scalar(-1), Scalar(1));
  const Vec3<Scalar> axis(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                          rotation(1, 0) - rotation(0, 1));
  return std::atan2(axis.norm() / Scalar(2), c);
}

template <typename Scalar>
constexpr Scalar radToDeg(Scalar rad) {
  return rad * Scalar(180) / Scalar(M_PI);
}

template <typename Scalar>
constexpr Scalar degToRad(Scalar deg) {
  return deg * Scalar(M_PI) / Scalar(180);
}

/// Error of an estimate against ground truth through dT = T_est * T_gt^-1.
/// e_trans is the norm of dT's translation, e_rot the angle of dR in degrees.
template <typename Scalar>
PoseError<Scalar> poseError(const Pose<Scalar>& estimated, const Pose<Scalar>& ground_truth) {
  const Pose<Scalar> delta = compose(estimated, inverse(ground_truth));
  return PoseError<Scalar>{delta.translation.norm(), radToDeg(rotationAngle(delta.rotation))};
}

template <typename Scalar>
bool isSuccess(const PoseError<Scalar>& err, Scalar max_trans = Scalar(5), Scalar max_rot_deg = Scalar(10)) {
  return err.e_trans < max_trans && err.e_rot < max_rot_deg;
}

}  // namespace sgloc

#endif  // SGLOC_POSE_HPP
