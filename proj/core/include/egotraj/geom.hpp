#pragma once

// SO(3) / SE(3) / Sim(3) value types with exp/log maps.
//
// Conventions:
//   * Rotations are unit quaternions (w, x, y, z) canonicalized to w >= 0.
//   * A SimTransform acts on points as  T(p) = s * R * p + t.
//   * The Sim(3) tangent is ordered (omega, nu, sigma): rotation vector,
//     translational part, log-scale. Its 4x4 matrix form is
//         [ hat(omega) + sigma*I   nu ]
//         [ 0                       0 ]
//     and sim3_exp is the matrix exponential of that form.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace egotraj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec7 = Eigen::Matrix<double, 7, 1>;

// Below this rotation angle / |log-scale| the exp/log maps switch to
// truncated Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;
// sim3_log refuses rotation angles >= pi - kCutLocusMargin.
inline constexpr double kCutLocusMargin = 1e-6;

class Rotation {
 public:
  Rotation() = default;
  // Normalizes and flips the sign so that w >= 0. Throws InvalidArgumentError
  // on non-finite or zero-norm input.
  Rotation(double w, double x, double y, double z);
  explicit Rotation(const Eigen::Quaterniond& q);

  static Rotation identity() { return Rotation(); }
  static Rotation from_matrix(const Mat3& m);
  static Rotation about_axis(const Vec3& axis, double angle);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Vec3 rotate(const Vec3& p) const { return q_ * p; }
  Rotation inverse() const;
  // Rotation angle in [0, pi].
  double angle() const;

  friend Rotation operator*(const Rotation& a, const Rotation& b);

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

// Distance between two rotations on the unit quaternion sphere, insensitive
// to the double cover: min(|qa - qb|, |qa + qb|).
double quaternion_distance(const Rotation& a, const Rotation& b);

struct RigidPose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidPose identity() { return {}; }

  Vec3 act(const Vec3& p) const { return rotation.rotate(p) + translation; }
  RigidPose inverse() const;
  Mat4 matrix() const;

  friend RigidPose operator*(const RigidPose& a, const RigidPose& b);
};

class SimTransform {
 public:
  SimTransform() = default;
  // Throws InvalidArgumentError unless scale is finite and > 0.
  SimTransform(const Rotation& rotation, const Vec3& translation, double scale = 1.0);

  static SimTransform identity() { return {}; }

  const Rotation& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  double scale() const { return scale_; }

  Vec3 act(const Vec3& p) const { return scale_ * rotation_.rotate(p) + translation_; }
  Mat4 matrix() const;

 private:
  Rotation rotation_;
  Vec3 translation_ = Vec3::Zero();
  double scale_ = 1.0;
};

struct SimTangent {
  Vec3 omega = Vec3::Zero();
  Vec3 nu = Vec3::Zero();
  double sigma = 0.0;

  static SimTangent from_vector(const Vec7& v);
  Vec7 to_vector() const;
  // The 4x4 matrix form (see file comment).
  Mat4 matrix() const;

  friend SimTangent operator*(double a, const SimTangent& xi);
};

Mat3 hat(const Vec3& v);

Rotation so3_exp(const Vec3& omega);
// Axis-angle with angle in [0, pi].
Vec3 so3_log(const Rotation& r);

// Left Jacobian W(omega, sigma) = sum_k A^k / (k+1)!, A = hat(omega) + sigma*I.
// sim3_exp maps nu to translation W * nu.
Mat3 sim3_left_jacobian(const Vec3& omega, double sigma);

SimTransform sim3_exp(const SimTangent& xi);
// Throws DomainError("log near rotation cut locus") when the rotation angle is
// >= pi - kCutLocusMargin.
SimTangent sim3_log(const SimTransform& t);

SimTransform compose(const SimTransform& a, const SimTransform& b);
SimTransform inverse(const SimTransform& t);

SimTransform embed_rigid(const RigidPose& p, double scale = 1.0);

struct ProjectOptions {
  double scale_tolerance = 1e-6;
  bool force = false;
};

// Drops the scale. Throws ScaleResidualError when |scale - 1| exceeds the
// tolerance and `force` is not set.
RigidPose project_rigid(const SimTransform& t, const ProjectOptions& options = {});

namespace detail {

// sim3_log without the cut-locus check; the rotation part falls back to the
// quaternion's own axis when the angle reaches pi.
SimTangent sim3_log_unchecked(const SimTransform& t);

}  // namespace detail

}  // namespace egotraj
