#include "egotraj/geom.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "egotraj/errors.hpp"

namespace egotraj {

namespace {

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  const double n2 = q.squaredNorm();
  if (!std::isfinite(n2) || n2 == 0.0) {
    throw InvalidArgumentError("geom", "quaternion must be finite and non-zero");
  }
  // Already unit to rounding: leave untouched so reconstruction is idempotent.
  if (std::abs(n2 - 1.0) > 2e-15) {
    q.coeffs() /= std::sqrt(n2);
  }
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

bool all_finite(const Vec3& v) { return v.allFinite(); }

// Moments M_k(sigma) = integral_0^1 s^k exp(sigma s) ds for k = 0..6.
std::array<double, 7> exp_moments(double sigma) {
  std::array<double, 7> m{};
  if (std::abs(sigma) < 1.0) {
    // Power series: M_k = sum_j sigma^j / (j! (k + j + 1)).
    for (int k = 0; k < 7; ++k) {
      double term = 1.0;  // sigma^j / j!
      double sum = 0.0;
      for (int j = 0; j < 30; ++j) {
        sum += term / static_cast<double>(k + j + 1);
        term *= sigma / static_cast<double>(j + 1);
      }
      m[k] = sum;
    }
    return m;
  }
  const double e = std::exp(sigma);
  m[0] = std::expm1(sigma) / sigma;
  for (int k = 1; k < 7; ++k) {
    m[k] = (e - k * m[k - 1]) / sigma;
  }
  return m;
}

// (e^sigma - 1) / sigma with a 4th-order expansion near zero.
double scale_factor(double sigma) {
  if (std::abs(sigma) < kSmallAngle) {
    return 1.0 + sigma / 2.0 + sigma * sigma / 6.0 + sigma * sigma * sigma / 24.0 +
           sigma * sigma * sigma * sigma / 120.0;
  }
  return std::expm1(sigma) / sigma;
}

Vec3 so3_log_impl(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();
  const Vec3 v(q.x(), q.y(), q.z());
  const double n = v.norm();
  const double w = q.w();
  if (n < kSmallAngle) {
    // theta / n = 2 atan(n / w) / n, expanded in (n / w)^2.
    const double u2 = (n * n) / (w * w);
    return (2.0 / w) * (1.0 - u2 / 3.0 + u2 * u2 / 5.0) * v;
  }
  const double theta = 2.0 * std::atan2(n, w);
  return (theta / n) * v;
}

}  // namespace

Rotation::Rotation(double w, double x, double y, double z)
    : q_(canonical(Eigen::Quaterniond(w, x, y, z))) {}

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(canonical(q)) {}

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw InvalidArgumentError("geom", "rotation matrix must be finite");
  }
  return Rotation(Eigen::Quaterniond(m));
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!std::isfinite(angle) || !all_finite(axis) || n == 0.0) {
    throw InvalidArgumentError("geom", "axis must be finite and non-zero");
  }
  return so3_exp(axis / n * angle);
}

Rotation Rotation::inverse() const { return Rotation(q_.conjugate()); }

double Rotation::angle() const {
  const double n = Vec3(q_.x(), q_.y(), q_.z()).norm();
  return 2.0 * std::atan2(n, q_.w());
}

Rotation operator*(const Rotation& a, const Rotation& b) { return Rotation(a.q_ * b.q_); }

double quaternion_distance(const Rotation& a, const Rotation& b) {
  const auto& qa = a.quaternion().coeffs();
  const auto& qb = b.quaternion().coeffs();
  return std::min((qa - qb).norm(), (qa + qb).norm());
}

RigidPose RigidPose::inverse() const {
  const Rotation inv = rotation.inverse();
  return {inv, -inv.rotate(translation)};
}

Mat4 RigidPose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidPose operator*(const RigidPose& a, const RigidPose& b) {
  return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
}

SimTransform::SimTransform(const Rotation& rotation, const Vec3& translation, double scale)
    : rotation_(rotation), translation_(translation), scale_(scale) {
  if (!std::isfinite(scale) || scale <= 0.0) {
    throw InvalidArgumentError("geom", "Sim(3) scale must be finite and positive, got " +
                                           std::to_string(scale));
  }
  if (!all_finite(translation)) {
    throw InvalidArgumentError("geom", "Sim(3) translation must be finite");
  }
}

Mat4 SimTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = scale_ * rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

SimTangent SimTangent::from_vector(const Vec7& v) {
  return {v.segment<3>(0), v.segment<3>(3), v[6]};
}

Vec7 SimTangent::to_vector() const {
  Vec7 v;
  v << omega, nu, sigma;
  return v;
}

Mat4 SimTangent::matrix() const {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat(omega) + sigma * Mat3::Identity();
  m.topRightCorner<3, 1>() = nu;
  return m;
}

SimTangent operator*(double a, const SimTangent& xi) { return {a * xi.omega, a * xi.nu, a * xi.sigma}; }

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Rotation so3_exp(const Vec3& omega) {
  if (!all_finite(omega)) {
    throw InvalidArgumentError("geom", "so3_exp: non-finite rotation vector");
  }
  const double theta = omega.norm();
  double w = 0.0;
  double k = 0.0;  // sin(theta / 2) / theta
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    w = 1.0 - t2 / 8.0 + t2 * t2 / 384.0;
    k = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0;
  } else {
    w = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  return Rotation(w, k * omega.x(), k * omega.y(), k * omega.z());
}

Vec3 so3_log(const Rotation& r) { return so3_log_impl(r); }

Mat3 sim3_left_jacobian(const Vec3& omega, double sigma) {
  // W = C I + A hat(omega) + B hat(omega)^2 with
  //   C = int e^{sigma s} ds,
  //   A = int e^{sigma s} sin(s theta) / theta ds,
  //   B = int e^{sigma s} (1 - cos(s theta)) / theta^2 ds  (s over [0, 1]).
  const double theta = omega.norm();
  const double c = scale_factor(sigma);
  double a = 0.0;
  double b = 0.0;
  if (theta < kSmallAngle) {
    const auto m = exp_moments(sigma);
    const double t2 = theta * theta;
    a = m[1] - t2 * m[3] / 6.0 + t2 * t2 * m[5] / 120.0;
    b = m[2] / 2.0 - t2 * m[4] / 24.0 + t2 * t2 * m[6] / 720.0;
  } else {
    const double es = std::exp(sigma);
    const double es_sin = es * std::sin(theta);
    const double half_sin = std::sin(0.5 * theta);
    // e^sigma cos(theta) - 1 without cancellation for small sigma and theta.
    const double es_cos_m1 = std::expm1(sigma) * std::cos(theta) - 2.0 * half_sin * half_sin;
    const double denom = theta * theta + sigma * sigma;
    // (e^{sigma + i theta} - 1) / (sigma + i theta), split into parts.
    const double re = (es_cos_m1 * sigma + es_sin * theta) / denom;
    const double im = (es_sin * sigma - es_cos_m1 * theta) / denom;
    a = im / theta;
    b = (c - re) / (theta * theta);
  }
  const Mat3 h = hat(omega);
  return c * Mat3::Identity() + a * h + b * h * h;
}

SimTransform sim3_exp(const SimTangent& xi) {
  if (!all_finite(xi.omega) || !all_finite(xi.nu) || !std::isfinite(xi.sigma)) {
    throw InvalidArgumentError("geom", "sim3_exp: non-finite tangent");
  }
  const Rotation r = so3_exp(xi.omega);
  const Vec3 t = sim3_left_jacobian(xi.omega, xi.sigma) * xi.nu;
  return SimTransform(r, t, std::exp(xi.sigma));
}

namespace detail {

SimTangent sim3_log_unchecked(const SimTransform& t) {
  SimTangent xi;
  xi.omega = so3_log_impl(t.rotation());
  xi.sigma = std::log(t.scale());
  const Mat3 w = sim3_left_jacobian(xi.omega, xi.sigma);
  xi.nu = w.partialPivLu().solve(t.translation());
  return xi;
}

}  // namespace detail

SimTangent sim3_log(const SimTransform& t) {
  const double angle = t.rotation().angle();
  if (angle >= std::numbers::pi - kCutLocusMargin) {
    throw DomainError("geom", "log near rotation cut locus (rotation angle " + std::to_string(angle) + " rad)");
  }
  return detail::sim3_log_unchecked(t);
}

SimTransform compose(const SimTransform& a, const SimTransform& b) {
  return SimTransform(a.rotation() * b.rotation(), a.act(b.translation()), a.scale() * b.scale());
}

SimTransform inverse(const SimTransform& t) {
  const Rotation rinv = t.rotation().inverse();
  const double sinv = 1.0 / t.scale();
  return SimTransform(rinv, -sinv * rinv.rotate(t.translation()), sinv);
}

SimTransform embed_rigid(const RigidPose& p, double scale) { return SimTransform(p.rotation, p.translation, scale); }

RigidPose project_rigid(const SimTransform& t, const ProjectOptions& options) {
  if (!options.force && std::abs(t.scale() - 1.0) > options.scale_tolerance) {
    throw ScaleResidualError("geom", "cannot project Sim(3) with scale " + std::to_string(t.scale()) +
                                         " to SE(3) without force");
  }
  return {Rotation(t.rotation().quaternion()), t.translation()};
}

}  // namespace egotraj
