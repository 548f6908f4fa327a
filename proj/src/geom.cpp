#include "octvox/geom.hpp"

#include <cmath>

namespace octvox {

namespace {
constexpr double kSmallAngle = 1e-8;
}

Quat so3_exp(const Vec3& omega) {
  const double theta_sq = omega.squaredNorm();
  const double theta = std::sqrt(theta_sq);
  double scale;  // sin(theta/2)/theta
  double w;
  if (theta < kSmallAngle) {
    scale = 0.5 - theta_sq / 48.0;
    w = 1.0 - theta_sq / 8.0;
  } else {
    scale = std::sin(0.5 * theta) / theta;
    w = std::cos(0.5 * theta);
  }
  Quat q(w, scale * omega.x(), scale * omega.y(), scale * omega.z());
  q.normalize();
  return q;
}

Vec3 so3_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // shortest arc
  const Vec3 v(q.x(), q.y(), q.z());
  const double vnorm = v.norm();
  if (vnorm < kSmallAngle) {
    // theta ~ 2*vnorm/w; second-order expansion of 2*atan(vnorm/w)/vnorm
    return v * (2.0 / q.w()) * (1.0 - vnorm * vnorm / (3.0 * q.w() * q.w()));
  }
  const double theta = 2.0 * std::atan2(vnorm, q.w());
  return v * (theta / vnorm);
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rot = (a.rot * b.rot).normalized();
  out.trans = a.rot * b.trans + a.trans;
  return out;
}

Pose invert(const Pose& a) {
  Pose out;
  out.rot = a.rot.conjugate();
  out.trans = -(out.rot * a.trans);
  return out;
}

Vec3 transform_point(const Pose& a, const Vec3& p) {
  return a.rot * p + a.trans;
}

Pose interpolate_pose(const Pose& a, const Pose& b, double alpha) {
  Pose out;
  out.trans = (1.0 - alpha) * a.trans + alpha * b.trans;
  const Vec3 delta = so3_log(a.rot.conjugate() * b.rot);
  out.rot = (a.rot * so3_exp(alpha * delta)).normalized();
  return out;
}

}  // namespace octvox
