// Shared geometric primitives: SO(3) exp/log, rigid transforms, navigation
// state, and the raw sensor record types used by the odometry pipeline.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

namespace octvox {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rodrigues exponential, quaternion-valued. Falls back to a second-order
/// Taylor expansion below 1e-8 rad.
Quat so3_exp(const Vec3& omega);

/// Inverse of so3_exp on the ball of radius pi. The angle-pi neighbourhood is
/// handled through atan2, which stays well conditioned there.
Vec3 so3_log(const Quat& q);

Mat3 skew(const Vec3& v);

/// Rigid transform (rotation + translation). The quaternion is re-normalized
/// after every composition so long chains of compositions cannot drift.
struct Pose {
  Quat rot{Quat::Identity()};
  Vec3 trans{Vec3::Zero()};

  static Pose identity() { return {}; }
};

Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);
Vec3 transform_point(const Pose& a, const Vec3& p);

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

/// Geodesic interpolation between two poses: translation is linear, rotation
/// follows the SO(3) geodesic. alpha=0 gives a, alpha=1 gives b.
Pose interpolate_pose(const Pose& a, const Pose& b, double alpha);

/// Full navigation state: orientation and position of the IMU in the world
/// frame, velocity, the two IMU biases, and the world gravity vector.
struct NavState {
  Quat rot{Quat::Identity()};
  Vec3 pos{Vec3::Zero()};
  Vec3 vel{Vec3::Zero()};
  Vec3 bias_acc{Vec3::Zero()};
  Vec3 bias_gyr{Vec3::Zero()};
  Vec3 gravity{0.0, 0.0, -9.81};

  Pose pose() const { return {rot, pos}; }
};

struct ImuSample {
  double t = 0.0;  // seconds
  Vec3 acc{Vec3::Zero()};  // m/s^2, body frame
  Vec3 gyr{Vec3::Zero()};  // rad/s, body frame
};

struct RawPoint {
  Vec3 p{Vec3::Zero()};  // sensor frame, meters
  double t_off = 0.0;    // seconds from scan start
};

struct Scan {
  double t_end = 0.0;  // anchor timestamp (scan end)
  std::vector<RawPoint> points;
};

}  // namespace octvox
