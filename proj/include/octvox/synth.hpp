// Synthetic scenes, analytic trajectories, and sensor models for generating
// scans and IMU streams with exact ground truth.
#pragma once

#include "octvox/geom.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace octvox {

struct Box {
  Vec3 min{Vec3::Zero()};
  Vec3 max{Vec3::Zero()};
};

// Finite axis-aligned rectangle: plane {x[axis] = offset} clipped to
// [lo0, hi0] x [lo1, hi1] on the two remaining axes (in axis order).
struct RectPlane {
  int axis = 2;
  double offset = 0.0;
  double lo0 = -1.0, hi0 = 1.0;
  double lo1 = -1.0, hi1 = 1.0;
};

struct SceneSpec {
  std::vector<Box> boxes;
  std::vector<RectPlane> planes;
};

/// Hollow rectangular room around the origin; rays from inside hit the walls.
SceneSpec make_room_scene(double width = 10.0, double z_lo = -2.0, double z_hi = 8.0);

/// Room with a few interior pillars for richer geometry.
SceneSpec make_pillar_scene(double width = 10.0, double z_lo = -2.0, double z_hi = 8.0);

struct TrajectorySpec {
  enum class Kind { kStatic, kLine, kCircle, kFigure8 };
  Kind kind = Kind::kCircle;
  double duration = 20.0;
  double lead = 1.5;        // static lead-in so the IMU init window is quiet
  double ramp = 1.5;        // smooth speed ramp after the lead-in
  double radius = 3.0;      // circle radius / figure-8 half-width
  double period = 10.0;     // seconds per revolution at full speed
  double height = 0.0;
  double line_speed = 1.0;
  Vec3 line_dir{1.0, 0.0, 0.0};
  Vec3 origin{0.0, 0.0, 0.0};
};

struct TrajectorySample {
  Pose pose;                     // IMU in world
  Vec3 vel{Vec3::Zero()};        // world frame
  Vec3 acc{Vec3::Zero()};        // world frame, excluding gravity
  Vec3 omega_body{Vec3::Zero()};
};

/// Closed-form pose, velocity, acceleration and body angular rate at time t.
TrajectorySample sample_trajectory(const TrajectorySpec& traj, double t);

struct SensorSpec {
  double scan_rate = 10.0;   // Hz
  double imu_rate = 200.0;   // Hz
  int rays = 2000;           // per scan
  int rings = 16;
  double fov_deg = 70.0;     // full vertical field of view
  double range_sigma = 0.01; // meters
  double accel_sigma = 0.02; // m/s^2
  double gyro_sigma = 0.002; // rad/s
  Vec3 accel_bias{Vec3::Zero()};
  Vec3 gyro_bias{Vec3::Zero()};
  double max_range = 100.0;
  Pose extrinsic;            // LiDAR in IMU frame
  Vec3 gravity{0.0, 0.0, -9.81};
};

/// Nearest positive surface intersection along origin + t*dir, if any.
std::optional<double> ray_cast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir);

/// One scan anchored at t_end. Rays are spread uniformly over the scan period
/// and cast from the interpolated true pose at each ray's own timestamp, so
/// motion skew is reproduced exactly. Points carry Gaussian range noise; rays
/// that miss every surface are dropped.
Scan synthesize_scan(const SceneSpec& scene, const TrajectorySpec& traj, double t_end,
                     const SensorSpec& sensor, std::uint64_t seed);

/// IMU stream for the whole trajectory: acc = R^T (a_world - g) + bias + noise,
/// gyr = body rate + bias + noise.
std::vector<ImuSample> synthesize_imu(const TrajectorySpec& traj, const SensorSpec& sensor,
                                      std::uint64_t seed);

/// Ground-truth IMU pose at every scan anchor.
std::vector<TimedPose> ground_truth_trajectory(const TrajectorySpec& traj,
                                               const SensorSpec& sensor);

}  // namespace octvox
