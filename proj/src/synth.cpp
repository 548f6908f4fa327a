#include "octvox/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace octvox {

namespace {

constexpr double kRayEps = 1e-9;

// Quintic-smoothstep speed ramp. Returns progress u in "full-speed seconds"
// together with its first two derivatives.
struct Progress {
  double u = 0.0, du = 0.0, ddu = 0.0;
};

Progress progress_at(const TrajectorySpec& traj, double t) {
  Progress pr;
  if (t <= traj.lead) return pr;
  const double ramp = std::max(traj.ramp, 1e-9);
  if (t < traj.lead + ramp) {
    const double tau = (t - traj.lead) / ramp;
    const double tau2 = tau * tau;
    const double rate = tau2 * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
    const double integral = tau2 * tau2 * (2.5 + tau * (-3.0 + tau));
    pr.u = ramp * integral;
    pr.du = rate;
    pr.ddu = 30.0 * tau2 * (tau - 1.0) * (tau - 1.0) / ramp;
    return pr;
  }
  pr.u = 0.5 * ramp + (t - traj.lead - ramp);
  pr.du = 1.0;
  return pr;
}

}  // namespace

TrajectorySample sample_trajectory(const TrajectorySpec& traj, double t) {
  TrajectorySample out;
  const Progress pr = progress_at(traj, t);
  switch (traj.kind) {
    case TrajectorySpec::Kind::kStatic: {
      out.pose.trans = traj.origin;
      break;
    }
    case TrajectorySpec::Kind::kLine: {
      const Vec3 dir = traj.line_dir.normalized();
      out.pose.trans = traj.origin + dir * traj.line_speed * pr.u;
      out.vel = dir * traj.line_speed * pr.du;
      out.acc = dir * traj.line_speed * pr.ddu;
      break;
    }
    case TrajectorySpec::Kind::kCircle: {
      const double w = 2.0 * M_PI / traj.period;
      const double theta = w * pr.u;
      const double dtheta = w * pr.du;
      const double ddtheta = w * pr.ddu;
      const double c = std::cos(theta), s = std::sin(theta);
      const double r = traj.radius;
      out.pose.trans = traj.origin + Vec3(r * c, r * s, traj.height);
      out.vel = Vec3(-r * s, r * c, 0.0) * dtheta;
      out.acc = Vec3(-r * s, r * c, 0.0) * ddtheta - Vec3(r * c, r * s, 0.0) * dtheta * dtheta;
      // heading follows the tangent
      out.pose.rot = Quat(Eigen::AngleAxisd(theta + 0.5 * M_PI, Vec3::UnitZ()));
      out.omega_body = Vec3(0.0, 0.0, dtheta);
      break;
    }
    case TrajectorySpec::Kind::kFigure8: {
      const double w = 2.0 * M_PI / traj.period;
      const double phi = w * pr.u;
      const double dphi = w * pr.du;
      const double ddphi = w * pr.ddu;
      const double a = traj.radius;
      out.pose.trans = traj.origin +
                       Vec3(a * std::sin(phi), 0.5 * a * std::sin(2.0 * phi), traj.height);
      out.vel = Vec3(a * std::cos(phi) * dphi, a * std::cos(2.0 * phi) * dphi, 0.0);
      out.acc = Vec3(a * (std::cos(phi) * ddphi - std::sin(phi) * dphi * dphi),
                     a * (std::cos(2.0 * phi) * ddphi - 2.0 * std::sin(2.0 * phi) * dphi * dphi),
                     0.0);
      break;
    }
  }
  return out;
}

SceneSpec make_room_scene(double width, double z_lo, double z_hi) {
  SceneSpec scene;
  const double h = 0.5 * width;
  scene.boxes.push_back({Vec3(-h, -h, z_lo), Vec3(h, h, z_hi)});
  return scene;
}

SceneSpec make_pillar_scene(double width, double z_lo, double z_hi) {
  SceneSpec scene = make_room_scene(width, z_lo, z_hi);
  const double h = 0.5 * width;
  scene.boxes.push_back({Vec3(0.35 * h, 0.35 * h, z_lo), Vec3(0.45 * h, 0.45 * h, z_hi)});
  scene.boxes.push_back({Vec3(-0.5 * h, -0.42 * h, z_lo), Vec3(-0.38 * h, -0.3 * h, z_hi)});
  scene.boxes.push_back({Vec3(-0.1 * h, 0.55 * h, z_lo), Vec3(0.1 * h, 0.65 * h, z_lo + 1.0)});
  return scene;
}

namespace {

std::optional<double> ray_box(const Box& box, const Vec3& o, const Vec3& d) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double lo = (box.min[a] - o[a]) / d[a];
    double hi = (box.max[a] - o[a]) / d[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  if (t0 > kRayEps) return t0;   // entering from outside
  if (t1 > kRayEps) return t1;   // inside: exits through a face
  return std::nullopt;
}

std::optional<double> ray_rect(const RectPlane& pl, const Vec3& o, const Vec3& d) {
  if (std::abs(d[pl.axis]) < 1e-15) return std::nullopt;
  const double t = (pl.offset - o[pl.axis]) / d[pl.axis];
  if (t <= kRayEps) return std::nullopt;
  const int a0 = (pl.axis + 1) % 3;
  const int a1 = (pl.axis + 2) % 3;
  const double q0 = o[a0] + t * d[a0];
  const double q1 = o[a1] + t * d[a1];
  if (q0 < pl.lo0 || q0 > pl.hi0 || q1 < pl.lo1 || q1 > pl.hi1) return std::nullopt;
  return t;
}

}  // namespace

std::optional<double> ray_cast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<double> best;
  for (const Box& box : scene.boxes)
    if (auto t = ray_box(box, origin, dir))
      if (!best || *t < *best) best = t;
  for (const RectPlane& pl : scene.planes)
    if (auto t = ray_rect(pl, origin, dir))
      if (!best || *t < *best) best = t;
  return best;
}

Scan synthesize_scan(const SceneSpec& scene, const TrajectorySpec& traj, double t_end,
                     const SensorSpec& sensor, std::uint64_t seed) {
  if (t_end < 0.0 || t_end > traj.duration + 1e-9)
    throw std::invalid_argument("synthesize_scan: t_end outside the trajectory");
  const double period = 1.0 / sensor.scan_rate;
  const double t_start = t_end - period;
  const double fov = sensor.fov_deg * M_PI / 180.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Scan scan;
  scan.t_end = t_end;
  scan.points.reserve(std::size_t(sensor.rays));
  for (int i = 0; i < sensor.rays; ++i) {
    const double f = double(i) / double(sensor.rays);
    const double t_i = t_start + f * period;
    const TrajectorySample truth = sample_trajectory(traj, std::max(t_i, 0.0));
    const Pose sensor_pose = compose(truth.pose, sensor.extrinsic);

    const double azimuth = 2.0 * M_PI * f;
    const int ring = i % std::max(sensor.rings, 1);
    const double elev = sensor.rings > 1
                            ? -0.5 * fov + fov * double(ring) / double(sensor.rings - 1)
                            : 0.0;
    const Vec3 dir_local(std::cos(elev) * std::cos(azimuth),
                         std::cos(elev) * std::sin(azimuth), std::sin(elev));
    const Vec3 dir_world = sensor_pose.rot * dir_local;

    const auto hit = ray_cast(scene, sensor_pose.trans, dir_world);
    if (!hit || *hit > sensor.max_range) continue;
    const double range = *hit + sensor.range_sigma * noise(rng);
    scan.points.push_back({range * dir_local, f * period});
  }
  return scan;
}

std::vector<ImuSample> synthesize_imu(const TrajectorySpec& traj, const SensorSpec& sensor,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double dt = 1.0 / sensor.imu_rate;
  const std::size_t n = std::size_t(std::floor(traj.duration * sensor.imu_rate)) + 1;

  std::vector<ImuSample> samples;
  samples.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = double(j) * dt;
    const TrajectorySample truth = sample_trajectory(traj, t);
    const Mat3 r_t = truth.pose.rot.toRotationMatrix().transpose();
    ImuSample s;
    s.t = t;
    s.acc = r_t * (truth.acc - sensor.gravity) + sensor.accel_bias +
            sensor.accel_sigma * Vec3(noise(rng), noise(rng), noise(rng));
    s.gyr = truth.omega_body + sensor.gyro_bias +
            sensor.gyro_sigma * Vec3(noise(rng), noise(rng), noise(rng));
    samples.push_back(s);
  }
  return samples;
}

std::vector<TimedPose> ground_truth_trajectory(const TrajectorySpec& traj,
                                               const SensorSpec& sensor) {
  std::vector<TimedPose> gt;
  const double period = 1.0 / sensor.scan_rate;
  for (int k = 1; k * period <= traj.duration + 1e-9; ++k) {
    const double t = k * period;
    gt.push_back({t, sample_trajectory(traj, t).pose});
  }
  return gt;
}

}  // namespace octvox
