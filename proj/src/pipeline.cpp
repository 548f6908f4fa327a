#include "octvox/pipeline.hpp"

#include "octvox/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

namespace octvox {

namespace {

constexpr double kBoundarySlack = 1e-6;  // seconds

void integrate_step(NavState& s, const Vec3& omega, const Vec3& accel, double dt) {
  const Quat r_mid = (s.rot * so3_exp(0.5 * dt * omega)).normalized();
  const Vec3 a_world = r_mid * accel + s.gravity;
  s.pos += s.vel * dt + 0.5 * dt * dt * a_world;
  s.vel += a_world * dt;
  s.rot = (s.rot * so3_exp(dt * omega)).normalized();
}

double process_cpu_seconds() {
  timespec ts{};
  if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0) return -1.0;
  return double(ts.tv_sec) + 1e-9 * double(ts.tv_nsec);
}

}  // namespace

PropagationResult propagate_imu(const NavState& state, std::span<const ImuSample> samples,
                                double t_begin, double t_end) {
  if (samples.size() < 2)
    throw std::invalid_argument("propagate_imu: need at least two samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].t > samples[i - 1].t))
      throw std::invalid_argument("propagate_imu: timestamps must be strictly increasing");
  if (t_end < t_begin)
    throw std::invalid_argument("propagate_imu: t_end before t_begin");
  if (t_begin < samples.front().t - kBoundarySlack ||
      t_end > samples.back().t + kBoundarySlack)
    throw std::invalid_argument("propagate_imu: samples do not bracket the interval");

  PropagationResult out;
  out.state = state;
  out.track.push_back({t_begin, state.pose()});

  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double lo = std::max(samples[i].t, t_begin);
    const double hi = std::min(samples[i + 1].t, t_end);
    if (hi <= lo) continue;
    const Vec3 omega = 0.5 * (samples[i].gyr + samples[i + 1].gyr) - out.state.bias_gyr;
    const Vec3 accel = 0.5 * (samples[i].acc + samples[i + 1].acc) - out.state.bias_acc;
    integrate_step(out.state, omega, accel, hi - lo);
    out.track.push_back({hi, out.state.pose()});
  }
  if (out.track.back().t < t_end) out.track.push_back({t_end, out.state.pose()});
  return out;
}

PropagationResult propagate_imu(const NavState& state, std::span<const ImuSample> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("propagate_imu: need at least two samples");
  return propagate_imu(state, samples, samples.front().t, samples.back().t);
}

Odometry::Odometry(const OdometryConfig& cfg)
    : cfg_(cfg),
      map_(cfg.map),
      list_(TraversalList::build(cfg.traversal_r_max, cfg.map.subvoxel_size())) {
  if (cfg_.est.radius > list_.r_max())
    throw std::invalid_argument("Odometry: estimator radius exceeds traversal list extent");
  if (cfg_.imu_init_window <= 0.0)
    throw std::invalid_argument("Odometry: imu_init_window must be positive");
}

void Odometry::push_imu(const ImuSample& sample) {
  if (!(sample.t > last_imu_t_))
    throw std::invalid_argument("push_imu: timestamps must be strictly increasing");
  last_imu_t_ = sample.t;
  imu_.push_back(sample);
}

bool Odometry::try_initialize() {
  if (imu_.size() < 2) return false;
  const double t0 = imu_.front().t;
  if (imu_.back().t - t0 < cfg_.imu_init_window) return false;

  Vec3 mean_acc = Vec3::Zero();
  Vec3 mean_gyr = Vec3::Zero();
  std::size_t n = 0;
  for (const ImuSample& s : imu_) {
    if (s.t > t0 + cfg_.imu_init_window) break;
    mean_acc += s.acc;
    mean_gyr += s.gyr;
    ++n;
  }
  mean_acc /= double(n);
  mean_gyr /= double(n);

  double acc_var = 0.0;
  std::size_t m = 0;
  for (const ImuSample& s : imu_) {
    if (s.t > t0 + cfg_.imu_init_window) break;
    acc_var += (s.acc - mean_acc).squaredNorm();
    ++m;
  }
  acc_var /= double(m);
  if (acc_var > cfg_.accel_var_thresh)
    throw InitializationError("initialization window is not static (accel variance too high)");
  const double gnorm = mean_acc.norm();
  if (std::abs(gnorm - cfg_.gravity_nominal.norm()) > cfg_.gravity_tol)
    throw InitializationError("accelerometer magnitude inconsistent with gravity");

  state_ = NavState{};
  state_.gravity = -mean_acc;  // world frame anchored to the initial IMU pose
  state_.bias_gyr = mean_gyr;
  t_state_ = t0 + cfg_.imu_init_window;
  initialized_ = true;
  return true;
}

std::optional<FrameResult> Odometry::process_scan(const Scan& scan) {
  ++frame_index_;
  const std::string tag = "frame " + std::to_string(frame_index_) + ": ";
  if (scan.points.empty()) throw std::invalid_argument(tag + "empty scan");
  if (have_anchor_ && !(scan.t_end > last_anchor_))
    throw std::invalid_argument(tag + "scan anchors must be increasing");

  if (!initialized_ && !try_initialize()) {
    last_anchor_ = scan.t_end;
    have_anchor_ = true;
    return std::nullopt;
  }
  // Wait until a whole scan interval lies past the initialized state time.
  if (!have_anchor_ || last_anchor_ < t_state_ - kBoundarySlack ||
      scan.t_end <= t_state_) {
    last_anchor_ = scan.t_end;
    have_anchor_ = true;
    return std::nullopt;
  }

  const auto wall_start = std::chrono::steady_clock::now();
  const double cpu_start = process_cpu_seconds();

  const double t_begin = last_anchor_;
  const double duration = scan.t_end - t_begin;
  for (const RawPoint& pt : scan.points)
    if (pt.t_off < 0.0 || pt.t_off > duration + kBoundarySlack)
      throw std::invalid_argument(tag + "point offset outside the scan interval");

  if (imu_.empty() || imu_.back().t < scan.t_end - kBoundarySlack)
    throw std::invalid_argument(tag + "imu samples do not cover the scan");

  // Samples bracketing [t_state_, t_end], one sample of slack on each side.
  std::vector<ImuSample> window;
  for (const ImuSample& s : imu_) {
    if (s.t < t_state_ - 0.5) continue;
    window.push_back(s);
    if (s.t >= scan.t_end) break;
  }

  PropagationResult prop = propagate_imu(state_, window, t_state_, scan.t_end);

  const auto deskewed = deskew_scan(scan, t_begin, prop.track, cfg_.extrinsic);
  std::vector<Vec3> body;
  body.reserve(deskewed.size());
  for (const DeskewedPoint& dp : deskewed) body.push_back(dp.p);

  std::vector<Vec3> selected =
      cfg_.est.random_uniform
          ? random_downsample(body, cfg_.est.random_rate, cfg_.est.seed + std::uint64_t(frame_index_))
          : random_downsample(body, cfg_.est.random_rate);
  selected = center_downsample(selected, cfg_.est.downsample_res);

  NavState posterior = prop.state;
  UpdateStats ustats;
  if (map_.voxel_count() > 0) {
    try {
      posterior = iterated_update(prop.state, selected, map_, list_, cfg_.est, &ustats);
    } catch (const TrackingError& e) {
      throw TrackingError(tag + e.what());
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(tag + e.what());
    }
    // The observation only constrains the pose; fold the position correction
    // back into velocity so gravity miscompensation cannot accumulate there.
    if (cfg_.est.velocity_update && duration > kBoundarySlack)
      posterior.vel = prop.state.vel +
          cfg_.est.velocity_gain * (posterior.pos - prop.state.pos) / duration;
  }

  std::vector<Vec3> world;
  world.reserve(selected.size());
  const Pose pose = posterior.pose();
  for (const Vec3& p : selected) world.push_back(transform_point(pose, p));
  map_.flush_touches(std::move(ustats.touched));
  map_.insert_scan(world);
  map_.evict_to_capacity();

  state_ = posterior;
  t_state_ = scan.t_end;
  last_anchor_ = scan.t_end;

  // Trim consumed samples, keeping one before the new state time.
  while (imu_.size() > 1 && imu_[1].t <= t_state_ - 0.5) imu_.pop_front();

  FrameResult frame;
  frame.t = scan.t_end;
  frame.pose = pose;
  frame.n_points = int(selected.size());
  frame.n_valid_corr = int(ustats.valid_correspondences);
  frame.knn_candidates_evaluated = ustats.knn_candidates;
  frame.iterations_used = ustats.iterations;
  if (cfg_.record_timing) {
    const auto wall_end = std::chrono::steady_clock::now();
    const double wall_s =
        std::chrono::duration<double>(wall_end - wall_start).count();
    frame.elapsed_ms = wall_s * 1e3;
    const double cpu_end = process_cpu_seconds();
    if (cpu_start >= 0.0 && cpu_end >= 0.0 && wall_s > 0.0) {
      const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
      frame.cpu_utilization =
          std::clamp((cpu_end - cpu_start) / wall_s / double(cores), 1e-6, 1.0);
    }
  }
  return frame;
}

void write_trajectory(std::span<const FrameResult> results, std::ostream& os) {
  std::vector<TimedPose> traj;
  traj.reserve(results.size());
  for (const FrameResult& fr : results) traj.push_back({fr.t, fr.pose});
  io::write_tum(os, traj);
}

void write_trajectory(std::span<const FrameResult> results, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trajectory: cannot open " + path);
  write_trajectory(results, os);
}

}  // namespace octvox
