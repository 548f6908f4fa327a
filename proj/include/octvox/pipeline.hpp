// The odometry loop: IMU-rate state propagation, then per scan
// de-skew -> downsample -> iterated update -> map insert.
#pragma once

#include "octvox/geom.hpp"
#include "octvox/octvox_map.hpp"
#include "octvox/registration.hpp"
#include "octvox/traversal.hpp"

#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace octvox {

struct OdometryConfig {
  Pose extrinsic;                 // T_L^I, LiDAR in IMU frame
  MapConfig map;
  EstimatorConfig est;
  double traversal_r_max = 0.875; // search list extent, meters
  Vec3 gravity_nominal{0.0, 0.0, -9.81};
  double gravity_tol = 0.5;       // accepted |g| deviation, m/s^2
  double imu_init_window = 1.0;   // static window for gravity/bias init, seconds
  double accel_var_thresh = 0.05; // motion detection bound during init, (m/s^2)^2
  bool record_timing = true;      // set false for byte-reproducible outputs
};

struct FrameResult {
  double t = 0.0;
  Pose pose;                      // IMU in world at scan anchor
  double elapsed_ms = 0.0;
  int n_points = 0;               // points surviving downsampling
  int n_valid_corr = 0;
  std::size_t knn_candidates_evaluated = 0;
  int iterations_used = 0;
  double cpu_utilization = 0.0;   // process cpu-time/wall-time, normalized to cores
};

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropagationResult {
  NavState state;
  std::vector<TimedPose> track;  // dense pose track for de-skew
};

/// Midpoint integration between adjacent samples over [t_begin, t_end].
/// Samples must be strictly increasing and bracket the interval (up to a
/// small boundary slack).
PropagationResult propagate_imu(const NavState& state, std::span<const ImuSample> samples,
                                double t_begin, double t_end);

/// Convenience: integrates over the full sample range.
PropagationResult propagate_imu(const NavState& state, std::span<const ImuSample> samples);

class Odometry {
 public:
  explicit Odometry(const OdometryConfig& cfg);

  /// Buffers one IMU sample. Timestamps must be strictly increasing.
  void push_imu(const ImuSample& sample);

  /// Processes one scan. Returns nullopt while the static initialization
  /// window is still being collected (the scan only advances the anchor).
  /// Tracking and degeneracy failures are rethrown with the frame index.
  std::optional<FrameResult> process_scan(const Scan& scan);

  bool initialized() const { return initialized_; }
  const NavState& state() const { return state_; }
  const OctVoxMap& map() const { return map_; }
  const TraversalList& traversal() const { return list_; }
  const OdometryConfig& config() const { return cfg_; }

 private:
  bool try_initialize();

  OdometryConfig cfg_;
  OctVoxMap map_;
  TraversalList list_;
  std::deque<ImuSample> imu_;
  NavState state_;
  double t_state_ = 0.0;
  double last_anchor_ = 0.0;
  bool have_anchor_ = false;
  bool initialized_ = false;
  double last_imu_t_ = -1e300;
  int frame_index_ = -1;
};

/// TUM-format trajectory: `t tx ty tz qx qy qz qw`, one line per frame.
void write_trajectory(std::span<const FrameResult> results, const std::string& path);
void write_trajectory(std::span<const FrameResult> results, std::ostream& os);

}  // namespace octvox
