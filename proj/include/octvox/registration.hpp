// Scan preprocessing (de-skew, downsampling), PCA plane fitting, and the
// iterated prior-damped point-to-plane update.
#pragma once

#include "octvox/geom.hpp"
#include "octvox/knn.hpp"
#include "octvox/octvox_map.hpp"
#include "octvox/traversal.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace octvox {

struct PlaneFit {
  Vec3 normal{0.0, 0.0, 1.0};  // unit when valid
  double d = 0.0;              // plane is n.x + d = 0
  bool valid = false;
  double rms = 0.0;            // RMS point-to-plane residual of the fit points
};

struct Correspondence {
  Vec3 p_body{Vec3::Zero()};
  PlaneFit plane;
  double weight = 1.0;
};

struct EstimatorConfig {
  int max_iter = 4;
  int k = 5;
  double radius = 0.875;          // correspondence search radius, meters
  double plane_pt_thresh = 0.1;   // plane validity: max |n.x + d| of fit points
  double plane_rms_thresh = 0.02; // correspondence gate on the fit's RMS residual
  double downsample_res = 0.5;    // center-based downsampling cell size
  int random_rate = 3;            // keep every rate-th point
  double converge_eps = 1e-4;     // stop when the update norm falls below this
  bool estimate_bias_gravity = false;
  double obs_sigma = 0.05;        // point-to-plane measurement sigma, meters
  double prior_weight = 1e3;      // diagonal pull toward the propagated state
  double huber_delta = 0.05;      // Huber downweighting knee; 0 disables
  bool knn_early_termination = true;
  bool random_uniform = false;    // uniform instead of strided downsampling
  std::uint64_t seed = 1;
  unsigned threads = 1;           // 0 = hardware concurrency

  // Correct the propagated velocity by a fraction of the position-update rate
  // after each scan. Without this, rotation error feeds gravity
  // miscompensation into an unbounded velocity drift; with full gain,
  // registration noise is injected straight into velocity and can destabilize
  // de-skew. The gain trades those two failure modes.
  bool velocity_update = true;
  double velocity_gain = 0.3;
};

struct UpdateStats {
  int iterations = 0;
  std::size_t valid_correspondences = 0;
  std::size_t knn_candidates = 0;
  bool converged = false;
  bool degenerate = false;
  std::vector<double> iteration_cost;   // weighted residual cost per linearization
  std::vector<VoxelKey> touched;        // voxels visited by correspondence search
};

class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeskewedPoint {
  Vec3 p{Vec3::Zero()};  // scan-end IMU frame
  double t = 0.0;
};

/// Pose of the IMU at time t, interpolated from a time-ordered track
/// (translation linear, rotation geodesic). Throws std::invalid_argument when
/// t is not covered by the track (beyond a small boundary slack).
Pose pose_at(std::span<const TimedPose> track, double t);

/// Maps every raw point into the scan-end IMU frame using the relative motion
/// between its own timestamp (t_begin + t_off) and the scan anchor.
std::vector<DeskewedPoint> deskew_scan(const Scan& scan, double t_begin,
                                       std::span<const TimedPose> track,
                                       const Pose& extrinsic);

/// Keeps one point per res-cell: the input point nearest the cell center,
/// earliest index on ties. Output follows cell first-seen order.
std::vector<Vec3> center_downsample(std::span<const Vec3> points, double res);

/// Strided downsampling: keeps indices 0, rate, 2*rate, ...
std::vector<Vec3> random_downsample(std::span<const Vec3> points, int rate);

/// Seeded uniform downsampling: keeps each point with probability 1/rate.
std::vector<Vec3> random_downsample(std::span<const Vec3> points, int rate,
                                    std::uint64_t seed);

/// PCA plane fit: normal is the eigenvector of the smallest covariance
/// eigenvalue. Invalid for fewer than 3 points, rank-deficient (collinear)
/// neighborhoods, or when any point lies farther than thresh from the plane.
PlaneFit fit_plane(std::span<const Vec3> neighbors, double thresh);

/// Residual r = n.(R p_body + t) + d and its Jacobian with respect to the
/// 6-dof pose error [rotation right-perturbation, translation].
void point_plane_residual(const Quat& rot, const Vec3& trans, const Vec3& p_body,
                          const PlaneFit& plane, double& r,
                          Eigen::Matrix<double, 1, 6>* jacobian);

/// Iterated point-to-plane observation update. Per iteration: transform the
/// de-skewed points with the current iterate, search K nearest map
/// representatives, fit local planes, and solve the damped normal equations
/// with a diagonal prior pulling toward `prior`. Velocity, biases and gravity
/// are carried through from the prior: the diagonal-prior simplification
/// provides no observability for them from a single scan, so
/// estimate_bias_gravity currently has no effect beyond being accepted.
///
/// Throws TrackingError when fewer than 10 valid correspondences exist and
/// DegeneracyError when the observation information matrix is rank-deficient.
NavState iterated_update(const NavState& prior, std::span<const Vec3> points_body,
                         const OctVoxMap& map, const TraversalList& list,
                         const EstimatorConfig& cfg, UpdateStats* stats = nullptr);

}  // namespace octvox
