#include "octvox/registration.hpp"

#include "octvox/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace octvox {

namespace {

constexpr double kTrackSlack = 1e-6;  // seconds of tolerated boundary overhang

struct KeyHasher {
  std::size_t operator()(const VoxelKey& k) const { return std::size_t(hash_key(k)); }
};

}  // namespace

Pose pose_at(std::span<const TimedPose> track, double t) {
  if (track.empty()) throw std::invalid_argument("pose_at: empty track");
  if (t < track.front().t - kTrackSlack || t > track.back().t + kTrackSlack)
    throw std::invalid_argument("pose_at: timestamp not covered by track");
  if (track.size() == 1) return track.front().pose;

  auto it = std::lower_bound(track.begin(), track.end(), t,
                             [](const TimedPose& a, double v) { return a.t < v; });
  if (it == track.begin()) return track.front().pose;
  if (it == track.end()) return track.back().pose;
  const TimedPose& hi = *it;
  const TimedPose& lo = *(it - 1);
  const double dt = hi.t - lo.t;
  if (dt <= 0.0) return hi.pose;
  const double alpha = std::clamp((t - lo.t) / dt, 0.0, 1.0);
  return interpolate_pose(lo.pose, hi.pose, alpha);
}

std::vector<DeskewedPoint> deskew_scan(const Scan& scan, double t_begin,
                                       std::span<const TimedPose> track,
                                       const Pose& extrinsic) {
  std::vector<DeskewedPoint> out;
  out.reserve(scan.points.size());
  const Pose end_inv = invert(pose_at(track, scan.t_end));
  for (const RawPoint& pt : scan.points) {
    const double t_i = t_begin + pt.t_off;
    const Pose rel = compose(end_inv, pose_at(track, t_i));
    out.push_back({transform_point(rel, transform_point(extrinsic, pt.p)), t_i});
  }
  return out;
}

std::vector<Vec3> center_downsample(std::span<const Vec3> points, double res) {
  if (res <= 0.0) throw std::invalid_argument("center_downsample: res must be positive");
  std::vector<Vec3> kept;
  std::vector<double> best_d2;
  std::unordered_map<VoxelKey, std::size_t, KeyHasher> cells;
  for (const Vec3& p : points) {
    const std::int64_t cx = std::int64_t(std::floor(p.x() / res));
    const std::int64_t cy = std::int64_t(std::floor(p.y() / res));
    const std::int64_t cz = std::int64_t(std::floor(p.z() / res));
    const VoxelKey cell{std::int32_t(cx), std::int32_t(cy), std::int32_t(cz)};
    const Vec3 center((cx + 0.5) * res, (cy + 0.5) * res, (cz + 0.5) * res);
    const double d2 = (p - center).squaredNorm();
    auto [it, fresh] = cells.try_emplace(cell, kept.size());
    if (fresh) {
      kept.push_back(p);
      best_d2.push_back(d2);
    } else if (d2 < best_d2[it->second]) {
      kept[it->second] = p;
      best_d2[it->second] = d2;
    }
  }
  return kept;
}

std::vector<Vec3> random_downsample(std::span<const Vec3> points, int rate) {
  if (rate < 1) throw std::invalid_argument("random_downsample: rate must be >= 1");
  std::vector<Vec3> out;
  out.reserve(points.size() / std::size_t(rate) + 1);
  for (std::size_t i = 0; i < points.size(); i += std::size_t(rate))
    out.push_back(points[i]);
  return out;
}

std::vector<Vec3> random_downsample(std::span<const Vec3> points, int rate,
                                    std::uint64_t seed) {
  if (rate < 1) throw std::invalid_argument("random_downsample: rate must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, rate - 1);
  std::vector<Vec3> out;
  out.reserve(points.size() / std::size_t(rate) + 1);
  for (const Vec3& p : points)
    if (pick(rng) == 0) out.push_back(p);
  return out;
}

PlaneFit fit_plane(std::span<const Vec3> neighbors, double thresh) {
  PlaneFit fit;
  if (neighbors.size() < 3) return fit;

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : neighbors) centroid += p;
  centroid /= double(neighbors.size());

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : neighbors) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= double(neighbors.size());

  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 evals = es.eigenvalues();  // ascending
  if (evals(1) <= 1e-10 * std::max(evals(2), 1e-12)) return fit;  // collinear

  Vec3 n = es.eigenvectors().col(0);
  // canonical sign so fits are reproducible
  if (n.x() < 0.0 || (n.x() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.z() < 0.0))))
    n = -n;
  fit.normal = n;
  fit.d = -n.dot(centroid);

  double sq = 0.0;
  bool within = true;
  for (const Vec3& p : neighbors) {
    const double r = n.dot(p) + fit.d;
    sq += r * r;
    if (std::abs(r) > thresh) within = false;
  }
  fit.rms = std::sqrt(sq / double(neighbors.size()));
  fit.valid = within;
  return fit;
}

void point_plane_residual(const Quat& rot, const Vec3& trans, const Vec3& p_body,
                          const PlaneFit& plane, double& r,
                          Eigen::Matrix<double, 1, 6>* jacobian) {
  const Vec3 p_world = rot * p_body + trans;
  r = plane.normal.dot(p_world) + plane.d;
  if (jacobian) {
    jacobian->leftCols<3>() = -plane.normal.transpose() * rot.toRotationMatrix() * skew(p_body);
    jacobian->rightCols<3>() = plane.normal.transpose();
  }
}

namespace {

struct PointResult {
  bool valid = false;
  Eigen::Matrix<double, 1, 6> jac;
  double r = 0.0;
  double weight = 1.0;
  std::size_t candidates = 0;
  std::vector<VoxelKey> touched;
};

}  // namespace

NavState iterated_update(const NavState& prior, std::span<const Vec3> points_body,
                         const OctVoxMap& map, const TraversalList& list,
                         const EstimatorConfig& cfg, UpdateStats* stats_out) {
  if (cfg.max_iter < 1) throw std::invalid_argument("iterated_update: max_iter must be >= 1");
  if (cfg.obs_sigma <= 0.0) throw std::invalid_argument("iterated_update: obs_sigma must be positive");

  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;

  Quat rot = prior.rot;
  Vec3 trans = prior.pos;
  const double inv_sigma2 = 1.0 / (cfg.obs_sigma * cfg.obs_sigma);

  UpdateStats stats;
  std::vector<PointResult> results(points_body.size());

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    parallel_for(points_body.size(), cfg.threads, [&](std::size_t i) {
      PointResult& res = results[i];
      res = PointResult{};
      const Vec3 p_world = rot * points_body[i] + trans;
      SearchStats ss;
      SearchOptions opts;
      opts.early_termination = cfg.knn_early_termination;
      opts.touched = &res.touched;
      opts.stats = &ss;
      const auto neighbors = knn_search(map, list, p_world, cfg.k, cfg.radius, opts);
      res.candidates = ss.candidates_evaluated;
      if (neighbors.size() < 3) return;
      std::vector<Vec3> mus;
      mus.reserve(neighbors.size());
      for (const Neighbor& nb : neighbors) mus.push_back(nb.mu);
      const PlaneFit plane = fit_plane(mus, cfg.plane_pt_thresh);
      if (!plane.valid) return;
      // Edge-straddling subvoxels hold averaged representatives that sit off
      // every surface; their fits pass the max-residual rule but carry a high
      // RMS, so gate on that too.
      if (cfg.plane_rms_thresh > 0.0 && plane.rms > cfg.plane_rms_thresh) return;
      point_plane_residual(rot, trans, points_body[i], plane, res.r, &res.jac);
      res.weight = 1.0;
      if (cfg.huber_delta > 0.0 && std::abs(res.r) > cfg.huber_delta)
        res.weight = cfg.huber_delta / std::abs(res.r);
      res.valid = true;
    });

    // Sequential index-order reduction keeps runs bit-identical regardless of
    // thread count.
    Mat6 info = Mat6::Zero();
    Vec6 grad = Vec6::Zero();
    double cost = 0.0;
    std::size_t n_valid = 0;
    for (const PointResult& res : results) {
      stats.knn_candidates += res.candidates;
      for (const VoxelKey& key : res.touched) stats.touched.push_back(key);
      if (!res.valid) continue;
      ++n_valid;
      const double w = res.weight * inv_sigma2;
      info.noalias() += w * res.jac.transpose() * res.jac;
      grad.noalias() += w * res.jac.transpose() * res.r;
      cost += w * res.r * res.r;
    }
    stats.iteration_cost.push_back(cost);
    stats.valid_correspondences = n_valid;
    stats.iterations = iter + 1;

    if (n_valid < 10)
      throw TrackingError("iterated_update: fewer than 10 valid correspondences");

    Eigen::SelfAdjointEigenSolver<Mat6> es(info);
    if (es.eigenvalues()(0) < 1e-6 * std::max(es.eigenvalues()(5), 1.0)) {
      stats.degenerate = true;
      if (stats_out) *stats_out = stats;
      throw DegeneracyError("iterated_update: observation information is rank-deficient");
    }

    Vec6 prior_err;
    prior_err.head<3>() = so3_log(prior.rot.conjugate() * rot);
    prior_err.tail<3>() = trans - prior.pos;

    const Mat6 damped = info + cfg.prior_weight * Mat6::Identity();
    const Vec6 delta = damped.ldlt().solve(-(grad + cfg.prior_weight * prior_err));

    rot = (rot * so3_exp(delta.head<3>())).normalized();
    trans += delta.tail<3>();

    if (delta.norm() < cfg.converge_eps) {
      stats.converged = true;
      break;
    }
  }

  NavState posterior = prior;
  posterior.rot = rot;
  posterior.pos = trans;
  if (stats_out) *stats_out = std::move(stats);
  return posterior;
}

}  // namespace octvox
