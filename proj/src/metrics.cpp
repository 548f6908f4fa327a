#include "octvox/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace octvox {

double ate_rmse(std::span<const TimedPose> est, std::span<const TimedPose> gt,
                bool align, double max_dt) {
  // Associate each estimate with the nearest reference timestamp.
  std::vector<std::pair<Vec3, Vec3>> pairs;  // (est, gt)
  std::size_t j = 0;
  for (const TimedPose& e : est) {
    while (j + 1 < gt.size() &&
           std::abs(gt[j + 1].t - e.t) <= std::abs(gt[j].t - e.t))
      ++j;
    if (j < gt.size() && std::abs(gt[j].t - e.t) <= max_dt)
      pairs.emplace_back(e.pose.trans, gt[j].pose.trans);
  }
  if (pairs.size() < 2)
    throw std::invalid_argument("ate_rmse: fewer than 2 associated poses");

  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();
  if (align) {
    Eigen::Matrix3Xd src(3, pairs.size()), dst(3, pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      src.col(i) = pairs[i].first;
      dst.col(i) = pairs[i].second;
    }
    const Eigen::Matrix4d tf = Eigen::umeyama(src, dst, false);
    rot = tf.topLeftCorner<3, 3>();
    trans = tf.topRightCorner<3, 1>();
  }

  double sq = 0.0;
  for (const auto& [e, g] : pairs) sq += (rot * e + trans - g).squaredNorm();
  return std::sqrt(sq / double(pairs.size()));
}

double relative_efficiency(std::span<const double> t_ms, std::span<const double> util) {
  if (t_ms.size() != util.size())
    throw std::invalid_argument("relative_efficiency: length mismatch");
  if (t_ms.empty())
    throw std::invalid_argument("relative_efficiency: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < t_ms.size(); ++i) {
    if (!(t_ms[i] > 0.0))
      throw std::invalid_argument("relative_efficiency: frame times must be positive");
    if (!(util[i] > 0.0) || util[i] > 1.0)
      throw std::invalid_argument("relative_efficiency: utilization must be in (0, 1]");
    sum += 1.0 / (t_ms[i] * util[i]);
  }
  return sum / double(t_ms.size());
}

}  // namespace octvox
