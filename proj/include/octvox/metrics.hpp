// Trajectory and efficiency metrics.
#pragma once

#include "octvox/geom.hpp"

#include <span>

namespace octvox {

/// RMSE of translational errors between timestamp-associated pose pairs
/// (association window max_dt). With align=true the estimate is first mapped
/// onto the reference by the closed-form rigid least-squares alignment.
/// Throws std::invalid_argument when fewer than 2 pairs associate.
double ate_rmse(std::span<const TimedPose> est, std::span<const TimedPose> gt,
                bool align, double max_dt = 0.01);

/// Mean of 1/(t_i * u_i) over frames; t_i in milliseconds, u_i in (0, 1].
double relative_efficiency(std::span<const double> t_ms, std::span<const double> util);

}  // namespace octvox
