// File formats: TUM trajectories, scan/IMU CSVs, key=value configs, and the
// per-frame metrics CSV.
#pragma once

#include "octvox/geom.hpp"
#include "octvox/pipeline.hpp"
#include "octvox/registration.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace octvox::io {

// TUM format: `t tx ty tz qx qy qz qw`, chronological, 9 significant digits.
void write_tum(std::ostream& os, std::span<const TimedPose> traj);
void write_tum(const std::string& path, std::span<const TimedPose> traj);
std::vector<TimedPose> read_tum(const std::string& path);

// Scan CSV: header `x,y,z,t_off`, one point per line.
void write_scan_csv(const std::string& path, const Scan& scan);
Scan read_scan_csv(const std::string& path, double t_end);

// IMU CSV: header `t,ax,ay,az,gx,gy,gz`.
void write_imu_csv(const std::string& path, std::span<const ImuSample> samples);
std::vector<ImuSample> read_imu_csv(const std::string& path);

// Scan index: header `t_end,file`, chronological.
struct ScanIndexEntry {
  double t_end = 0.0;
  std::string file;
};
void write_scan_index(const std::string& path, std::span<const ScanIndexEntry> entries);
std::vector<ScanIndexEntry> read_scan_index(const std::string& path);

// Metrics CSV: header `frame,t,elapsed_ms,n_points,n_corr,candidates,iters`.
void write_metrics_csv(const std::string& path, std::span<const FrameResult> frames);
struct MetricsRow {
  int frame = 0;
  double t = 0.0;
  double elapsed_ms = 0.0;
  int n_points = 0;
  int n_corr = 0;
  std::size_t candidates = 0;
  int iters = 0;
};
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Utilization CSV: header `frame,u`.
void write_util_csv(const std::string& path, std::span<const double> util);
std::vector<double> read_util_csv(const std::string& path);

// Flat key=value config, `#` comments and blank lines ignored.
std::map<std::string, std::string> read_config(const std::string& path);

/// Maps config keys onto an OdometryConfig; throws on unknown keys or
/// malformed values. Missing keys keep their defaults.
OdometryConfig parse_odometry_config(const std::map<std::string, std::string>& kv);

}  // namespace octvox::io
