#include "octvox/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace octvox::io {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::vector<double> split_fields(const std::string& line, char sep, std::size_t expect,
                                 const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty() && sep == ' ') continue;
    vals.push_back(std::stod(tok));
  }
  if (vals.size() != expect)
    throw std::runtime_error("malformed " + what + " line: " + line);
  return vals;
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key,
                  double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

long get_long(const std::map<std::string, std::string>& kv, const std::string& key,
              long fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stol(it->second);
}

Vec3 get_vec3(const std::map<std::string, std::string>& kv, const std::string& key,
              const Vec3& fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::stringstream ss(it->second);
  Vec3 v;
  if (!(ss >> v.x() >> v.y() >> v.z()))
    throw std::runtime_error("config key " + key + " needs three numbers");
  return v;
}

}  // namespace

void write_tum(std::ostream& os, std::span<const TimedPose> traj) {
  char line[256];
  for (const TimedPose& tp : traj) {
    const Quat& q = tp.pose.rot;
    const Vec3& p = tp.pose.trans;
    std::snprintf(line, sizeof(line), "%.9f %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n",
                  tp.t, p.x(), p.y(), p.z(), q.x(), q.y(), q.z(), q.w());
    os << line;
  }
}

void write_tum(const std::string& path, std::span<const TimedPose> traj) {
  auto os = open_out(path);
  write_tum(os, traj);
}

std::vector<TimedPose> read_tum(const std::string& path) {
  auto is = open_in(path);
  std::vector<TimedPose> traj;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto v = split_fields(line, ' ', 8, "trajectory");
    TimedPose tp;
    tp.t = v[0];
    tp.pose.trans = Vec3(v[1], v[2], v[3]);
    tp.pose.rot = Quat(v[7], v[4], v[5], v[6]).normalized();
    traj.push_back(tp);
  }
  return traj;
}

void write_scan_csv(const std::string& path, const Scan& scan) {
  auto os = open_out(path);
  os << "x,y,z,t_off\n";
  char line[160];
  for (const RawPoint& pt : scan.points) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g\n", pt.p.x(), pt.p.y(),
                  pt.p.z(), pt.t_off);
    os << line;
  }
}

Scan read_scan_csv(const std::string& path, double t_end) {
  auto is = open_in(path);
  Scan scan;
  scan.t_end = t_end;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto v = split_fields(line, ',', 4, "scan");
    scan.points.push_back({Vec3(v[0], v[1], v[2]), v[3]});
  }
  return scan;
}

void write_imu_csv(const std::string& path, std::span<const ImuSample> samples) {
  auto os = open_out(path);
  os << "t,ax,ay,az,gx,gy,gz\n";
  char line[224];
  for (const ImuSample& s : samples) {
    std::snprintf(line, sizeof(line), "%.9f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.t,
                  s.acc.x(), s.acc.y(), s.acc.z(), s.gyr.x(), s.gyr.y(), s.gyr.z());
    os << line;
  }
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  auto is = open_in(path);
  std::vector<ImuSample> samples;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto v = split_fields(line, ',', 7, "imu");
    samples.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
  }
  return samples;
}

void write_scan_index(const std::string& path, std::span<const ScanIndexEntry> entries) {
  auto os = open_out(path);
  os << "t_end,file\n";
  char buf[64];
  for (const ScanIndexEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%.9f,", e.t_end);
    os << buf << e.file << "\n";
  }
}

std::vector<ScanIndexEntry> read_scan_index(const std::string& path) {
  auto is = open_in(path);
  std::vector<ScanIndexEntry> entries;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed scan index line: " + line);
    entries.push_back({std::stod(line.substr(0, comma)), line.substr(comma + 1)});
  }
  return entries;
}

void write_metrics_csv(const std::string& path, std::span<const FrameResult> frames) {
  auto os = open_out(path);
  os << "frame,t,elapsed_ms,n_points,n_corr,candidates,iters\n";
  char line[224];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameResult& f = frames[i];
    std::snprintf(line, sizeof(line), "%zu,%.9f,%.3f,%d,%d,%zu,%d\n", i, f.t,
                  f.elapsed_ms, f.n_points, f.n_valid_corr,
                  f.knn_candidates_evaluated, f.iterations_used);
    os << line;
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  auto is = open_in(path);
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto v = split_fields(line, ',', 7, "metrics");
    rows.push_back({int(v[0]), v[1], v[2], int(v[3]), int(v[4]), std::size_t(v[5]), int(v[6])});
  }
  return rows;
}

void write_util_csv(const std::string& path, std::span<const double> util) {
  auto os = open_out(path);
  os << "frame,u\n";
  char line[64];
  for (std::size_t i = 0; i < util.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.6f\n", i, util[i]);
    os << line;
  }
}

std::vector<double> read_util_csv(const std::string& path) {
  auto is = open_in(path);
  std::vector<double> util;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto v = split_fields(line, ',', 2, "utilization");
    util.push_back(v[1]);
  }
  return util;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  auto is = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }
  return kv;
}

OdometryConfig parse_odometry_config(const std::map<std::string, std::string>& kv) {
  static const char* known[] = {
      "voxel_size", "tau_merge", "n_max", "capacity", "max_iter", "knn_k", "knn_r",
      "traversal_r_max", "plane_pt_thresh", "plane_rms_thresh", "downsample_res", "random_rate",
      "converge_eps", "estimate_bias_gravity", "obs_sigma", "prior_weight",
      "huber_delta", "knn_early_termination", "random_uniform", "seed", "threads", "velocity_update", "velocity_gain",
      "extrinsic_t", "extrinsic_q", "gravity", "gravity_tol", "imu_init_window",
      "accel_var_thresh", "record_timing"};
  for (const auto& [key, _] : kv) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) { ok = true; break; }
    if (!ok) throw std::runtime_error("unknown config key: " + key);
  }

  OdometryConfig cfg;
  cfg.map.voxel_size = get_double(kv, "voxel_size", cfg.map.voxel_size);
  cfg.map.tau_merge = get_double(kv, "tau_merge", cfg.map.tau_merge);
  cfg.map.n_max = std::uint32_t(get_long(kv, "n_max", long(cfg.map.n_max)));
  cfg.map.capacity = std::size_t(get_long(kv, "capacity", long(cfg.map.capacity)));
  cfg.est.max_iter = int(get_long(kv, "max_iter", cfg.est.max_iter));
  cfg.est.k = int(get_long(kv, "knn_k", cfg.est.k));
  cfg.est.radius = get_double(kv, "knn_r", cfg.est.radius);
  cfg.traversal_r_max = get_double(kv, "traversal_r_max", cfg.traversal_r_max);
  cfg.est.plane_pt_thresh = get_double(kv, "plane_pt_thresh", cfg.est.plane_pt_thresh);
  cfg.est.plane_rms_thresh = get_double(kv, "plane_rms_thresh", cfg.est.plane_rms_thresh);
  cfg.est.downsample_res = get_double(kv, "downsample_res", cfg.est.downsample_res);
  cfg.est.random_rate = int(get_long(kv, "random_rate", cfg.est.random_rate));
  cfg.est.converge_eps = get_double(kv, "converge_eps", cfg.est.converge_eps);
  cfg.est.estimate_bias_gravity = get_long(kv, "estimate_bias_gravity", 0) != 0;
  cfg.est.obs_sigma = get_double(kv, "obs_sigma", cfg.est.obs_sigma);
  cfg.est.prior_weight = get_double(kv, "prior_weight", cfg.est.prior_weight);
  cfg.est.huber_delta = get_double(kv, "huber_delta", cfg.est.huber_delta);
  cfg.est.knn_early_termination = get_long(kv, "knn_early_termination", 1) != 0;
  cfg.est.random_uniform = get_long(kv, "random_uniform", 0) != 0;
  cfg.est.seed = std::uint64_t(get_long(kv, "seed", long(cfg.est.seed)));
  cfg.est.threads = unsigned(get_long(kv, "threads", long(cfg.est.threads)));
  cfg.est.velocity_update = get_long(kv, "velocity_update", 1) != 0;
  cfg.est.velocity_gain = get_double(kv, "velocity_gain", cfg.est.velocity_gain);
  cfg.extrinsic.trans = get_vec3(kv, "extrinsic_t", cfg.extrinsic.trans);
  if (auto it = kv.find("extrinsic_q"); it != kv.end()) {
    std::stringstream ss(it->second);
    double qx, qy, qz, qw;
    if (!(ss >> qx >> qy >> qz >> qw))
      throw std::runtime_error("config key extrinsic_q needs four numbers (x y z w)");
    cfg.extrinsic.rot = Quat(qw, qx, qy, qz).normalized();
  }
  cfg.gravity_nominal = get_vec3(kv, "gravity", cfg.gravity_nominal);
  cfg.gravity_tol = get_double(kv, "gravity_tol", cfg.gravity_tol);
  cfg.imu_init_window = get_double(kv, "imu_init_window", cfg.imu_init_window);
  cfg.accel_var_thresh = get_double(kv, "accel_var_thresh", cfg.accel_var_thresh);
  cfg.record_timing = get_long(kv, "record_timing", 1) != 0;
  return cfg;
}

}  // namespace octvox::io
