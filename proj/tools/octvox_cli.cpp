// Command-line frontend: dataset generation, odometry runs, KNN benchmarking,
// and trajectory evaluation.
#include "octvox/io.hpp"
#include "octvox/knn.hpp"
#include "octvox/metrics.hpp"
#include "octvox/octvox_map.hpp"
#include "octvox/pipeline.hpp"
#include "octvox/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace octvox;

namespace {

struct GenArgs {
  std::string out;
  std::string scene = "room";
  std::string traj = "circle";
  double radius = 3.0;
  double period = 10.0;
  double duration = 20.0;
  double height = 0.0;
  double lead = 1.5;
  double ramp = 1.5;
  double line_speed = 1.0;
  double room_size = 10.0;
  double scan_rate = 10.0;
  double imu_rate = 200.0;
  int rays = 2000;
  int rings = 16;
  double fov = 70.0;
  double range_sigma = 0.01;
  double accel_sigma = 0.02;
  double gyro_sigma = 0.002;
  std::uint64_t seed = 1;
};

int run_gen_data(const GenArgs& a) {
  TrajectorySpec traj;
  if (a.traj == "static") traj.kind = TrajectorySpec::Kind::kStatic;
  else if (a.traj == "line") traj.kind = TrajectorySpec::Kind::kLine;
  else if (a.traj == "circle") traj.kind = TrajectorySpec::Kind::kCircle;
  else if (a.traj == "figure8") traj.kind = TrajectorySpec::Kind::kFigure8;
  else throw CLI::ValidationError("--traj must be static|line|circle|figure8");
  traj.radius = a.radius;
  traj.period = a.period;
  traj.duration = a.duration;
  traj.height = a.height;
  traj.lead = a.lead;
  traj.ramp = a.ramp;
  traj.line_speed = a.line_speed;

  SceneSpec scene;
  if (a.scene == "room") scene = make_room_scene(a.room_size);
  else if (a.scene == "pillars") scene = make_pillar_scene(a.room_size);
  else throw CLI::ValidationError("--scene must be room|pillars");

  SensorSpec sensor;
  sensor.scan_rate = a.scan_rate;
  sensor.imu_rate = a.imu_rate;
  sensor.rays = a.rays;
  sensor.rings = a.rings;
  sensor.fov_deg = a.fov;
  sensor.range_sigma = a.range_sigma;
  sensor.accel_sigma = a.accel_sigma;
  sensor.gyro_sigma = a.gyro_sigma;

  fs::create_directories(fs::path(a.out) / "scans");
  io::write_imu_csv((fs::path(a.out) / "imu.csv").string(),
                    synthesize_imu(traj, sensor, a.seed));

  std::vector<io::ScanIndexEntry> index;
  const double period = 1.0 / sensor.scan_rate;
  int k = 1;
  for (; k * period <= traj.duration + 1e-9; ++k) {
    const double t_end = k * period;
    const Scan scan = synthesize_scan(scene, traj, t_end, sensor,
                                      a.seed * 1000003ull + std::uint64_t(k));
    char name[64];
    std::snprintf(name, sizeof(name), "scans/scan_%06d.csv", k);
    io::write_scan_csv((fs::path(a.out) / name).string(), scan);
    index.push_back({t_end, name});
  }
  io::write_scan_index((fs::path(a.out) / "scans.csv").string(), index);
  io::write_tum((fs::path(a.out) / "gt.tum").string(),
                ground_truth_trajectory(traj, sensor));
  std::cout << "wrote " << index.size() << " scans to " << a.out << "\n";
  return 0;
}

int run_odometry(const std::string& data, const std::string& config,
                 const std::string& traj_out, const std::string& metrics_out,
                 const std::string& util_out) {
  OdometryConfig cfg;
  if (!config.empty()) cfg = io::parse_odometry_config(io::read_config(config));

  const auto imu = io::read_imu_csv((fs::path(data) / "imu.csv").string());
  const auto index = io::read_scan_index((fs::path(data) / "scans.csv").string());

  Odometry odo(cfg);
  std::vector<FrameResult> frames;
  std::size_t imu_next = 0;
  for (const auto& entry : index) {
    while (imu_next < imu.size() && imu[imu_next].t <= entry.t_end) {
      odo.push_imu(imu[imu_next]);
      ++imu_next;
    }
    const Scan scan =
        io::read_scan_csv((fs::path(data) / entry.file).string(), entry.t_end);
    if (auto fr = odo.process_scan(scan)) frames.push_back(*fr);
  }

  write_trajectory(frames, traj_out);
  if (!metrics_out.empty()) io::write_metrics_csv(metrics_out, frames);
  if (!util_out.empty()) {
    std::vector<double> util;
    util.reserve(frames.size());
    for (const FrameResult& fr : frames) util.push_back(fr.cpu_utilization);
    io::write_util_csv(util_out, util);
  }
  std::cout << "processed " << frames.size() << " frames -> " << traj_out << "\n";
  return 0;
}

int run_bench_knn(std::size_t n_points, std::size_t n_queries, int k, double radius,
                  double extent, std::uint64_t seed, const std::string& out,
                  const std::string& distribution) {
  MapConfig mc;
  OctVoxMap map(mc);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5 * extent, 0.5 * extent);
  std::normal_distribution<double> gauss(0.0, 1.0);

  if (distribution == "uniform") {
    for (std::size_t i = 0; i < n_points; ++i)
      map.insert_point(Vec3(uni(rng), uni(rng), uni(rng)));
  } else if (distribution == "clusters") {
    const int n_clusters = 24;
    std::vector<Vec3> centers;
    for (int c = 0; c < n_clusters; ++c)
      centers.emplace_back(uni(rng), uni(rng), uni(rng));
    for (std::size_t i = 0; i < n_points; ++i) {
      const Vec3& c = centers[i % centers.size()];
      map.insert_point(c + 0.6 * Vec3(gauss(rng), gauss(rng), gauss(rng)));
    }
  } else {
    throw CLI::ValidationError("--distribution must be uniform|clusters");
  }

  const TraversalList list = TraversalList::covering(radius, mc.subvoxel_size());

  std::ofstream csv;
  if (!out.empty()) {
    csv.open(out);
    csv << "query,candidates_early,candidates_full,match\n";
  }

  std::size_t matches = 0;
  std::size_t early_total = 0, full_total = 0;
  double knn_ms = 0.0, bf_ms = 0.0;
  for (std::size_t q = 0; q < n_queries; ++q) {
    const Vec3 query(uni(rng), uni(rng), uni(rng));

    SearchStats early_stats, full_stats;
    SearchOptions early_opts, full_opts;
    early_opts.stats = &early_stats;
    full_opts.stats = &full_stats;
    full_opts.early_termination = false;

    auto t0 = std::chrono::steady_clock::now();
    const auto got = knn_search(map, list, query, k, radius, early_opts);
    auto t1 = std::chrono::steady_clock::now();
    const auto ref = brute_force_knn(map, query, k, radius);
    auto t2 = std::chrono::steady_clock::now();
    knn_search(map, list, query, k, radius, full_opts);

    knn_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    bf_ms += std::chrono::duration<double, std::milli>(t2 - t1).count();
    early_total += early_stats.candidates_evaluated;
    full_total += full_stats.candidates_evaluated;

    bool match = got.size() == ref.size();
    for (std::size_t i = 0; match && i < got.size(); ++i)
      match = got[i].key == ref[i].key && got[i].s == ref[i].s &&
              got[i].dist == ref[i].dist;
    if (match) ++matches;
    if (csv.is_open())
      csv << q << "," << early_stats.candidates_evaluated << ","
          << full_stats.candidates_evaluated << "," << (match ? 1 : 0) << "\n";
  }

  std::printf("representatives %zu\n", map.occupied_slots());
  std::printf("oracle-match rate %.6f\n", double(matches) / double(n_queries));
  std::printf("mean candidates (early termination) %.2f\n",
              double(early_total) / double(n_queries));
  std::printf("mean candidates (full list) %.2f\n", double(full_total) / double(n_queries));
  std::printf("knn total %.3f ms, brute force total %.3f ms\n", knn_ms, bf_ms);
  return matches == n_queries ? 0 : 1;
}

int run_eval(const std::string& est_path, const std::string& gt_path, bool no_align,
             const std::string& metrics_path, const std::string& util_path,
             double max_dt) {
  const auto est = io::read_tum(est_path);
  const auto gt = io::read_tum(gt_path);
  const double rmse = ate_rmse(est, gt, !no_align, max_dt);
  std::printf("ate_rmse_m %.9g\n", rmse);

  if (!metrics_path.empty()) {
    const auto rows = io::read_metrics_csv(metrics_path);
    std::vector<double> t_ms;
    t_ms.reserve(rows.size());
    double sum = 0.0;
    for (const auto& r : rows) {
      t_ms.push_back(r.elapsed_ms);
      sum += r.elapsed_ms;
    }
    if (!rows.empty())
      std::printf("mean_elapsed_ms %.9g\n", sum / double(rows.size()));
    std::vector<double> util(t_ms.size(), 1.0);
    if (!util_path.empty()) {
      util = io::read_util_csv(util_path);
      if (util.size() != t_ms.size())
        throw std::runtime_error("utilization rows do not match metrics rows");
    }
    std::printf("eta %.9g\n", relative_efficiency(t_ms, util));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"octo-voxel map, exact heuristic-guided KNN, and a LiDAR-inertial "
               "odometry pipeline with synthetic benchmarks"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();
  cmd_gen->add_option("--scene", gen.scene, "room|pillars");
  cmd_gen->add_option("--traj", gen.traj, "static|line|circle|figure8");
  cmd_gen->add_option("--radius", gen.radius, "circle/figure-8 radius, m");
  cmd_gen->add_option("--period", gen.period, "seconds per revolution");
  cmd_gen->add_option("--duration", gen.duration, "trajectory length, s");
  cmd_gen->add_option("--height", gen.height, "trajectory height, m");
  cmd_gen->add_option("--lead", gen.lead, "static lead-in, s");
  cmd_gen->add_option("--ramp", gen.ramp, "speed ramp, s");
  cmd_gen->add_option("--line-speed", gen.line_speed, "line speed, m/s");
  cmd_gen->add_option("--room-size", gen.room_size, "room width, m");
  cmd_gen->add_option("--scan-rate", gen.scan_rate, "Hz");
  cmd_gen->add_option("--imu-rate", gen.imu_rate, "Hz");
  cmd_gen->add_option("--rays", gen.rays, "rays per scan");
  cmd_gen->add_option("--rings", gen.rings, "elevation rings");
  cmd_gen->add_option("--fov", gen.fov, "vertical field of view, deg");
  cmd_gen->add_option("--range-sigma", gen.range_sigma, "range noise, m");
  cmd_gen->add_option("--accel-sigma", gen.accel_sigma, "accel noise, m/s^2");
  cmd_gen->add_option("--gyro-sigma", gen.gyro_sigma, "gyro noise, rad/s");
  cmd_gen->add_option("--seed", gen.seed, "rng seed");

  std::string run_data, run_config, run_traj = "est.tum", run_metrics, run_util;
  auto* cmd_run = app.add_subcommand("run", "run odometry on a dataset");
  cmd_run->add_option("--data", run_data, "dataset directory")->required();
  cmd_run->add_option("--config", run_config, "key=value config file");
  cmd_run->add_option("--traj-out", run_traj, "output trajectory (TUM)");
  cmd_run->add_option("--metrics-out", run_metrics, "per-frame metrics CSV");
  cmd_run->add_option("--util-out", run_util, "per-frame CPU utilization CSV");

  std::size_t bk_points = 100000, bk_queries = 1000;
  int bk_k = 5;
  double bk_radius = 0.875, bk_extent = 10.0;
  std::uint64_t bk_seed = 1;
  std::string bk_out, bk_dist = "uniform";
  auto* cmd_bench = app.add_subcommand("bench-knn", "randomized search workloads");
  cmd_bench->add_option("--points", bk_points, "map points");
  cmd_bench->add_option("--queries", bk_queries, "query count");
  cmd_bench->add_option("--k", bk_k, "neighbors per query");
  cmd_bench->add_option("--radius", bk_radius, "search radius, m");
  cmd_bench->add_option("--extent", bk_extent, "world cube edge, m");
  cmd_bench->add_option("--seed", bk_seed, "rng seed");
  cmd_bench->add_option("--out", bk_out, "per-query CSV");
  cmd_bench->add_option("--distribution", bk_dist, "uniform|clusters");

  std::string ev_est, ev_gt, ev_metrics, ev_util;
  bool ev_no_align = false;
  double ev_max_dt = 0.01;
  auto* cmd_eval = app.add_subcommand("eval", "trajectory and efficiency metrics");
  cmd_eval->add_option("--est", ev_est, "estimated trajectory (TUM)")->required();
  cmd_eval->add_option("--gt", ev_gt, "ground-truth trajectory (TUM)")->required();
  cmd_eval->add_flag("--no-align", ev_no_align, "skip rigid alignment");
  cmd_eval->add_option("--metrics", ev_metrics, "metrics CSV from `run`");
  cmd_eval->add_option("--util", ev_util, "utilization CSV from `run`");
  cmd_eval->add_option("--max-dt", ev_max_dt, "association window, s");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return run_gen_data(gen);
    if (cmd_run->parsed())
      return run_odometry(run_data, run_config, run_traj, run_metrics, run_util);
    if (cmd_bench->parsed())
      return run_bench_knn(bk_points, bk_queries, bk_k, bk_radius, bk_extent, bk_seed,
                           bk_out, bk_dist);
    if (cmd_eval->parsed())
      return run_eval(ev_est, ev_gt, ev_no_align, ev_metrics, ev_util, ev_max_dt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
