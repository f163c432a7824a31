#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "rydscape/explorer.hpp"
#include "rydscape/landscape.hpp"
#include "rydscape/propagator.hpp"
#include "rydscape/session_io.hpp"

namespace fs = std::filesystem;
using namespace rydscape;

namespace {

struct CliState {
  std::string config_path;
  std::string out;
  std::string session;
  std::string snapshot;
  std::string scans_dir;
  std::string params_str;
  std::string center_str;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int budget = 0;
  int workers = 0;
  int resolution = 0;
  int pair = -1;  // -1 = all six
  double threshold = kLowCostThreshold;
  bool resume = false;
  bool steadiness = false;
};

int resolve_workers(int cli_workers) {
  if (cli_workers > 0) return cli_workers;
  if (const char* env = std::getenv("RYDSCAPE_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

LaserParams parse_params_list(const std::string& text) {
  std::array<double, 4> a{};
  std::istringstream is(text);
  std::string cell;
  int i = 0;
  while (std::getline(is, cell, ',')) {
    require(i < 4, "expected exactly 4 comma-separated values: " + text);
    a[i++] = std::stod(cell);
  }
  require(i == 4, "expected exactly 4 comma-separated values: " + text);
  return LaserParams::from_array(a);
}

ExperimentConfig load_and_override(const CliState& st) {
  require(!st.config_path.empty(), "--config is required for this command");
  ExperimentConfig cfg = load_config(st.config_path);
  if (st.seed_set) cfg.seed = st.seed;
  if (st.budget > 0) cfg.budget = st.budget;
  if (!st.out.empty()) cfg.output_dir = st.out;
  if (st.resolution > 0) cfg.resolution = st.resolution;
  if (!st.center_str.empty()) cfg.center = parse_params_list(st.center_str);
  cfg.validate();
  return cfg;
}

LaserParams required_center(const ExperimentConfig& cfg) {
  require(cfg.center.has_value(),
          "config field \"center\" (or --center) is required for this command");
  return *cfg.center;
}

std::string pair_tag(const CrossSectionSpec& spec) {
  return std::string(param_name(spec.varied.first)) + "_" +
         param_name(spec.varied.second);
}

int cmd_learn(const CliState& st) {
  ExperimentConfig cfg = load_and_override(st);
  const std::string fingerprint = config_fingerprint(cfg);
  const std::string dir = cfg.output_dir;
  SessionLock lock(dir);
  save_config(cfg, (fs::path(dir) / "config.json").string());
  const std::string archive_path = (fs::path(dir) / "archive.jsonl").string();

  ResumeState resume_state;
  const ResumeState* resume = nullptr;
  if (st.resume) {
    const auto runs = list_snapshot_runs(dir);
    require(!runs.empty(), "--resume: no snapshots found under " + dir);
    const SessionSnapshot snap =
        load_snapshot(snapshot_path(dir, runs.back()), fingerprint);
    resume_state.archive = snap.archive;
    resume_state.hyper = snap.model.hyper;
    resume = &resume_state;
    // rewind the stream to the snapshot boundary so the continuation is
    // identical to an uninterrupted session
    save_archive(snap.archive, archive_path);
    std::cerr << "resuming from snapshot at run " << snap.run_count << "\n";
  } else {
    create_archive_file(archive_path, cfg.seed, fingerprint);
  }

  RunHooks hooks;
  hooks.snapshot_every = 20;
  hooks.on_sample = [&](const CostSample& sample, int) {
    append_archive(archive_path, sample);
  };
  hooks.on_snapshot = [&](const Archive& archive, const GPModel& model,
                          int run_count) {
    SessionSnapshot snap{fingerprint, run_count, archive, model};
    save_snapshot(snap, snapshot_path(dir, run_count));
  };

  const Archive archive = run_loop(cfg.model, cfg.bounds, cfg.policy, cfg.budget,
                                   cfg.seed, hooks, resume, fingerprint);
  const auto [params, cost] = best_cost(archive);
  std::cout << "completed " << archive.samples.size() << " runs\n";
  std::cout << "best cost " << format_full(cost) << " at omega_p="
            << params.omega_p << " omega_c=" << params.omega_c
            << " delta_p=" << params.delta_p << " delta_c=" << params.delta_c
            << "\n";
  return 0;
}

int cmd_scan(const CliState& st) {
  ExperimentConfig cfg = load_and_override(st);
  const LaserParams center = required_center(cfg);
  const int workers = resolve_workers(st.workers);
  const std::string dir = cfg.output_dir;
  SessionLock lock(dir);
  const auto specs = six_cross_sections(center, cfg.bounds, cfg.resolution);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (st.pair >= 0 && static_cast<int>(s) != st.pair) continue;
    const LandscapeGrid grid = scan_cross_section(specs[s], cfg.model, workers);
    const std::string path =
        (fs::path(dir) / ("scan_" + pair_tag(specs[s]) + ".csv")).string();
    export_grid(grid, path, st.threshold);
    export_contour(contour_segments(grid, st.threshold),
                   (fs::path(dir) / ("contour_scan_" + pair_tag(specs[s]) + ".csv"))
                       .string(),
                   st.threshold);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_predict(const CliState& st) {
  ExperimentConfig cfg = load_and_override(st);
  const LaserParams center = required_center(cfg);
  std::string snap_path = st.snapshot;
  if (snap_path.empty()) {
    require(!st.session.empty(),
            "predict needs --snapshot FILE or --session DIR with snapshots");
    const auto runs = list_snapshot_runs(st.session);
    require(!runs.empty(), "no snapshots found under " + st.session);
    snap_path = snapshot_path(st.session, runs.back());
  }
  const SessionSnapshot snap = load_snapshot(snap_path, config_fingerprint(cfg));
  const std::string dir = !st.out.empty() ? st.out : cfg.output_dir;
  fs::create_directories(dir);
  const auto specs = six_cross_sections(center, cfg.bounds, cfg.resolution);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (st.pair >= 0 && static_cast<int>(s) != st.pair) continue;
    const LandscapeGrid grid =
        predict_cross_section(snap.model, specs[s], snap.run_count);
    const std::string path =
        (fs::path(dir) / ("predicted_" + pair_tag(specs[s]) + ".csv")).string();
    export_grid(grid, path, st.threshold);
    export_contour(
        contour_segments(grid, st.threshold),
        (fs::path(dir) / ("contour_predicted_" + pair_tag(specs[s]) + ".csv"))
            .string(),
        st.threshold);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_measures(const CliState& st) {
  ExperimentConfig cfg = load_and_override(st);
  const LaserParams center = required_center(cfg);
  require(!st.session.empty(), "--session DIR is required for measures");
  const std::string fingerprint = config_fingerprint(cfg);
  const Archive archive =
      load_archive((fs::path(st.session) / "archive.jsonl").string());

  auto run_counts = list_snapshot_runs(st.session);
  require(!run_counts.empty(), "no snapshots found under " + st.session);
  std::erase_if(run_counts, [&](int rc) {
    return rc > static_cast<int>(archive.samples.size());
  });

  const auto specs = six_cross_sections(center, cfg.bounds, cfg.resolution);
  std::vector<LandscapeGrid> scans;
  if (!st.scans_dir.empty()) {
    for (const auto& spec : specs) {
      const std::string path =
          (fs::path(st.scans_dir) / ("scan_" + pair_tag(spec) + ".csv")).string();
      LandscapeGrid g = import_grid(path);
      require(g.spec == spec,
              "scan " + path + " does not match the configured cross-sections");
      scans.push_back(std::move(g));
    }
  }

  const auto model_at = [&](int rc) {
    return load_snapshot(snapshot_path(st.session, rc), fingerprint).model;
  };
  const auto records =
      measure_suite(model_at, run_counts, archive, specs,
                    scans.empty() ? nullptr : &scans, st.threshold);

  const std::string out = !st.out.empty()
                              ? st.out
                              : (fs::path(st.session) / "measures.csv").string();
  export_measures(records, out);
  std::cout << "wrote " << out << "\n";

  std::vector<std::optional<double>> history;
  for (const auto& r : records) history.push_back(r.precision_lowcost);
  if (stopping_check(history, 0.16))
    std::cout << "low-cost precision has settled below 0.16; "
                 "further runs are unlikely to sharpen the landscape\n";
  return 0;
}

int cmd_dynamics(const CliState& st) {
  ExperimentConfig cfg = load_and_override(st);
  LaserParams params{};
  if (!st.params_str.empty())
    params = parse_params_list(st.params_str);
  else
    params = required_center(cfg);
  params.validate();

  const auto& model = cfg.model;
  const Eigen::MatrixXcd h =
      build_total_hamiltonian(params, model.geometry, model.coefficients);
  const auto jumps = build_jump_operators(model.gamma_p, model.geometry);
  const auto eig = eigensystem(
      build_system_hamiltonian(model.geometry, model.coefficients));
  const Eigen::MatrixXcd target = thermal_state(eig, thermal_kT(model));
  const Trajectory traj = propagate_trajectory(
      initial_state(model.geometry), h, jumps,
      default_trajectory_times(model.t_f), model.integrator_tol, model.geometry,
      eig, target);

  const std::string out = !st.out.empty() ? st.out : "trajectory.csv";
  export_trajectory(traj, out);
  std::cout << "wrote " << out << "\n";
  std::cout << "D(t_f) = " << format_full(traj.costs.back()) << "\n";
  if (st.steadiness) {
    const double s = steadiness_check(params, model);
    std::cout << "steadiness |dD| = " << format_full(s) << "\n";
  }
  return 0;
}

int cmd_best(const CliState& st) {
  require(!st.session.empty(), "--session DIR is required for best");
  const Archive archive =
      load_archive((fs::path(st.session) / "archive.jsonl").string());
  require(!archive.samples.empty(), "archive is empty");
  const auto [params, cost] = best_cost(archive);
  std::size_t run = 0;
  for (std::size_t i = 0; i < archive.samples.size(); ++i)
    if (archive.samples[i].cost == cost) {
      run = i;
      break;
    }
  std::cout << "best cost " << format_full(cost) << " at run " << run
            << " params " << format_full(params.omega_p) << ","
            << format_full(params.omega_c) << "," << format_full(params.delta_p)
            << "," << format_full(params.delta_c) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliState st;
  CLI::App app{"rydscape: thermalization cost landscapes for laser-driven "
               "Rydberg chains - brute-force scans, Gaussian-process "
               "prediction and active learning"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", st.config_path, "experiment config file (JSON)");
  app.add_option("--seed", st.seed, "override the config seed")
      ->each([&](const std::string&) { st.seed_set = true; });
  app.add_option("--workers", st.workers,
                 "worker threads for scans (default: RYDSCAPE_WORKERS or all cores)");
  app.add_option("--out", st.out, "output file or directory");
  app.add_option("--center", st.center_str,
                 "cross-section center omega_p,omega_c,delta_p,delta_c");
  app.add_flag("--resume", st.resume, "continue from the latest snapshot");

  auto* learn = app.add_subcommand("learn", "run the active-learning loop");
  learn->add_option("--budget", st.budget, "override the config run budget");

  auto* scan = app.add_subcommand("scan", "brute-force cross-section scans");
  scan->add_option("--resolution", st.resolution, "grid points per axis");
  scan->add_option("--pair", st.pair, "scan one cross-section (0..5)");
  scan->add_option("--threshold", st.threshold, "contour threshold");

  auto* predict =
      app.add_subcommand("predict", "predicted cross-sections from a snapshot");
  predict->add_option("--snapshot", st.snapshot, "snapshot file");
  predict->add_option("--session", st.session, "session directory");
  predict->add_option("--resolution", st.resolution, "grid points per axis");
  predict->add_option("--pair", st.pair, "predict one cross-section (0..5)");
  predict->add_option("--threshold", st.threshold, "contour threshold");

  auto* measures =
      app.add_subcommand("measures", "performance measures per snapshot");
  measures->add_option("--session", st.session, "session directory");
  measures->add_option("--scans", st.scans_dir,
                       "directory with scan_*.csv for the extrinsic measures");
  measures->add_option("--resolution", st.resolution, "grid points per axis");
  measures->add_option("--threshold", st.threshold, "low-cost threshold");

  auto* dynamics =
      app.add_subcommand("dynamics", "time-resolved populations at one point");
  dynamics->add_option("--params", st.params_str,
                       "omega_p,omega_c,delta_p,delta_c (default: config center)");
  dynamics->add_flag("--steadiness", st.steadiness,
                     "also report |D(t_f) - D(t_f + 0.2us)|");

  auto* best = app.add_subcommand("best", "report the best archived cost");
  best->add_option("--session", st.session, "session directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (learn->parsed()) return cmd_learn(st);
    if (scan->parsed()) return cmd_scan(st);
    if (predict->parsed()) return cmd_predict(st);
    if (measures->parsed()) return cmd_measures(st);
    if (dynamics->parsed()) return cmd_dynamics(st);
    if (best->parsed()) return cmd_best(st);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
