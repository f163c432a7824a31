#include "rydscape/session_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace rydscape {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ValidationError("config: unknown key \"" +
                            (prefix.empty() ? key : prefix + "." + key) + "\"");
  }
}

double get_num(const json& obj, const std::string& key, const std::string& prefix) {
  if (!obj.contains(key))
    throw ValidationError("config: missing key \"" + prefix + key + "\"");
  if (!obj[key].is_number())
    throw ValidationError("config: \"" + prefix + key + "\" must be a number");
  return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& key, double fallback,
                  const std::string& prefix) {
  return obj.contains(key) ? get_num(obj, key, prefix) : fallback;
}

LaserParams params_from_json(const json& obj, const std::string& prefix) {
  check_keys(obj, {"omega_p", "omega_c", "delta_p", "delta_c"}, prefix);
  LaserParams p;
  p.omega_p = get_num(obj, "omega_p", prefix + ".");
  p.omega_c = get_num(obj, "omega_c", prefix + ".");
  p.delta_p = get_num(obj, "delta_p", prefix + ".");
  p.delta_c = get_num(obj, "delta_c", prefix + ".");
  return p;
}

json params_to_json(const LaserParams& p) {
  return json{{"omega_p", p.omega_p},
              {"omega_c", p.omega_c},
              {"delta_p", p.delta_p},
              {"delta_c", p.delta_c}};
}

json model_to_json(const ModelConfig& m) {
  return json{
      {"geometry",
       {{"k", m.geometry.k}, {"d", m.geometry.d},
        {"delta_offset", m.geometry.delta_offset}}},
      {"coefficients",
       {{"c3", m.coefficients.c3}, {"c6_rr", m.coefficients.c6_rr},
        {"c6_pr", m.coefficients.c6_pr}, {"c6_sr", m.coefficients.c6_sr}}},
      {"gamma_p", m.gamma_p},
      {"kT_eff", m.kT_eff},
      {"t_f", m.t_f},
      {"integrator_tol", m.integrator_tol}};
}

json bounds_to_json(const Bounds& b) {
  json j;
  for (int i = 0; i < 4; ++i)
    j[param_name(i)] = {b.ranges[i].first, b.ranges[i].second};
  return j;
}

json policy_to_json(const AcquisitionPolicy& p) {
  return json{{"bias_cycle", p.bias_cycle},
              {"n_init", p.n_init},
              {"random_interleave", p.random_interleave},
              {"multistart", p.multistart},
              {"acq_evals", p.acq_evals},
              {"hyper_starts", p.hyper_starts},
              {"hyper_max_evals", p.hyper_max_evals}};
}

json sample_to_json(const CostSample& s) {
  json j{{"params", {s.params.omega_p, s.params.omega_c, s.params.delta_p,
                     s.params.delta_c}},
         {"cost", s.cost},
         {"failed", s.failed}};
  j["steadiness"] = s.steadiness ? json(*s.steadiness) : json(nullptr);
  return j;
}

CostSample sample_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("params") || !j.contains("cost"))
    throw ValidationError("archive: malformed record " + where);
  const auto& p = j["params"];
  if (!p.is_array() || p.size() != 4)
    throw ValidationError("archive: params must have 4 entries " + where);
  CostSample s;
  s.params = LaserParams{p[0].get<double>(), p[1].get<double>(),
                         p[2].get<double>(), p[3].get<double>()};
  s.cost = j["cost"].get<double>();
  s.failed = j.value("failed", false);
  if (j.contains("steadiness") && !j["steadiness"].is_null())
    s.steadiness = j["steadiness"].get<double>();
  return s;
}

json hyper_to_json(const KernelHyperparams& h) {
  return json{{"signal_variance", h.signal_variance},
              {"length_scales", std::vector<double>(
                                    h.length_scales.data(),
                                    h.length_scales.data() + h.length_scales.size())},
              {"noise_variance", h.noise_variance}};
}

KernelHyperparams hyper_from_json(const json& j) {
  KernelHyperparams h;
  h.signal_variance = j.at("signal_variance").get<double>();
  h.noise_variance = j.at("noise_variance").get<double>();
  const auto ls = j.at("length_scales").get<std::vector<double>>();
  h.length_scales = Eigen::Map<const Eigen::VectorXd>(ls.data(), ls.size());
  return h;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: parse error in " + origin + ": " + e.what());
  }
  if (!root.is_object()) throw ValidationError("config: top level must be an object");
  check_keys(root,
             {"model", "bounds", "policy", "budget", "seed", "output_dir",
              "resolution", "center", "note"},
             "");

  ExperimentConfig cfg;
  if (!root.contains("model"))
    throw ValidationError("config: missing key \"model\"");
  const json& m = root["model"];
  check_keys(m,
             {"geometry", "coefficients", "gamma_p", "kT_eff", "t_f",
              "integrator_tol", "note"},
             "model");
  if (!m.contains("geometry"))
    throw ValidationError("config: missing key \"model.geometry\"");
  const json& g = m["geometry"];
  check_keys(g, {"k", "d", "delta_offset"}, "model.geometry");
  cfg.model.geometry.k = static_cast<int>(get_num(g, "k", "model.geometry."));
  cfg.model.geometry.d = get_num(g, "d", "model.geometry.");
  cfg.model.geometry.delta_offset = get_num(g, "delta_offset", "model.geometry.");
  if (!m.contains("coefficients"))
    throw ValidationError("config: missing key \"model.coefficients\"");
  const json& c = m["coefficients"];
  check_keys(c, {"c3", "c6_rr", "c6_pr", "c6_sr", "note"}, "model.coefficients");
  cfg.model.coefficients.c3 = get_num(c, "c3", "model.coefficients.");
  cfg.model.coefficients.c6_rr = get_num(c, "c6_rr", "model.coefficients.");
  cfg.model.coefficients.c6_pr = get_num(c, "c6_pr", "model.coefficients.");
  cfg.model.coefficients.c6_sr = get_num(c, "c6_sr", "model.coefficients.");
  cfg.model.gamma_p = get_num_or(m, "gamma_p", cfg.model.gamma_p, "model.");
  cfg.model.kT_eff = get_num_or(m, "kT_eff", cfg.model.kT_eff, "model.");
  cfg.model.t_f = get_num_or(m, "t_f", cfg.model.t_f, "model.");
  cfg.model.integrator_tol =
      get_num_or(m, "integrator_tol", cfg.model.integrator_tol, "model.");

  if (root.contains("bounds")) {
    const json& b = root["bounds"];
    check_keys(b, {"omega_p", "omega_c", "delta_p", "delta_c"}, "bounds");
    for (int i = 0; i < 4; ++i) {
      const std::string name = param_name(i);
      if (!b.contains(name)) continue;
      const json& r = b[name];
      if (!r.is_array() || r.size() != 2)
        throw ValidationError("config: \"bounds." + name + "\" must be [min, max]");
      cfg.bounds.ranges[i] = {r[0].get<double>(), r[1].get<double>()};
    }
  }

  if (root.contains("policy")) {
    const json& p = root["policy"];
    check_keys(p,
               {"bias_cycle", "n_init", "random_interleave", "multistart",
                "acq_evals", "hyper_starts", "hyper_max_evals"},
               "policy");
    if (p.contains("bias_cycle")) {
      if (!p["bias_cycle"].is_array())
        throw ValidationError("config: \"policy.bias_cycle\" must be an array");
      cfg.policy.bias_cycle = p["bias_cycle"].get<std::vector<double>>();
    }
    cfg.policy.n_init =
        static_cast<int>(get_num_or(p, "n_init", cfg.policy.n_init, "policy."));
    cfg.policy.random_interleave = static_cast<int>(get_num_or(
        p, "random_interleave", cfg.policy.random_interleave, "policy."));
    cfg.policy.multistart = static_cast<int>(
        get_num_or(p, "multistart", cfg.policy.multistart, "policy."));
    cfg.policy.acq_evals = static_cast<int>(
        get_num_or(p, "acq_evals", cfg.policy.acq_evals, "policy."));
    cfg.policy.hyper_starts = static_cast<int>(
        get_num_or(p, "hyper_starts", cfg.policy.hyper_starts, "policy."));
    cfg.policy.hyper_max_evals = static_cast<int>(
        get_num_or(p, "hyper_max_evals", cfg.policy.hyper_max_evals, "policy."));
  }

  cfg.budget = static_cast<int>(get_num_or(root, "budget", cfg.budget, ""));
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer() && !root["seed"].is_number_unsigned())
      throw ValidationError("config: \"seed\" must be an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string())
      throw ValidationError("config: \"output_dir\" must be a string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  cfg.resolution =
      static_cast<int>(get_num_or(root, "resolution", cfg.resolution, ""));
  if (root.contains("center"))
    cfg.center = params_from_json(root["center"], "center");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  json root{{"model", model_to_json(config.model)},
            {"bounds", bounds_to_json(config.bounds)},
            {"policy", policy_to_json(config.policy)},
            {"budget", config.budget},
            {"seed", config.seed},
            {"output_dir", config.output_dir},
            {"resolution", config.resolution}};
  if (config.center) root["center"] = params_to_json(*config.center);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << root.dump(2) << "\n";
}

std::string config_fingerprint(const ExperimentConfig& config) {
  const json j{{"model", model_to_json(config.model)},
               {"bounds", bounds_to_json(config.bounds)},
               {"policy", policy_to_json(config.policy)},
               {"seed", config.seed}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

void create_archive_file(const std::string& path, std::uint64_t seed,
                         const std::string& fingerprint) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << json{{"meta", true}, {"seed", seed}, {"fingerprint", fingerprint}}.dump()
      << "\n";
}

void append_archive(const std::string& path, const CostSample& sample) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path);
  out << sample_to_json(sample).dump() << "\n";
}

void save_archive(const Archive& archive, const std::string& path) {
  create_archive_file(path, archive.rng_seed, archive.config_fingerprint);
  std::ofstream out(path, std::ios::app);
  for (const auto& s : archive.samples) out << sample_to_json(s).dump() << "\n";
}

Archive load_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("archive: cannot open " + path);
  Archive archive;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      if (i + 1 == lines.size()) {
        std::cerr << "warning: dropping truncated final archive record in "
                  << path << "\n";
        break;
      }
      throw ValidationError("archive: corrupt record at line " +
                            std::to_string(i + 1) + " of " + path);
    }
    if (i == 0 && j.is_object() && j.value("meta", false)) {
      archive.rng_seed = j.value("seed", 0ULL);
      archive.config_fingerprint = j.value("fingerprint", "");
      continue;
    }
    archive.samples.push_back(
        sample_from_json(j, "at line " + std::to_string(i + 1) + " of " + path));
  }
  return archive;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_grid_layer(const Eigen::MatrixXd& m, const LandscapeGrid& grid,
                      const std::string& layer, const std::string& path,
                      double threshold) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto& spec = grid.spec;
  out << "# rydscape grid v1\n";
  out << "# layer: " << layer << "\n";
  out << "# provenance: "
      << (grid.provenance == GridProvenance::scanned ? "scanned" : "predicted")
      << "\n";
  out << "# varied: " << param_name(spec.varied.first) << " "
      << param_name(spec.varied.second) << "\n";
  const auto c = spec.center.as_array();
  out << "# center: " << format_full(c[0]) << " " << format_full(c[1]) << " "
      << format_full(c[2]) << " " << format_full(c[3]) << "\n";
  out << "# bounds:";
  for (int i = 0; i < 4; ++i)
    out << " " << format_full(spec.bounds.ranges[i].first) << " "
        << format_full(spec.bounds.ranges[i].second);
  out << "\n";
  out << "# resolution: " << spec.resolution << "\n";
  out << "# run_count: " << grid.run_count << "\n";
  out << "# threshold: " << format_full(threshold) << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_full(m(i, j));
    }
    out << "\n";
  }
}

}  // namespace

std::string grid_sibling_path(const std::string& path, const std::string& tag) {
  const fs::path p(path);
  fs::path sibling = p.parent_path();
  sibling /= p.stem().string() + "_" + tag + p.extension().string();
  return sibling.string();
}

void export_grid(const LandscapeGrid& grid, const std::string& path,
                 double threshold) {
  write_grid_layer(grid.values, grid,
                   grid.provenance == GridProvenance::scanned ? "scan" : "mean",
                   path, threshold);
  if (grid.has_std())
    write_grid_layer(grid.std, grid, "std", grid_sibling_path(path, "std"),
                     threshold);
  if (grid.failures.size() > 0)
    write_grid_layer(grid.failures.cast<double>(), grid, "failures",
                     grid_sibling_path(path, "failures"), threshold);
}

namespace {

struct GridFile {
  CrossSectionSpec spec;
  GridProvenance provenance;
  int run_count;
  Eigen::MatrixXd values;
};

GridFile read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("grid: cannot open " + path);
  GridFile gf;
  gf.provenance = GridProvenance::scanned;
  gf.run_count = 0;
  int resolution = -1;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError("grid: " + msg + " at line " + std::to_string(lineno) +
                          " of " + path);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string key;
      is >> key;
      if (key == "layer:" || key == "rydscape") continue;
      if (key == "provenance:") {
        std::string v;
        is >> v;
        gf.provenance =
            v == "predicted" ? GridProvenance::predicted : GridProvenance::scanned;
      } else if (key == "varied:") {
        std::string a, b;
        is >> a >> b;
        int ia = -1, ib = -1;
        for (int i = 0; i < 4; ++i) {
          if (a == param_name(i)) ia = i;
          if (b == param_name(i)) ib = i;
        }
        if (ia < 0 || ib < 0) fail("unknown varied parameter");
        gf.spec.varied = {ia, ib};
      } else if (key == "center:") {
        std::array<double, 4> c{};
        for (auto& v : c)
          if (!(is >> v)) fail("center needs 4 values");
        gf.spec.center = LaserParams::from_array(c);
      } else if (key == "bounds:") {
        for (int i = 0; i < 4; ++i)
          if (!(is >> gf.spec.bounds.ranges[i].first >>
                gf.spec.bounds.ranges[i].second))
            fail("bounds needs 8 values");
      } else if (key == "resolution:") {
        if (!(is >> resolution)) fail("bad resolution");
      } else if (key == "run_count:") {
        if (!(is >> gf.run_count)) fail("bad run_count");
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      fail("ragged matrix row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("grid: no data rows in " + path);
  if (resolution < 0) throw ValidationError("grid: missing resolution in " + path);
  if (static_cast<int>(rows.size()) != resolution ||
      static_cast<int>(rows.front().size()) != resolution)
    throw ValidationError("grid: matrix shape does not match resolution in " +
                          path);
  gf.spec.resolution = resolution;
  gf.spec.validate();
  gf.values.resize(resolution, resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) gf.values(i, j) = rows[i][j];
  return gf;
}

}  // namespace

LandscapeGrid import_grid(const std::string& path) {
  const GridFile main = read_grid_file(path);
  LandscapeGrid grid;
  grid.spec = main.spec;
  grid.provenance = main.provenance;
  grid.run_count = main.run_count;
  grid.values = main.values;
  const std::string std_path = grid_sibling_path(path, "std");
  if (fs::exists(std_path)) {
    const GridFile stdf = read_grid_file(std_path);
    require(stdf.spec == grid.spec, "grid: std layer spec mismatch for " + path);
    grid.std = stdf.values;
  }
  const std::string fail_path = grid_sibling_path(path, "failures");
  if (fs::exists(fail_path)) {
    const GridFile ff = read_grid_file(fail_path);
    require(ff.spec == grid.spec, "grid: failure mask spec mismatch for " + path);
    grid.failures = ff.values.cast<std::uint8_t>();
  }
  return grid;
}

void export_contour(const std::vector<ContourSegment>& segments,
                    const std::string& path, double threshold) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# rydscape contour v1\n";
  out << "# threshold: " << format_full(threshold) << "\n";
  out << "# columns: x0,y0,x1,y1\n";
  for (const auto& s : segments)
    out << format_full(s.x0) << "," << format_full(s.y0) << ","
        << format_full(s.x1) << "," << format_full(s.y1) << "\n";
}

void export_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int k = static_cast<int>(traj.populations.cols());
  out << "# rydscape trajectory v1\n# columns: t";
  for (int j = 0; j < k; ++j) out << ",p_phi_" << (j + 1);
  out << ",re_rho01,im_rho01,D\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_full(traj.times[i]);
    for (int j = 0; j < k; ++j)
      out << "," << format_full(traj.populations(static_cast<Eigen::Index>(i), j));
    out << "," << format_full(traj.coherence[i].real()) << ","
        << format_full(traj.coherence[i].imag()) << ","
        << format_full(traj.costs[i]) << "\n";
  }
}

void export_measures(const std::vector<MeasureRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# rydscape measures v1\n";
  out << "# columns: run_count,accuracy,accuracy_lowcost,penalty,precision,"
         "precision_lowcost,absolute_convergence,best_cost\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? format_full(*v) : std::string("nan");
  };
  for (const auto& r : records) {
    out << r.run_count << "," << cell(r.accuracy) << ","
        << cell(r.accuracy_lowcost) << "," << cell(r.penalty) << ","
        << format_full(r.precision) << "," << cell(r.precision_lowcost) << ","
        << cell(r.absolute_convergence) << "," << format_full(r.best_cost)
        << "\n";
  }
}

void save_snapshot(const SessionSnapshot& snapshot, const std::string& path) {
  json model{{"prior_mean", snapshot.model.prior_mean},
             {"hyper", hyper_to_json(snapshot.model.hyper)}};
  std::vector<std::vector<double>> tx(snapshot.model.train_x.rows());
  for (Eigen::Index i = 0; i < snapshot.model.train_x.rows(); ++i) {
    tx[i].resize(snapshot.model.train_x.cols());
    for (Eigen::Index j = 0; j < snapshot.model.train_x.cols(); ++j)
      tx[i][j] = snapshot.model.train_x(i, j);
  }
  model["train_x"] = tx;
  model["train_y"] = std::vector<double>(
      snapshot.model.train_y.data(),
      snapshot.model.train_y.data() + snapshot.model.train_y.size());

  json arch{{"seed", snapshot.archive.rng_seed},
            {"fingerprint", snapshot.archive.config_fingerprint}};
  json samples = json::array();
  for (const auto& s : snapshot.archive.samples) samples.push_back(sample_to_json(s));
  arch["samples"] = samples;

  const json root{{"fingerprint", snapshot.fingerprint},
                  {"run_count", snapshot.run_count},
                  {"archive", arch},
                  {"model", model}};
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << root.dump() << "\n";
}

SessionSnapshot load_snapshot(const std::string& path,
                              const std::string& expected_fingerprint) {
  std::ifstream in(path);
  if (!in) throw ValidationError("snapshot: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ValidationError("snapshot: parse error in " + path + ": " + e.what());
  }
  SessionSnapshot snap;
  snap.fingerprint = root.at("fingerprint").get<std::string>();
  if (!expected_fingerprint.empty() && snap.fingerprint != expected_fingerprint)
    throw ValidationError(
        "snapshot: config fingerprint mismatch (snapshot " + snap.fingerprint +
        ", expected " + expected_fingerprint + "); refusing to load " + path);
  snap.run_count = root.at("run_count").get<int>();
  const json& arch = root.at("archive");
  snap.archive.rng_seed = arch.value("seed", 0ULL);
  snap.archive.config_fingerprint = arch.value("fingerprint", "");
  for (const auto& j : arch.at("samples"))
    snap.archive.samples.push_back(sample_from_json(j, "in snapshot " + path));

  const json& model = root.at("model");
  const auto tx = model.at("train_x").get<std::vector<std::vector<double>>>();
  const auto ty = model.at("train_y").get<std::vector<double>>();
  require(!tx.empty() && tx.size() == ty.size(),
          "snapshot: malformed training set in " + path);
  Eigen::MatrixXd x(tx.size(), tx.front().size());
  for (std::size_t i = 0; i < tx.size(); ++i)
    for (std::size_t j = 0; j < tx[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = tx[i][j];
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(ty.data(), static_cast<Eigen::Index>(ty.size()));
  snap.model = fit(x, y, hyper_from_json(model.at("hyper")));
  return snap;
}

std::string snapshot_path(const std::string& session_dir, int run_count) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%07d.json", run_count);
  return (fs::path(session_dir) / "snapshots" / buf).string();
}

std::vector<int> list_snapshot_runs(const std::string& session_dir) {
  std::vector<int> runs;
  const fs::path dir = fs::path(session_dir) / "snapshots";
  if (!fs::exists(dir)) return runs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int rc = 0;
    if (std::sscanf(name.c_str(), "snapshot_%d.json", &rc) == 1) runs.push_back(rc);
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

SessionLock::SessionLock(const std::string& dir) {
  fs::create_directories(dir);
  path_ = fs::path(dir) / ".lock";
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr)
    throw std::runtime_error(
        "session directory is locked by another writer: " + path_.string() +
        " (remove the lock file if no session is running)");
  std::fprintf(f, "%d\n", static_cast<int>(::getpid()));
  std::fclose(f);
}

SessionLock::~SessionLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace rydscape
