#include "rydscape/explorer.hpp"

#include <algorithm>
#include <cmath>

#include "rydscape/neldermead.hpp"

namespace rydscape {

namespace {

// positional random-stream salts
constexpr std::uint64_t kStreamProposal = 0x70726f70ULL;
constexpr std::uint64_t kStreamHyper = 0x68797065ULL;

LaserParams uniform_draw(const Bounds& bounds, std::mt19937_64& rng) {
  std::array<double, 4> a{};
  for (int i = 0; i < 4; ++i) {
    std::uniform_real_distribution<double> dist(bounds.ranges[i].first,
                                                bounds.ranges[i].second);
    a[i] = dist(rng);
  }
  return LaserParams::from_array(a);
}

}  // namespace

LaserParams propose_next(const GPModel* model, const Bounds& bounds,
                         const AcquisitionPolicy& policy, int run_index,
                         std::mt19937_64& rng) {
  bounds.validate();
  policy.validate();
  const bool no_model = model == nullptr || model->size() == 0;
  const bool interleave = policy.random_interleave > 0 &&
                          run_index % policy.random_interleave == 0;
  if (no_model || run_index < policy.n_init || interleave)
    return uniform_draw(bounds, rng);

  const double b = policy.bias_cycle[run_index % policy.bias_cycle.size()];
  auto acquisition = [&](const Eigen::VectorXd& u) {
    const Prediction p = predict(*model, u);
    return (1.0 - b) * p.mean - b * p.std;
  };

  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd hi = Eigen::VectorXd::Ones(4);
  NelderMeadOptions nm;
  nm.max_evals = policy.acq_evals;
  nm.init_scale = 0.1;

  Eigen::Index best_row = 0;
  model->train_y.minCoeff(&best_row);

  Eigen::VectorXd best_u;
  double best_f = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < policy.multistart; ++s) {
    Eigen::VectorXd start(4);
    if (s == 0) {
      start = model->train_x.row(best_row).transpose();
    } else {
      for (int i = 0; i < 4; ++i) start(i) = unit(rng);
    }
    const NelderMeadResult r = nelder_mead(acquisition, start, lo, hi, nm);
    if (r.f < best_f) {
      best_f = r.f;
      best_u = r.x;
    }
  }

  std::array<double, 4> u{};
  for (int i = 0; i < 4; ++i) u[i] = best_u(i);
  return bounds.clip(bounds.denormalize(u));
}

Archive run_loop(const CostOracle& oracle, const Bounds& bounds,
                 const AcquisitionPolicy& policy, int budget, std::uint64_t seed,
                 const RunHooks& hooks, const ResumeState* resume,
                 const std::string& config_fingerprint) {
  bounds.validate();
  policy.validate();
  require(budget >= 1, "run_loop: budget must be >= 1");

  Archive archive;
  archive.rng_seed = seed;
  archive.config_fingerprint = config_fingerprint;
  KernelHyperparams hyper;
  hyper.length_scales = Eigen::VectorXd::Constant(4, 0.25);
  hyper.signal_variance = 0.05;
  hyper.noise_variance = 1e-8;
  if (resume != nullptr) {
    archive = resume->archive;
    if (resume->hyper) hyper = *resume->hyper;
  }
  require(static_cast<int>(archive.samples.size()) <= budget,
          "run_loop: resume archive already exceeds budget");

  // normalized training set mirrors the archive
  Eigen::MatrixXd x(budget, 4);
  Eigen::VectorXd y(budget);
  for (std::size_t i = 0; i < archive.samples.size(); ++i) {
    const auto u = bounds.normalize(archive.samples[i].params);
    for (int j = 0; j < 4; ++j) x(static_cast<Eigen::Index>(i), j) = u[j];
    y(static_cast<Eigen::Index>(i)) = archive.samples[i].cost;
  }

  GPModel model;
  bool have_model = false;
  if (!archive.samples.empty()) {
    const auto n = static_cast<Eigen::Index>(archive.samples.size());
    model = fit(x.topRows(n), y.head(n), hyper);
    have_model = true;
  }

  for (int run = static_cast<int>(archive.samples.size()); run < budget; ++run) {
    std::mt19937_64 rng(derive_seed(seed, kStreamProposal, run));
    const LaserParams params =
        propose_next(have_model ? &model : nullptr, bounds, policy, run, rng);

    CostSample sample;
    try {
      sample = oracle(params);
      sample.params = params;
      sample.cost = std::min(std::max(sample.cost, 0.0), 1.0);
    } catch (const std::exception&) {
      sample.params = params;
      sample.cost = 1.0;  // metric maximum keeps the surrogate defined
      sample.failed = true;
    }
    archive.samples.push_back(sample);
    if (hooks.on_sample) hooks.on_sample(sample, run);

    const int n = run + 1;
    const auto u = bounds.normalize(params);
    for (int j = 0; j < 4; ++j) x(n - 1, j) = u[j];
    y(n - 1) = sample.cost;

    if (n >= 2 && (n <= 200 || n % 5 == 0)) {
      HyperFitOptions opts;
      opts.seed = derive_seed(seed, kStreamHyper, run);
      opts.warm_start = &hyper;
      // full multistart while refits are cheap; afterwards lean on the warm
      // start since the optimum moves slowly with n
      opts.starts = n <= 200 ? policy.hyper_starts : std::min(policy.hyper_starts, 2);
      opts.max_evals_per_start =
          n <= 200 ? policy.hyper_max_evals : std::max(8, policy.hyper_max_evals / 2);
      hyper = optimize_hyperparameters(x.topRows(n), y.head(n), opts).hyper;
    }
    model = fit(x.topRows(n), y.head(n), hyper);
    have_model = true;

    if (hooks.on_snapshot && hooks.snapshot_every > 0 &&
        (n % hooks.snapshot_every == 0 || n == budget))
      hooks.on_snapshot(archive, model, n);
  }
  return archive;
}

Archive run_loop(const ModelConfig& config, const Bounds& bounds,
                 const AcquisitionPolicy& policy, int budget, std::uint64_t seed,
                 const RunHooks& hooks, const ResumeState* resume,
                 const std::string& config_fingerprint) {
  config.validate();
  return run_loop(
      [&config](const LaserParams& p) { return evaluate_cost(p, config); }, bounds,
      policy, budget, seed, hooks, resume, config_fingerprint);
}

std::pair<LaserParams, double> best_cost(const Archive& archive) {
  require(!archive.samples.empty(), "best_cost: archive is empty");
  const auto it = std::min_element(
      archive.samples.begin(), archive.samples.end(),
      [](const CostSample& a, const CostSample& b) { return a.cost < b.cost; });
  return {it->params, it->cost};
}

bool stopping_check(
    const std::vector<std::optional<double>>& precision_lowcost_history,
    double threshold) {
  const auto n = precision_lowcost_history.size();
  if (n < 2) return false;
  const auto& a = precision_lowcost_history[n - 2];
  const auto& b = precision_lowcost_history[n - 1];
  return a.has_value() && b.has_value() && *a <= threshold && *b <= threshold;
}

}  // namespace rydscape
