#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rydscape/gp.hpp"
#include "rydscape/params.hpp"
#include "rydscape/propagator.hpp"

namespace rydscape {

/// Proposal policy for the active-learning loop. Proposals alternate between
/// random draws (the first n_init runs and every random_interleave-th run)
/// and minimizing the biased acquisition (1-b) mean - b std, with b cycling
/// through bias_cycle.
struct AcquisitionPolicy {
  std::vector<double> bias_cycle{0.0, 0.25, 0.5, 0.75, 1.0};
  int n_init = 10;
  int random_interleave = 20;
  int multistart = 32;
  int acq_evals = 200;      // local-search budget per acquisition start
  int hyper_starts = 8;     // multistarts for hyperparameter refits
  int hyper_max_evals = 120;

  void validate() const {
    require(!bias_cycle.empty(), "AcquisitionPolicy: bias_cycle must be non-empty");
    for (double b : bias_cycle)
      require(b >= 0.0 && b <= 1.0, "AcquisitionPolicy: biases must be in [0,1]");
    require(n_init >= 1, "AcquisitionPolicy: n_init must be >= 1");
    require(random_interleave >= 0,
            "AcquisitionPolicy: random_interleave must be >= 0");
    require(multistart >= 1, "AcquisitionPolicy: multistart must be >= 1");
    require(acq_evals >= 8, "AcquisitionPolicy: acq_evals must be >= 8");
    require(hyper_starts >= 1, "AcquisitionPolicy: hyper_starts must be >= 1");
    require(hyper_max_evals >= 8,
            "AcquisitionPolicy: hyper_max_evals must be >= 8");
  }
};

/// Append-only record of evaluated runs plus the seed and config fingerprint
/// that produced them.
struct Archive {
  std::vector<CostSample> samples;
  std::uint64_t rng_seed = 0;
  std::string config_fingerprint;
};

using CostOracle = std::function<CostSample(const LaserParams&)>;

/// Next parameters to evaluate. Random draws before a model exists, during
/// the init phase and on interleave runs; otherwise multistart descent of the
/// biased acquisition over the normalized cube (seeded from random points
/// plus the incumbent best training point), clipped back to bounds.
LaserParams propose_next(const GPModel* model, const Bounds& bounds,
                         const AcquisitionPolicy& policy, int run_index,
                         std::mt19937_64& rng);

struct RunHooks {
  int snapshot_every = 20;
  std::function<void(const Archive&, const GPModel&, int)> on_snapshot;
  std::function<void(const CostSample&, int)> on_sample;  // after each run
};

/// Prior state when continuing a persisted session.
struct ResumeState {
  Archive archive;
  std::optional<KernelHyperparams> hyper;
};

/// The active-learning loop against an arbitrary oracle: propose, evaluate,
/// append, refit. Failed evaluations are recorded with the sentinel cost 1
/// and flagged, never aborting the loop. Deterministic in (seed, policy,
/// bounds, budget): the random streams are positional, so resuming from an
/// archive prefix reproduces the uninterrupted session.
Archive run_loop(const CostOracle& oracle, const Bounds& bounds,
                 const AcquisitionPolicy& policy, int budget, std::uint64_t seed,
                 const RunHooks& hooks = {}, const ResumeState* resume = nullptr,
                 const std::string& config_fingerprint = {});

/// Convenience wrapper binding the Lindblad cost oracle for `config`.
Archive run_loop(const ModelConfig& config, const Bounds& bounds,
                 const AcquisitionPolicy& policy, int budget, std::uint64_t seed,
                 const RunHooks& hooks = {}, const ResumeState* resume = nullptr,
                 const std::string& config_fingerprint = {});

/// Lowest-cost sample; ties broken by earliest run.
std::pair<LaserParams, double> best_cost(const Archive& archive);

/// True (= stop) when the last two low-cost precision records are both at or
/// below the threshold. Absolute convergence is deliberately not consulted:
/// it fluctuates too much on single routine instances to gate on.
bool stopping_check(
    const std::vector<std::optional<double>>& precision_lowcost_history,
    double threshold = 0.16);

}  // namespace rydscape
