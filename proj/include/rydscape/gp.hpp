#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "rydscape/util.hpp"

namespace rydscape {

/// Squared-exponential ARD kernel parameters: one length scale per input
/// dimension, a signal variance, and an observation-noise variance.
struct KernelHyperparams {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;
  double noise_variance = 1e-8;

  void validate() const {
    require(std::isfinite(signal_variance) && signal_variance >= 0.0,
            "KernelHyperparams: signal_variance must be >= 0");
    require(length_scales.size() > 0 && (length_scales.array() > 0.0).all(),
            "KernelHyperparams: length_scales must be positive");
    require(std::isfinite(noise_variance) && noise_variance >= 0.0,
            "KernelHyperparams: noise_variance must be >= 0");
  }
};

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

/// Fitted Gaussian-process regressor over inputs normalized to the unit
/// hypercube. Holds the (deduplicated) training set, the lower Cholesky
/// factor of K + noise I, and the precomputed solve against the centered
/// observations. Immutable once fitted.
struct GPModel {
  Eigen::MatrixXd train_x;  // n x d
  Eigen::VectorXd train_y;  // raw observations, n
  double prior_mean = 0.0;
  KernelHyperparams hyper;
  Eigen::MatrixXd chol_lower;  // L with L L^T = K + (noise + jitter) I
  Eigen::VectorXd alpha;       // (K + noise I)^{-1} (y - prior_mean)
  double jitter = 0.0;

  int size() const { return static_cast<int>(train_x.rows()); }
  int dim() const { return static_cast<int>(train_x.cols()); }
};

/// k(x, y) = signal_variance * exp(-1/2 sum_d ((x_d - y_d)/l_d)^2)
double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              const KernelHyperparams& hyper);

/// Builds the model: deduplicates inputs closer than 1e-9 (averaging their
/// observations), centers y on its mean (unless center = false), factorizes
/// K + noise I with jitter escalation from 1e-10 to 1e-6 on failure.
GPModel fit(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
            const KernelHyperparams& hyper, bool center = true);

Prediction predict(const GPModel& model, const Eigen::VectorXd& x);

/// Column-batched prediction; identical to point-wise predict.
void predict_batch(const GPModel& model, const Eigen::MatrixXd& xs,
                   Eigen::VectorXd& mean, Eigen::VectorXd& std);

/// log p(y | X, hyper) = -1/2 y^T alpha - sum_i log L_ii - n/2 log 2 pi,
/// with y centered on the model's prior mean.
double log_marginal_likelihood(const GPModel& model);

struct HyperFitOptions {
  int starts = 8;
  int max_evals_per_start = 120;
  std::uint64_t seed = 0;
  // log-space search box, normalized coordinates
  double length_scale_min = 1e-2, length_scale_max = 1e2;
  double signal_variance_min = 1e-4, signal_variance_max = 1e2;
  double noise_variance_min = 1e-10, noise_variance_max = 1e-2;
  // optional warm start used as the first multistart point
  const KernelHyperparams* warm_start = nullptr;
};

struct HyperFitResult {
  KernelHyperparams hyper;
  double log_marginal = 0.0;
  bool improved = false;  // false when no start improved on its initial point
};

/// Maximizes the log marginal likelihood by multistart Nelder-Mead descent in
/// log-space within the option bounds.
HyperFitResult optimize_hyperparameters(const Eigen::MatrixXd& train_x,
                                        const Eigen::VectorXd& train_y,
                                        const HyperFitOptions& opts = {});

}  // namespace rydscape
