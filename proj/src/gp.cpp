#include "rydscape/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rydscape/neldermead.hpp"

namespace rydscape {

namespace {

constexpr double kDedupDistance = 1e-9;
constexpr double kJitterFloor = 1e-10;
constexpr double kJitterCeil = 1e-6;
constexpr double kLog2Pi = 1.8378770664093454836;

/// Merge training points closer than kDedupDistance, averaging their
/// observations; a deterministic simulator makes repeats uninformative and
/// they make K singular at the noise floor.
void deduplicate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 Eigen::MatrixXd& x_out, Eigen::VectorXd& y_out) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> group(n, -1);
  std::vector<int> heads;
  std::vector<int> counts;
  for (int i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < heads.size(); ++g) {
      if ((x.row(i) - x.row(heads[g])).norm() < kDedupDistance) {
        group[i] = static_cast<int>(g);
        break;
      }
    }
    if (group[i] < 0) {
      group[i] = static_cast<int>(heads.size());
      heads.push_back(i);
      counts.push_back(0);
    }
    ++counts[group[i]];
  }
  const int m = static_cast<int>(heads.size());
  x_out.resize(m, x.cols());
  y_out = Eigen::VectorXd::Zero(m);
  for (int g = 0; g < m; ++g) x_out.row(g) = x.row(heads[g]);
  for (int i = 0; i < n; ++i) y_out(group[i]) += y(i);
  for (int g = 0; g < m; ++g) y_out(g) /= counts[g];
}

Eigen::MatrixXd scaled_inputs(const Eigen::MatrixXd& x,
                              const KernelHyperparams& hyper) {
  return x * hyper.length_scales.cwiseInverse().asDiagonal();
}

/// Dense kernel matrix via the Gram-matrix squared-distance identity.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& xs_scaled,
                              const KernelHyperparams& hyper) {
  const Eigen::VectorXd sq = xs_scaled.rowwise().squaredNorm();
  Eigen::MatrixXd k = -2.0 * (xs_scaled * xs_scaled.transpose());
  k.colwise() += sq;
  k.rowwise() += sq.transpose();
  k = (-0.5 * k.cwiseMax(0.0)).array().exp().matrix() * hyper.signal_variance;
  return k;
}

/// Cross-kernel between training inputs and query points (both pre-scaled).
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& train_scaled,
                             const Eigen::MatrixXd& query_scaled,
                             const KernelHyperparams& hyper) {
  const Eigen::VectorXd sq_a = train_scaled.rowwise().squaredNorm();
  const Eigen::VectorXd sq_b = query_scaled.rowwise().squaredNorm();
  Eigen::MatrixXd k = -2.0 * (train_scaled * query_scaled.transpose());
  k.colwise() += sq_a;
  k.rowwise() += sq_b.transpose();
  k = (-0.5 * k.cwiseMax(0.0)).array().exp().matrix() * hyper.signal_variance;
  return k;
}

/// Cholesky of K + (noise + jitter) I with multiplicative jitter escalation.
bool factorize(const Eigen::MatrixXd& k, double noise, Eigen::MatrixXd& lower,
               double& jitter_used) {
  const int n = static_cast<int>(k.rows());
  for (double jitter = kJitterFloor; jitter <= kJitterCeil * 1.0001;
       jitter *= 100.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      jitter_used = jitter;
      return true;
    }
    (void)n;
  }
  return false;
}

double lml_from_factor(const Eigen::MatrixXd& lower, const Eigen::VectorXd& alpha,
                       const Eigen::VectorXd& y_centered) {
  const double n = static_cast<double>(y_centered.size());
  return -0.5 * y_centered.dot(alpha) - lower.diagonal().array().log().sum() -
         0.5 * n * kLog2Pi;
}

}  // namespace

double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              const KernelHyperparams& hyper) {
  hyper.validate();
  require(x.size() == y.size() && x.size() == hyper.length_scales.size(),
          "kernel: dimension mismatch");
  const double sq = ((x - y).cwiseQuotient(hyper.length_scales)).squaredNorm();
  return hyper.signal_variance * std::exp(-0.5 * sq);
}

GPModel fit(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
            const KernelHyperparams& hyper, bool center) {
  require(train_x.rows() >= 1, "fit: at least one training point required");
  require(train_x.rows() == train_y.size(), "fit: x/y size mismatch");
  hyper.validate();
  require(hyper.length_scales.size() == train_x.cols(),
          "fit: hyperparameter dimension mismatch");

  GPModel model;
  deduplicate(train_x, train_y, model.train_x, model.train_y);
  model.hyper = hyper;
  model.hyper.noise_variance = std::max(hyper.noise_variance, kJitterFloor);
  model.prior_mean = center ? model.train_y.mean() : 0.0;

  const Eigen::MatrixXd xs = scaled_inputs(model.train_x, model.hyper);
  const Eigen::MatrixXd k = kernel_matrix(xs, model.hyper);
  if (!factorize(k, model.hyper.noise_variance, model.chol_lower, model.jitter))
    throw std::runtime_error(
        "fit: covariance factorization failed even at jitter 1e-6; "
        "training set is too ill-conditioned");
  const Eigen::VectorXd yc = model.train_y.array() - model.prior_mean;
  model.alpha = model.chol_lower.triangularView<Eigen::Lower>().solve(yc);
  model.chol_lower.triangularView<Eigen::Lower>().transpose().solveInPlace(
      model.alpha);
  return model;
}

Prediction predict(const GPModel& model, const Eigen::VectorXd& x) {
  require(x.size() == model.dim(), "predict: dimension mismatch");
  Eigen::VectorXd mean(1), std(1);
  predict_batch(model, x.transpose(), mean, std);
  return Prediction{mean(0), std(0)};
}

void predict_batch(const GPModel& model, const Eigen::MatrixXd& xs,
                   Eigen::VectorXd& mean, Eigen::VectorXd& std) {
  require(xs.cols() == model.dim(), "predict_batch: dimension mismatch");
  const Eigen::MatrixXd train_scaled = scaled_inputs(model.train_x, model.hyper);
  const Eigen::MatrixXd query_scaled = scaled_inputs(xs, model.hyper);
  const Eigen::MatrixXd kstar =
      cross_kernel(train_scaled, query_scaled, model.hyper);  // n x m
  mean = kstar.transpose() * model.alpha;
  mean.array() += model.prior_mean;
  const Eigen::MatrixXd v =
      model.chol_lower.triangularView<Eigen::Lower>().solve(kstar);
  std = (model.hyper.signal_variance - v.colwise().squaredNorm().transpose().array())
            .cwiseMax(0.0)
            .sqrt();
}

double log_marginal_likelihood(const GPModel& model) {
  const Eigen::VectorXd yc = model.train_y.array() - model.prior_mean;
  return lml_from_factor(model.chol_lower, model.alpha, yc);
}

HyperFitResult optimize_hyperparameters(const Eigen::MatrixXd& train_x,
                                        const Eigen::VectorXd& train_y,
                                        const HyperFitOptions& opts) {
  require(train_x.rows() >= 2, "optimize_hyperparameters: need >= 2 points");
  require(train_x.rows() == train_y.size(),
          "optimize_hyperparameters: x/y size mismatch");
  const int d = static_cast<int>(train_x.cols());

  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  deduplicate(train_x, train_y, x, y);
  const double prior_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - prior_mean;
  const int n = static_cast<int>(x.rows());

  // theta = [log l_1..d, log signal_variance, log noise_variance]
  Eigen::VectorXd lo(d + 2), hi(d + 2);
  for (int i = 0; i < d; ++i) {
    lo(i) = std::log(opts.length_scale_min);
    hi(i) = std::log(opts.length_scale_max);
  }
  lo(d) = std::log(opts.signal_variance_min);
  hi(d) = std::log(opts.signal_variance_max);
  lo(d + 1) = std::log(opts.noise_variance_min);
  hi(d + 1) = std::log(opts.noise_variance_max);

  auto unpack = [&](const Eigen::VectorXd& theta) {
    KernelHyperparams h;
    h.length_scales = theta.head(d).array().exp();
    h.signal_variance = std::exp(theta(d));
    h.noise_variance = std::exp(theta(d + 1));
    return h;
  };

  auto neg_lml = [&](const Eigen::VectorXd& theta) -> double {
    const KernelHyperparams h = unpack(theta);
    const Eigen::MatrixXd xs = scaled_inputs(x, h);
    const Eigen::MatrixXd k = kernel_matrix(xs, h);
    Eigen::MatrixXd lower;
    double jitter = 0.0;
    if (!factorize(k, h.noise_variance, lower, jitter)) return 1e300;
    Eigen::VectorXd alpha = lower.triangularView<Eigen::Lower>().solve(yc);
    lower.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);
    return -lml_from_factor(lower, alpha, yc);
  };

  // default start: mid-range length scales, data-variance signal, small noise
  const double yvar = (yc.squaredNorm() / std::max(1, n - 1));
  Eigen::VectorXd theta0(d + 2);
  theta0.head(d).setConstant(std::log(0.25));
  theta0(d) = std::log(std::min(std::max(yvar, opts.signal_variance_min * 10),
                                opts.signal_variance_max));
  theta0(d + 1) = std::log(1e-6);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals_per_start;
  nm.init_scale = 0.08;

  HyperFitResult result;
  double best_f = 1e301;
  bool any_improved = false;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    Eigen::VectorXd start(d + 2);
    if (s == 0 && opts.warm_start != nullptr) {
      const auto& w = *opts.warm_start;
      for (int i = 0; i < d; ++i) start(i) = std::log(w.length_scales(i));
      start(d) = std::log(std::max(w.signal_variance, opts.signal_variance_min));
      start(d + 1) = std::log(std::max(w.noise_variance, opts.noise_variance_min));
      for (int i = 0; i < d + 2; ++i)
        start(i) = std::min(std::max(start(i), lo(i)), hi(i));
    } else if (s == 0) {
      start = theta0;
    } else {
      for (int i = 0; i < d + 2; ++i) start(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    }
    const double f_start = neg_lml(start);
    const NelderMeadResult r = nelder_mead(neg_lml, start, lo, hi, nm);
    if (r.f < f_start - 1e-12) any_improved = true;
    if (r.f < best_f) {
      best_f = r.f;
      result.hyper = unpack(r.x);
    }
    if (f_start < best_f) {
      best_f = f_start;
      result.hyper = unpack(start);
    }
  }
  result.log_marginal = -best_f;
  result.improved = any_improved;
  return result;
}

}  // namespace rydscape
