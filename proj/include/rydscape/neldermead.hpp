#pragma once

#include <Eigen/Dense>
#include <functional>

namespace rydscape {

struct NelderMeadOptions {
  int max_evals = 200;
  double init_scale = 0.1;  // initial simplex edge, as a fraction of (hi - lo)
  double f_tol = 1e-12;
  double x_tol = 1e-10;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
};

/// Box-constrained Nelder-Mead simplex descent; candidates are clamped to
/// [lo, hi] before evaluation.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi,
                             const NelderMeadOptions& opts = {});

}  // namespace rydscape
