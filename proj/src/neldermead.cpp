#include "rydscape/neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rydscape {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi,
                             const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  int evals = 0;
  auto clamp = [&](Eigen::VectorXd x) {
    for (int i = 0; i < n; ++i) x(i) = std::min(std::max(x(i), lo(i)), hi(i));
    return x;
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
  };

  std::vector<Eigen::VectorXd> pts(n + 1);
  std::vector<double> vals(n + 1);
  pts[0] = clamp(x0);
  vals[0] = eval(pts[0]);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p = pts[0];
    double step = opts.init_scale * (hi(i) - lo(i));
    if (p(i) + step > hi(i)) step = -step;
    p(i) += step;
    pts[i + 1] = clamp(p);
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<int> order(n + 1);
  while (evals < opts.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    // convergence: simplex collapsed in value and extent
    double spread = 0.0;
    for (int i = 1; i <= n; ++i)
      spread = std::max(spread, (pts[order[i]] - pts[best]).cwiseAbs().maxCoeff());
    if (std::abs(vals[worst] - vals[best]) < opts.f_tol && spread < opts.x_tol)
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    const Eigen::VectorXd reflected = clamp(centroid + (centroid - pts[worst]));
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded =
          clamp(centroid + 2.0 * (centroid - pts[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
    } else {
      const Eigen::VectorXd contracted =
          clamp(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = eval(contracted);
      if (fc < vals[worst]) {
        pts[worst] = contracted;
        vals[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = clamp(pts[best] + 0.5 * (pts[i] - pts[best]));
          vals[i] = eval(pts[i]);
          if (evals >= opts.max_evals) break;
        }
      }
    }
  }

  NelderMeadResult result;
  const int best = static_cast<int>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  result.x = pts[best];
  result.f = vals[best];
  result.evals = evals;
  return result;
}

}  // namespace rydscape
