#include "rydscape/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace rydscape {

namespace {

using Cplx = std::complex<double>;
using SparseCd = Eigen::SparseMatrix<Cplx>;

constexpr Cplx kMinusI{0.0, -1.0};
constexpr Cplx kPlusI{0.0, 1.0};

std::string format_params(const LaserParams& p) {
  std::ostringstream os;
  os << "(omega_p=" << p.omega_p << ", omega_c=" << p.omega_c
     << ", delta_p=" << p.delta_p << ", delta_c=" << p.delta_c << ")";
  return os.str();
}

}  // namespace

LindbladGenerator::LindbladGenerator(const Eigen::MatrixXcd& h,
                                     const std::vector<Eigen::MatrixXcd>& jumps)
    : dim_(h.rows()) {
  require(h.rows() == h.cols(), "LindbladGenerator: h must be square");
  h_ = h.sparseView();
  h_.makeCompressed();
  Eigen::MatrixXcd n_half = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& l : jumps) {
    require(l.rows() == dim_ && l.cols() == dim_,
            "LindbladGenerator: jump operator dimension mismatch");
    jumps_.push_back(l.sparseView());
    jumps_.back().makeCompressed();
    jumps_adj_.push_back(Eigen::MatrixXcd(l.adjoint()).sparseView());
    jumps_adj_.back().makeCompressed();
    n_half.noalias() += 0.5 * (l.adjoint() * l);
  }
  n_half_ = n_half.sparseView();
  n_half_.makeCompressed();
}

void LindbladGenerator::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out,
                              Eigen::MatrixXcd& work) const {
  // -i [h, rho] = -i (A - A^+) with A = h rho, since h is Hermitian
  work.noalias() = h_ * rho;
  out = kMinusI * work;
  out.noalias() += kPlusI * work.adjoint();
  // -1/2 {sum L^+ L, rho}
  work.noalias() = n_half_ * rho;
  out -= work;
  out -= work.adjoint();
  // sum_a L_a rho L_a^+
  for (std::size_t a = 0; a < jumps_.size(); ++a) {
    work.noalias() = jumps_[a] * rho;
    out.noalias() += work * jumps_adj_[a];
  }
}

Eigen::MatrixXcd liouvillian_apply(const Eigen::MatrixXcd& h,
                                   const std::vector<Eigen::MatrixXcd>& jumps,
                                   const Eigen::MatrixXcd& rho) {
  require(rho.rows() == h.rows() && rho.cols() == h.cols(),
          "liouvillian_apply: dimension mismatch");
  LindbladGenerator gen(h, jumps);
  Eigen::MatrixXcd out(rho.rows(), rho.cols());
  Eigen::MatrixXcd work(rho.rows(), rho.cols());
  gen.apply(rho, out, work);
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double kC[7] = {0.0,    1.0 / 5, 3.0 / 10, 4.0 / 5,
                          8.0 / 9, 1.0,     1.0};
constexpr double kA2[1] = {1.0 / 5};
constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                           -212.0 / 729};
constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                           49.0 / 176, -5103.0 / 18656};
constexpr double kB[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                          -2187.0 / 6784, 11.0 / 84};
// b - bhat: weights of the embedded error estimate
constexpr double kE[7] = {71.0 / 57600,  0.0,          -71.0 / 16695,
                          71.0 / 1920,   -17253.0 / 339200,
                          22.0 / 525,    -1.0 / 40};

/// Dormand-Prince 5(4) on the vectorized density matrix with elementwise
/// error weighting and Hermitian cleanup after each accepted step.
class AdaptiveIntegrator {
 public:
  AdaptiveIntegrator(const LindbladGenerator& gen, Eigen::MatrixXcd y0, double tol)
      : gen_(gen), y_(std::move(y0)), tol_(tol), t_(0.0) {
    require(tol > 0.0, "propagate: tolerance must be > 0");
    const long d = gen.dim();
    require(y_.rows() == d && y_.cols() == d, "propagate: state dimension mismatch");
    for (auto& k : k_) k.resize(d, d);
    ytmp_.resize(d, d);
    yerr_.resize(d, d);
    work_.resize(d, d);
    trace0_ = y_.trace().real();
    gen_.apply(y_, k_[0], work_);  // FSAL seed
  }

  double time() const { return t_; }
  const Eigen::MatrixXcd& state() const { return y_; }

  void advance_to(double t_target) {
    require(t_target >= t_ - 1e-15, "propagate: target time is in the past");
    if (t_target <= t_) return;
    if (h_ <= 0.0) h_ = initial_step(t_target - t_);
    long accepted = 0;
    while (t_ < t_target) {
      const double h_min = 1e-14 * std::max(1.0, t_target);
      bool clipped = false;
      double h = h_;
      if (t_ + h >= t_target) {
        h = t_target - t_;
        clipped = true;
      }
      if (h < h_min)
        throw PropagationError(
            "integrator step size underflow (stiffness) at t=" + std::to_string(t_));

      const double err = attempt_step(h);
      if (err <= 1.0) {
        t_ += h;
        // symmetrize: the exact flow preserves Hermiticity, so this only
        // removes roundoff drift
        y_ = 0.5 * ytmp_;
        y_.noalias() += 0.5 * ytmp_.adjoint();
        std::swap(k_[0], k_[6]);  // FSAL
        const double fac =
            std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-300, -0.2)));
        if (!clipped) h_ = h * fac;
        ++accepted;
        if (std::abs(y_.trace().real() - trace0_) >
            std::max(1e-6, 1e3 * tol_) * std::max(1.0, std::abs(trace0_)))
          throw PropagationError("trace drift beyond tolerance at t=" +
                                 std::to_string(t_));
        if (accepted % 256 == 0 && !y_.allFinite())
          throw PropagationError("non-finite state at t=" + std::to_string(t_));
      } else {
        const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
        h_ = h * fac;
      }
    }
    if (!y_.allFinite())
      throw PropagationError("non-finite state at t=" + std::to_string(t_));
  }

 private:
  // One trial step of size h from (t_, y_); fills ytmp_ with the 5th-order
  // result and k_[6] with f(ytmp_); returns the scaled error norm.
  double attempt_step(double h) {
    stage(ytmp_, h, kA2, 1);
    gen_.apply(ytmp_, k_[1], work_);
    stage(ytmp_, h, kA3, 2);
    gen_.apply(ytmp_, k_[2], work_);
    stage(ytmp_, h, kA4, 3);
    gen_.apply(ytmp_, k_[3], work_);
    stage(ytmp_, h, kA5, 4);
    gen_.apply(ytmp_, k_[4], work_);
    stage(ytmp_, h, kA6, 5);
    gen_.apply(ytmp_, k_[5], work_);
    // 5th order solution
    ytmp_ = y_;
    for (int i = 0; i < 6; ++i)
      if (kB[i] != 0.0) ytmp_.noalias() += (h * kB[i]) * k_[i];
    gen_.apply(ytmp_, k_[6], work_);
    yerr_ = (h * kE[0]) * k_[0];
    for (int i = 2; i < 7; ++i) yerr_.noalias() += (h * kE[i]) * k_[i];

    const double* e = reinterpret_cast<const double*>(yerr_.data());
    const double* ya = reinterpret_cast<const double*>(y_.data());
    const double* yb = reinterpret_cast<const double*>(ytmp_.data());
    const long n = 2 * y_.size();
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sc = tol_ + tol_ * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = e[i] / sc;
      sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(n));
  }

  void stage(Eigen::MatrixXcd& out, double h, const double* a, int count) {
    out = y_;
    for (int i = 0; i < count; ++i)
      if (a[i] != 0.0) out.noalias() += (h * a[i]) * k_[i];
  }

  double initial_step(double t_span) {
    const double dny = rms(y_);
    const double dnf = rms(k_[0]);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, t_span);
    ytmp_ = y_ + h * k_[0];
    gen_.apply(ytmp_, k_[1], work_);
    const double der2 = rms(Eigen::MatrixXcd(k_[1] - k_[0])) / h;
    const double der12 = std::max(der2, dnf);
    const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                       : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, t_span});
  }

  static double rms(const Eigen::MatrixXcd& m) {
    return m.norm() / std::sqrt(static_cast<double>(m.size()));
  }

  const LindbladGenerator& gen_;
  Eigen::MatrixXcd y_;
  double tol_;
  double t_;
  double h_ = 0.0;
  double trace0_ = 1.0;
  Eigen::MatrixXcd k_[7], ytmp_, yerr_, work_;
};

}  // namespace

Eigen::MatrixXcd propagate(const Eigen::MatrixXcd& rho0,
                           const Eigen::MatrixXcd& h,
                           const std::vector<Eigen::MatrixXcd>& jumps,
                           double t_final, double tol) {
  require(t_final >= 0.0, "propagate: t_final must be >= 0");
  if (t_final == 0.0) return rho0;
  LindbladGenerator gen(h, jumps);
  AdaptiveIntegrator integ(gen, rho0, tol);
  integ.advance_to(t_final);
  return integ.state();
}

Eigen::MatrixXcd partial_trace_env(const Eigen::MatrixXcd& rho_joint,
                                   const Geometry& geometry) {
  const int k = geometry.k;
  const long edim = env_dim(k);
  require(rho_joint.rows() == joint_dim(k) && rho_joint.cols() == joint_dim(k),
          "partial_trace_env: joint dimension mismatch");
  Eigen::MatrixXcd rho_s = Eigen::MatrixXcd::Zero(k, k);
  for (int n = 0; n < k; ++n)
    for (int m = 0; m < k; ++m)
      rho_s(n, m) = rho_joint.block(n * edim, m * edim, edim, edim).trace();
  return rho_s;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a - b,
                                                         Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

namespace {

struct PreparedModel {
  Eigen::MatrixXcd h;
  std::vector<Eigen::MatrixXcd> jumps;
  Eigen::MatrixXcd rho0;
  Eigen::MatrixXcd target;  // k x k
};

PreparedModel prepare(const LaserParams& params, const ModelConfig& config) {
  config.validate();
  params.validate();
  PreparedModel m;
  m.h = build_total_hamiltonian(params, config.geometry, config.coefficients);
  m.jumps = build_jump_operators(config.gamma_p, config.geometry);
  m.rho0 = initial_state(config.geometry);
  const auto eig = eigensystem(
      build_system_hamiltonian(config.geometry, config.coefficients));
  m.target = thermal_state(eig, thermal_kT(config));
  return m;
}

}  // namespace

CostSample evaluate_cost(const LaserParams& params, const ModelConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  CostSample sample;
  sample.params = params;
  try {
    const PreparedModel m = prepare(params, config);
    const Eigen::MatrixXcd rho_f =
        propagate(m.rho0, m.h, m.jumps, config.t_f, config.integrator_tol);
    const Eigen::MatrixXcd rho_s = partial_trace_env(rho_f, config.geometry);
    sample.cost = trace_distance(rho_s, m.target);
  } catch (const PropagationError& e) {
    throw PropagationError(std::string(e.what()) + " at params " +
                           format_params(params));
  }
  sample.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return sample;
}

double steadiness_check(const LaserParams& params, const ModelConfig& config,
                        double delta_t) {
  require(delta_t > 0.0, "steadiness_check: delta_t must be > 0");
  try {
    const PreparedModel m = prepare(params, config);
    LindbladGenerator gen(m.h, m.jumps);
    AdaptiveIntegrator integ(gen, m.rho0, config.integrator_tol);
    integ.advance_to(config.t_f);
    const double d1 =
        trace_distance(partial_trace_env(integ.state(), config.geometry), m.target);
    integ.advance_to(config.t_f + delta_t);
    const double d2 =
        trace_distance(partial_trace_env(integ.state(), config.geometry), m.target);
    return std::abs(d1 - d2);
  } catch (const PropagationError& e) {
    throw PropagationError(std::string(e.what()) + " at params " +
                           format_params(params));
  }
}

Trajectory propagate_trajectory(const Eigen::MatrixXcd& rho0,
                                const Eigen::MatrixXcd& h,
                                const std::vector<Eigen::MatrixXcd>& jumps,
                                const std::vector<double>& times, double tol,
                                const Geometry& geometry, const Eigensystem& eig,
                                const Eigen::MatrixXcd& target) {
  require(!times.empty(), "propagate_trajectory: times must be non-empty");
  require(times.front() >= 0.0, "propagate_trajectory: times must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] >= times[i - 1], "propagate_trajectory: times must ascend");
  const int k = geometry.k;
  require(eig.states.rows() == k, "propagate_trajectory: eigensystem mismatch");

  Trajectory traj;
  traj.times = times;
  traj.populations.resize(times.size(), k);
  traj.coherence.resize(times.size());
  traj.costs.resize(times.size());

  LindbladGenerator gen(h, jumps);
  AdaptiveIntegrator integ(gen, rho0, tol);
  for (std::size_t i = 0; i < times.size(); ++i) {
    integ.advance_to(times[i]);
    const Eigen::MatrixXcd rho_s = partial_trace_env(integ.state(), geometry);
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXcd phi = eig.states.col(j);
      traj.populations(i, j) = std::real((phi.adjoint() * rho_s * phi)(0, 0));
    }
    traj.coherence[i] =
        (eig.states.col(0).adjoint() * rho_s * eig.states.col(1))(0, 0);
    traj.costs[i] = target.size() > 0
                        ? trace_distance(rho_s, target)
                        : std::numeric_limits<double>::quiet_NaN();
  }
  return traj;
}

std::vector<double> default_trajectory_times(double t_f) {
  require(t_f > 0.0, "default_trajectory_times: t_f must be > 0");
  std::vector<double> times;
  for (int i = 0; i <= 200; ++i) times.push_back(t_f * i / 200.0);
  const double inset = std::min(0.2, t_f);
  for (int i = 0; i <= 40; ++i) times.push_back(inset * i / 40.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());
  return times;
}

void validate_density_matrix(const Eigen::MatrixXcd& rho, double herm_tol,
                             double trace_tol, double positivity_tol) {
  require(rho.rows() == rho.cols(), "density matrix must be square");
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() < herm_tol,
          "density matrix is not Hermitian");
  require(std::abs(rho.trace().real() - 1.0) < trace_tol &&
              std::abs(rho.trace().imag()) < trace_tol,
          "density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho,
                                                         Eigen::EigenvaluesOnly);
  require(solver.eigenvalues().minCoeff() >= -positivity_tol,
          "density matrix has a negative eigenvalue");
}

}  // namespace rydscape
