#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <optional>
#include <vector>

#include "rydscape/model.hpp"
#include "rydscape/params.hpp"

namespace rydscape {

/// One evaluated landscape point: the parameters, the trace-distance cost
/// D in [0,1], the wall time the evaluation took (diagnostic, not persisted),
/// and an optional steadiness value |D(t_f) - D(t_f + dt)|.
struct CostSample {
  LaserParams params;
  double cost = 0.0;
  double wall_time = 0.0;
  std::optional<double> steadiness;
  bool failed = false;
};

/// Time-sampled dynamics of the reduced system state: populations of the
/// ascending energy eigenstates, the (0,1) eigenbasis coherence, and the
/// per-time trace distance to the target state.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd populations;  // times.size() x k
  std::vector<std::complex<double>> coherence;
  std::vector<double> costs;
};

/// Right-hand side of the master equation,
///   d rho/dt = -i [h, rho] + sum_a (L_a rho L_a^+ - 1/2 {L_a^+ L_a, rho}),
/// prepared in sparse form for repeated application.
class LindbladGenerator {
 public:
  LindbladGenerator(const Eigen::MatrixXcd& h,
                    const std::vector<Eigen::MatrixXcd>& jumps);

  long dim() const { return dim_; }

  /// out = generator applied to rho. `work` must be dim x dim scratch.
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out,
             Eigen::MatrixXcd& work) const;

 private:
  long dim_;
  Eigen::SparseMatrix<std::complex<double>> h_;
  std::vector<Eigen::SparseMatrix<std::complex<double>>> jumps_;
  std::vector<Eigen::SparseMatrix<std::complex<double>>> jumps_adj_;
  Eigen::SparseMatrix<std::complex<double>> n_half_;  // 1/2 sum L^+ L
};

/// dr/dt for a single state; the generator applied once.
Eigen::MatrixXcd liouvillian_apply(const Eigen::MatrixXcd& h,
                                   const std::vector<Eigen::MatrixXcd>& jumps,
                                   const Eigen::MatrixXcd& rho);

/// Thrown when the adaptive integrator cannot proceed (step underflow) or a
/// state invariant degrades beyond what the tolerance can explain.
class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive embedded Runge-Kutta 5(4) propagation of the full density matrix
/// to t_final, with per-step error control at relative tolerance tol and
/// Hermitian symmetrization after each accepted step.
Eigen::MatrixXcd propagate(const Eigen::MatrixXcd& rho0,
                           const Eigen::MatrixXcd& h,
                           const std::vector<Eigen::MatrixXcd>& jumps,
                           double t_final, double tol);

/// As propagate, but sampling the reduced system state at the given ascending
/// times. `eig` supplies the eigenbasis for populations/coherence; `target`
/// (k x k), when nonempty, defines the per-time cost column.
Trajectory propagate_trajectory(const Eigen::MatrixXcd& rho0,
                                const Eigen::MatrixXcd& h,
                                const std::vector<Eigen::MatrixXcd>& jumps,
                                const std::vector<double>& times, double tol,
                                const Geometry& geometry, const Eigensystem& eig,
                                const Eigen::MatrixXcd& target);

/// Trace over the background atoms: rho_S(n,m) = sum_e rho(n*3^k+e, m*3^k+e).
Eigen::MatrixXcd partial_trace_env(const Eigen::MatrixXcd& rho_joint,
                                   const Geometry& geometry);

/// D(a, b) = 1/2 tr |a - b|, half the absolute-eigenvalue sum of the
/// Hermitian difference. Range [0, 1] for states.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// The cost oracle: build the model at `params`, propagate the localized
/// initial state to t_f, trace out the background, and compare against the
/// target thermal state. Deterministic for a fixed config.
CostSample evaluate_cost(const LaserParams& params, const ModelConfig& config);

/// |D(t_f) - D(t_f + delta_t)|: near zero when the state has settled rather
/// than crossing the target transiently.
double steadiness_check(const LaserParams& params, const ModelConfig& config,
                        double delta_t = 0.2);

/// Default sample grid for dynamics export: 201 uniform points on [0, t_f]
/// merged with a 41-point grid on [0, 0.2] covering the initial transient.
std::vector<double> default_trajectory_times(double t_f);

/// Density-matrix sanity: Hermitian, unit trace, eigenvalues >= -eps.
void validate_density_matrix(const Eigen::MatrixXcd& rho, double herm_tol = 1e-10,
                             double trace_tol = 1e-8, double positivity_tol = 1e-8);

}  // namespace rydscape
