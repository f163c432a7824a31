#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rydscape/params.hpp"
#include "rydscape/util.hpp"

namespace rydscape {

/// Linear chain of k system atoms spaced d apart, each with one laser-driven
/// background atom offset perpendicular by delta_offset. Lengths in um.
struct Geometry {
  int k = 2;
  double d = 5.0;
  double delta_offset = 2.0;

  void validate() const {
    require(k >= 2, "Geometry: k must be >= 2");
    require(std::isfinite(d) && d > 0.0, "Geometry: d must be > 0");
    require(std::isfinite(delta_offset) && delta_offset > 0.0,
            "Geometry: delta_offset must be > 0");
  }
};

/// Interaction coefficients in MHz.um^3 (c3) and MHz.um^6 (c6_*), nu
/// convention. c3 couples system atoms (resonant dipole-dipole); the c6
/// coefficients are van der Waals: background-background (rr), system-p with
/// background-r (pr), and system-s with background-r (sr).
struct InteractionCoefficients {
  double c3 = 0.0;
  double c6_rr = 0.0;
  double c6_pr = 0.0;
  double c6_sr = 0.0;

  void validate() const {
    require(std::isfinite(c3) && c3 != 0.0,
            "InteractionCoefficients: c3 must be nonzero and finite");
    require(std::isfinite(c6_rr) && std::isfinite(c6_pr) && std::isfinite(c6_sr),
            "InteractionCoefficients: c6 coefficients must be finite");
  }
};

/// Everything that fixes the cost oracle: geometry, coefficients, the decay
/// rate from the background |e> state (MHz), the target temperature as a
/// multiple of the nearest-neighbour coupling W = |c3|/d^3, the comparison
/// time t_f (us), and the integrator tolerance.
struct ModelConfig {
  Geometry geometry;
  InteractionCoefficients coefficients;
  double gamma_p = 6.1;
  double kT_eff = 1.2;
  double t_f = 2.0;
  double integrator_tol = 1e-8;

  void validate() const {
    geometry.validate();
    coefficients.validate();
    require(std::isfinite(gamma_p) && gamma_p > 0.0,
            "ModelConfig: gamma_p must be > 0");
    require(std::isfinite(kT_eff) && kT_eff > 0.0,
            "ModelConfig: kT_eff must be > 0");
    require(std::isfinite(t_f) && t_f > 0.0, "ModelConfig: t_f must be > 0");
    require(integrator_tol > 0.0 && integrator_tol <= 1e-3,
            "ModelConfig: integrator_tol must be in (0, 1e-3]");
  }
};

/// Spectral decomposition of a Hermitian operator: energies ascending
/// (rad/us), columns of `states` the matching orthonormal eigenvectors.
struct Eigensystem {
  Eigen::VectorXd energies;
  Eigen::MatrixXcd states;
};

// ---------------------------------------------------------------------------
// Basis bookkeeping.
//
// System basis: |pi_n>, n = 0..k-1, the single shared excitation sitting on
// atom n. Background basis: each of the k background atoms is a three-level
// atom with levels g=0, e=1, r=2; atom 0 is the most significant ternary
// digit. Joint index = system_index * 3^k + background_index.
// ---------------------------------------------------------------------------

inline long env_dim(int k) {
  long d = 1;
  for (int i = 0; i < k; ++i) d *= 3;
  return d;
}

inline long joint_dim(int k) { return static_cast<long>(k) * env_dim(k); }

long env_encode(const std::vector<int>& levels);
std::vector<int> env_decode(long index, int k);
inline long joint_index(int sys, long env, int k) { return sys * env_dim(k) + env; }

/// Infers k from a joint dimension k*3^k; throws if dim is not of that form.
int system_size_for_joint_dim(long dim);

// ---------------------------------------------------------------------------
// Operator builders. All matrices are returned in angular units (rad/us).
// ---------------------------------------------------------------------------

/// k x k excitation-hopping Hamiltonian: entry (n,m) = c3 / |n-m|^3 d^3 for
/// n != m (all pairs, no nearest-neighbour truncation), zero diagonal.
Eigen::MatrixXcd build_system_hamiltonian(const Geometry& geometry,
                                          const InteractionCoefficients& coeff);

/// 3^k x 3^k background Hamiltonian in the rotating wave approximation:
/// per-atom ladder drive (omega_p/2 on g<->e, omega_c/2 on e<->r), detuning
/// shifts -delta_p |e><e| and -(delta_p+delta_c) |r><r|, plus pairwise
/// c6_rr / |alpha-beta|^6 d^6 shifts on doubly-r states.
Eigen::MatrixXcd build_environment_hamiltonian(const LaserParams& params,
                                               const Geometry& geometry,
                                               const InteractionCoefficients& coeff);

/// Diagonal coupling on the joint space: when the excitation sits on atom n
/// and background atom alpha is in |r>, the shift is
///   Vbar(n,alpha) = c6_pr / r(n,alpha)^6 + sum_{m != n} c6_sr / r(m,alpha)^6
/// with r(m,alpha) = sqrt((m-alpha)^2 d^2 + delta_offset^2).
Eigen::MatrixXcd build_interaction_hamiltonian(const Geometry& geometry,
                                               const InteractionCoefficients& coeff);

/// H = H_sys (x) 1 + 1 (x) H_env + H_int on the k*3^k joint space.
Eigen::MatrixXcd build_total_hamiltonian(const LaserParams& params,
                                         const Geometry& geometry,
                                         const InteractionCoefficients& coeff);

/// One emission channel per background atom: sqrt(gamma_p) |g><e|_alpha,
/// identity on every other tensor factor. gamma_p in MHz (nu convention).
std::vector<Eigen::MatrixXcd> build_jump_operators(double gamma_p,
                                                   const Geometry& geometry);

/// rho(0): excitation localized on system atom 0, all background atoms in |g>.
Eigen::MatrixXcd initial_state(const Geometry& geometry);

Eigensystem eigensystem(const Eigen::MatrixXcd& h);

/// Boltzmann mixture of the eigenstates at temperature kT (angular energy
/// units, rad/us): rho = sum_n exp(-E_n/kT) |phi_n><phi_n| / Z.
Eigen::MatrixXcd thermal_state(const Eigensystem& eig, double kT);

/// Nearest-neighbour coupling magnitude W = |c3|/d^3 in rad/us; the
/// temperature scale of the target thermal state.
double interaction_scale(const Geometry& geometry,
                         const InteractionCoefficients& coeff);

/// kT_eff * W in rad/us.
double thermal_kT(const ModelConfig& config);

bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-12);

}  // namespace rydscape
