#include "rydscape/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rydscape {

long env_encode(const std::vector<int>& levels) {
  long idx = 0;
  for (int lv : levels) {
    require(lv >= 0 && lv <= 2, "env_encode: level must be 0 (g), 1 (e) or 2 (r)");
    idx = idx * 3 + lv;
  }
  return idx;
}

std::vector<int> env_decode(long index, int k) {
  require(index >= 0 && index < env_dim(k), "env_decode: index out of range");
  std::vector<int> levels(k);
  for (int a = k - 1; a >= 0; --a) {
    levels[a] = static_cast<int>(index % 3);
    index /= 3;
  }
  return levels;
}

int system_size_for_joint_dim(long dim) {
  for (int k = 1; k <= 16; ++k)
    if (joint_dim(k) == dim) return k;
  throw ValidationError("joint dimension " + std::to_string(dim) +
                        " is not of the form k*3^k");
}

namespace {

double system_pair_distance(const Geometry& g, int n, int m) {
  return std::abs(n - m) * g.d;
}

double system_env_distance(const Geometry& g, int m, int alpha) {
  const double dx = (m - alpha) * g.d;
  return std::sqrt(dx * dx + g.delta_offset * g.delta_offset);
}

}  // namespace

Eigen::MatrixXcd build_system_hamiltonian(const Geometry& geometry,
                                          const InteractionCoefficients& coeff) {
  geometry.validate();
  coeff.validate();
  const int k = geometry.k;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(k, k);
  const double c3 = angular(coeff.c3);
  for (int n = 0; n < k; ++n)
    for (int m = 0; m < k; ++m) {
      if (n == m) continue;
      const double r = system_pair_distance(geometry, n, m);
      h(n, m) = c3 / (r * r * r);
    }
  return h;
}

Eigen::MatrixXcd build_environment_hamiltonian(const LaserParams& params,
                                               const Geometry& geometry,
                                               const InteractionCoefficients& coeff) {
  params.validate();
  require(geometry.k >= 1, "build_environment_hamiltonian: k must be >= 1");
  const int k = geometry.k;
  const long dim = env_dim(k);
  const double wp = angular(params.omega_p) / 2.0;
  const double wc = angular(params.omega_c) / 2.0;
  const double dp = angular(params.delta_p);
  const double dpc = angular(params.delta_p + params.delta_c);
  const double c6rr = angular(coeff.c6_rr);

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  long stride = dim / 3;  // ternary place value of atom 0, updated per atom
  for (int alpha = 0; alpha < k; ++alpha) {
    for (long idx = 0; idx < dim; ++idx) {
      const int lv = static_cast<int>((idx / stride) % 3);
      if (lv == 0) {
        h(idx + stride, idx) += wp;  // |e><g|
        h(idx, idx + stride) += wp;
      } else if (lv == 1) {
        h(idx, idx) -= dp;
        h(idx + stride, idx) += wc;  // |r><e|
        h(idx, idx + stride) += wc;
      } else {
        h(idx, idx) -= dpc;
      }
    }
    stride /= 3;
  }

  // pairwise |r r| van der Waals shifts
  for (long idx = 0; idx < dim; ++idx) {
    const auto levels = env_decode(idx, k);
    double shift = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        if (levels[a] == 2 && levels[b] == 2) {
          const double r = (b - a) * geometry.d;
          shift += c6rr / std::pow(r, 6);
        }
    h(idx, idx) += shift;
  }
  return h;
}

Eigen::MatrixXcd build_interaction_hamiltonian(const Geometry& geometry,
                                               const InteractionCoefficients& coeff) {
  geometry.validate();
  coeff.validate();
  const int k = geometry.k;
  const long edim = env_dim(k);
  const long dim = joint_dim(k);
  const double c6pr = angular(coeff.c6_pr);
  const double c6sr = angular(coeff.c6_sr);

  // Vbar(n, alpha): joint shift when the excitation is on atom n and
  // background atom alpha is in |r>.
  Eigen::MatrixXd vbar(k, k);
  for (int n = 0; n < k; ++n)
    for (int alpha = 0; alpha < k; ++alpha) {
      double v = c6pr / std::pow(system_env_distance(geometry, n, alpha), 6);
      for (int m = 0; m < k; ++m) {
        if (m == n) continue;
        v += c6sr / std::pow(system_env_distance(geometry, m, alpha), 6);
      }
      vbar(n, alpha) = v;
    }

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n < k; ++n)
    for (long e = 0; e < edim; ++e) {
      const auto levels = env_decode(e, k);
      double shift = 0.0;
      for (int alpha = 0; alpha < k; ++alpha)
        if (levels[alpha] == 2) shift += vbar(n, alpha);
      const long j = joint_index(n, e, k);
      h(j, j) = shift;
    }
  return h;
}

Eigen::MatrixXcd build_total_hamiltonian(const LaserParams& params,
                                         const Geometry& geometry,
                                         const InteractionCoefficients& coeff) {
  const int k = geometry.k;
  const long edim = env_dim(k);
  const Eigen::MatrixXcd hs = build_system_hamiltonian(geometry, coeff);
  const Eigen::MatrixXcd he = build_environment_hamiltonian(params, geometry, coeff);
  Eigen::MatrixXcd h = build_interaction_hamiltonian(geometry, coeff);
  for (int n = 0; n < k; ++n)
    for (int m = 0; m < k; ++m) {
      if (hs(n, m) == std::complex<double>(0.0) && n != m) continue;
      for (long e = 0; e < edim; ++e)
        h(joint_index(n, e, k), joint_index(m, e, k)) += hs(n, m);
    }
  for (int n = 0; n < k; ++n)
    h.block(n * edim, n * edim, edim, edim) += he;
  return h;
}

std::vector<Eigen::MatrixXcd> build_jump_operators(double gamma_p,
                                                   const Geometry& geometry) {
  require(std::isfinite(gamma_p) && gamma_p > 0.0,
          "build_jump_operators: gamma_p must be > 0");
  require(geometry.k >= 1, "build_jump_operators: k must be >= 1");
  const int k = geometry.k;
  const long edim = env_dim(k);
  const int sys_dim = k >= 2 ? k : 1;
  const long dim = sys_dim * edim;
  const double amp = std::sqrt(angular(gamma_p));

  std::vector<Eigen::MatrixXcd> jumps;
  jumps.reserve(k);
  long stride = edim / 3;
  for (int alpha = 0; alpha < k; ++alpha) {
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < sys_dim; ++n)
      for (long e = 0; e < edim; ++e) {
        if ((e / stride) % 3 != 1) continue;  // atom alpha in |e>
        const long src = n * edim + e;
        const long dst = n * edim + (e - stride);  // atom alpha -> |g>
        l(dst, src) = amp;
      }
    jumps.push_back(std::move(l));
    stride /= 3;
  }
  return jumps;
}

Eigen::MatrixXcd initial_state(const Geometry& geometry) {
  geometry.validate();
  const long dim = joint_dim(geometry.k);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;  // |pi_0> (x) |g...g> is joint index 0
  return rho;
}

Eigensystem eigensystem(const Eigen::MatrixXcd& h) {
  require(is_hermitian(h, 1e-10), "eigensystem: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  require(solver.info() == Eigen::Success, "eigensystem: decomposition failed");
  return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXcd thermal_state(const Eigensystem& eig, double kT) {
  require(std::isfinite(kT) && kT > 0.0, "thermal_state: kT must be > 0");
  const auto n = eig.energies.size();
  // weights relative to the ground energy for numerical stability
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = std::exp(-(eig.energies(i) - eig.energies(0)) / kT);
  w /= w.sum();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    rho.noalias() += w(i) * (eig.states.col(i) * eig.states.col(i).adjoint());
  return rho;
}

double interaction_scale(const Geometry& geometry,
                         const InteractionCoefficients& coeff) {
  return std::abs(angular(coeff.c3)) / (geometry.d * geometry.d * geometry.d);
}

double thermal_kT(const ModelConfig& config) {
  return config.kT_eff * interaction_scale(config.geometry, config.coefficients);
}

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= tol * scale;
}

}  // namespace rydscape
