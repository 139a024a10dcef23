#pragma once

#include <pointersim/common.hpp>

#include <Eigen/Dense>

#include <optional>

namespace pointersim {

/// Total Hamiltonian h_sys (x) 1 + 1 (x) h_env + g * (V + eta * P) on the
/// s*N + nu product basis.
///
/// V is the factorized-diagonal interaction sum_{s,nu} potential(s, nu) |s,nu><s,nu|;
/// row 0 of `potential` is V_up and row 1 is V_dn. P is an optional dense
/// Hermitian perturbation that couples different branches.
struct HamiltonianSpec {
  Eigen::MatrixXcd h_sys;                    ///< M x M
  Eigen::VectorXd env_levels;                ///< diagonal of h_env (length N)
  std::optional<Eigen::MatrixXcd> h_env;     ///< dense h_env; overrides env_levels
  Eigen::MatrixXd potential;                 ///< M x N
  std::optional<Eigen::MatrixXcd> perturbation;  ///< (M*N) x (M*N)
  double eta = 0.0;
  double g = 0.0;

  int n_sys() const noexcept { return static_cast<int>(h_sys.rows()); }
  int n_env() const noexcept { return static_cast<int>(potential.cols()); }
  Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(n_sys()) * n_env(); }

  /// Throws DomainError on any shape mismatch, non-Hermitian block, or negative g/eta.
  void validate() const;

  bool sys_diagonal() const;
  bool env_diagonal() const;
  bool has_perturbation() const noexcept { return perturbation.has_value() && eta != 0.0; }
  /// The total Hamiltonian is diagonal in the product basis.
  bool fully_diagonal() const { return sys_diagonal() && env_diagonal() && !has_perturbation(); }

  Eigen::MatrixXcd env_matrix() const;
  Eigen::MatrixXcd interaction_matrix() const;
  Eigen::MatrixXcd total_matrix() const;
  /// Diagonal of the total Hamiltonian; only meaningful when fully_diagonal().
  Eigen::VectorXd total_diagonal() const;
};

/// Largest entry of |H - H^dagger|.
double hermiticity_defect(const Eigen::MatrixXcd& h);

inline constexpr double kHermitianTolerance = 1e-12;

/// Diagonal-family Hamiltonian for M = 2: h_sys given, h_env = diag(env_levels),
/// V_up / V_dn per environment sector, no perturbation.
HamiltonianSpec diagonal_family(Eigen::MatrixXcd h_sys, Eigen::VectorXd env_levels,
                                const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn,
                                double g);

/// 2x2 system Hamiltonian diag(omega_up, omega_dn) + delta * sigma_x.
Eigen::MatrixXcd two_level_system(double omega_up, double omega_dn, double delta = 0.0);

}  // namespace pointersim
