// hilbert.hpp: product-space state model and its two groupings
//
// A TotalState lives on the M*N product basis |s>|eps_nu> with flat index
// s*N + nu. The environment-side grouping writes the state as a sum of N
// branches alpha_nu (sum_s c_{s nu}|s>)|eps_nu>; the system-side grouping
// writes it as sum_s |s>|E_s> with unnormalized environment vectors E_s.

#pragma once

#include <pointersim/common.hpp>

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pointersim {

class TotalState {
 public:
  TotalState() = default;
  /// Throws DomainError if n_sys < 2, n_env < 1 or the length is not n_sys*n_env.
  TotalState(int n_sys, int n_env, Eigen::VectorXcd amplitudes);

  int n_sys() const noexcept { return n_sys_; }
  int n_env() const noexcept { return n_env_; }
  Eigen::Index dim() const noexcept { return amplitudes_.size(); }

  Eigen::Index index(int s, int nu) const noexcept {
    return static_cast<Eigen::Index>(s) * n_env_ + nu;
  }
  cplx amp(int s, int nu) const { return amplitudes_[index(s, nu)]; }

  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }

  /// Amplitudes reshaped as the M x N coefficient matrix C[s][nu].
  Eigen::MatrixXcd coefficients() const;

  double norm() const { return amplitudes_.norm(); }

 private:
  int n_sys_ = 0;
  int n_env_ = 0;
  Eigen::VectorXcd amplitudes_;
};

// Tolerance used to check the "normalized input" preconditions.
inline constexpr double kNormTolerance = 1e-10;

// Magnitude below which an amplitude is treated as zero when fixing phases.
inline constexpr double kPhaseCutoff = 1e-14;

/// One environment-indexed term alpha_nu (c_nu)|eps_nu>.
struct Branch {
  int env_index = 0;
  cplx weight{0.0, 0.0};
  Eigen::VectorXcd sys_coeffs;  ///< unit vector of length M
  double mixing_angle = 0.0;    ///< atan2(|c_rest|, |c_0|) in [0, pi/2]
  double accumulated_phase = 0.0;
};

/// Environment vector belonging to one system basis state.
struct SystemGroup {
  int sys_index = 0;
  Eigen::VectorXcd env;  ///< E_s[nu] = amp(s, nu), unnormalized
};

/// Mixing angle of a system coefficient vector; for M > 2 every s >= 1 counts as "down".
double mixing_angle_of(const Eigen::VectorXcd& sys_coeffs);

/// Branch with the given coefficients; mixing angle filled in, phase zero.
Branch make_branch(int env_index, cplx weight, Eigen::VectorXcd sys_coeffs);

TotalState build_entangled_state(const Eigen::MatrixXcd& coefficients);
TotalState build_product_state(const Eigen::VectorXcd& sys, const Eigen::VectorXcd& env);

/// Always returns n_env branches. alpha_nu carries the phase of the first
/// non-negligible amplitude of column nu, so that coefficient is real positive.
/// Zero-weight columns yield weight 0 and coefficients (1, 0, ...).
std::vector<Branch> decompose_by_environment(const TotalState& state);

std::vector<SystemGroup> regroup_by_system(const TotalState& state);

/// Inverse of decompose_by_environment. The env indices must be a permutation
/// of 0..N-1, all coefficient vectors the same length and sum |alpha|^2 = 1.
TotalState reconstruct(std::span<const Branch> branches);

/// True when every non-negligible branch carries the same system coefficients
/// (same mixing angle and same relative phase) within tol.
bool is_product_state(const TotalState& state, double tol = 1e-10);

}  // namespace pointersim
