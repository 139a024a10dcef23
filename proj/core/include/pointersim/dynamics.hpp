// dynamics.hpp: exact and phase-only time evolution (hbar = 1)
//
// The exact route diagonalizes the assembled total Hamiltonian. The
// phase-only route keeps each branch in its free frame
//   |nu(t)> = (exp(-i h_sys t) c_nu) (x) exp(-i h_env t)|eps_nu>
// and multiplies it by exp(-i Lambda_nu(t)), where Lambda_nu is the running
// integral of <nu(t)| h_int |nu(t)>.

#pragma once

#include <pointersim/common.hpp>
#include <pointersim/hamiltonian.hpp>
#include <pointersim/hilbert.hpp>

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pointersim {

enum class PropagationMethod { eigendecomposition, rk4 };

struct PropagatorSpec {
  PropagationMethod method = PropagationMethod::eigendecomposition;
  double dt = 1e-2;
  double t_final = 0.0;
  int sample_stride = 1;

  void validate() const;
  /// Number of integration steps; the last one is shortened to land on t_final.
  int n_steps() const;
  double time_at(int step) const;
};

/// Lambda_nu(t) and <nu(t)|h_int|nu(t)> on the recorded sample grid.
struct PhaseTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd lambda;                   ///< [branch][sample]
  Eigen::MatrixXd interaction_expectation;  ///< [branch][sample]
  Eigen::VectorXd final_lambda;             ///< Lambda_nu(t_final)

  Eigen::Index n_branches() const noexcept { return lambda.rows(); }
  Eigen::Index n_samples() const noexcept { return lambda.cols(); }
};

/// exp(-i H t) by dense eigendecomposition, or by elementwise phases when
/// the total Hamiltonian is diagonal (no dimension cap in that case).
class ExactPropagator {
 public:
  explicit ExactPropagator(const HamiltonianSpec& h, std::size_t dimension_cap = kDefaultDimensionCap);

  TotalState evolve(const TotalState& state, double t) const;
  const Eigen::VectorXd& energies() const noexcept { return energies_; }

 private:
  int n_sys_ = 0;
  int n_env_ = 0;
  bool diagonal_ = false;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

TotalState exact_evolve(const TotalState& state, const HamiltonianSpec& h, double t,
                        std::size_t dimension_cap = kDefaultDimensionCap);

/// Classical fixed-step RK4 on i d/dt Phi = H Phi. Cross-check for exact_evolve.
TotalState integrate_rk4(const TotalState& state, const HamiltonianSpec& h, double t, double dt,
                         std::size_t dimension_cap = kDefaultDimensionCap);

/// A branch carried along the free (g = 0) evolution.
struct BranchFrame {
  Branch branch;               ///< coefficients at time t; diagonal-env phase folded into weight
  Eigen::VectorXcd env_state;  ///< exp(-i h_env t)|eps_nu>; empty when h_env is diagonal
  bool monitor_orthogonality = false;  ///< set when the dense-h_env fallback was taken
};

/// Precomputes the spectral data of h_sys and h_env so many branches can be
/// moved to many times cheaply.
class FrameEvolver {
 public:
  explicit FrameEvolver(const HamiltonianSpec& h, std::size_t dimension_cap = kDefaultDimensionCap);

  BranchFrame evolve(const Branch& branch, double t) const;
  Eigen::MatrixXcd system_propagator(double t) const;

 private:
  Eigen::VectorXd sys_energies_;
  Eigen::MatrixXcd sys_vectors_;
  bool env_diagonal_ = true;
  Eigen::VectorXd env_levels_;
  Eigen::VectorXd env_energies_;
  Eigen::MatrixXcd env_vectors_;
};

BranchFrame evolve_branch_frame(const Branch& branch, const HamiltonianSpec& h, double t);

/// <nu|h_int|nu> for a branch whose environment factor is the basis vector |eps_nu>.
double interaction_expectation(const Branch& branch, const HamiltonianSpec& h);
/// Same for a general frame (dense-h_env fallback included).
double interaction_expectation(const BranchFrame& frame, const HamiltonianSpec& h);

PhaseTrajectory accumulate_lambda(std::span<const Branch> branches, const HamiltonianSpec& h,
                                  const PropagatorSpec& spec);

/// Copies of `branches` with accumulated_phase set to Lambda_nu(t_final).
std::vector<Branch> with_accumulated_phases(std::span<const Branch> branches,
                                            const PhaseTrajectory& trajectory);

/// sum_nu alpha_nu |nu(t)> exp(-i Lambda_nu(t)) at t = spec.t_final.
TotalState phase_evolve(std::span<const Branch> branches, const HamiltonianSpec& h,
                        const PropagatorSpec& spec);

/// max over nu != nu' of |<nu|h_int|nu'>| for the given branch frames.
double transition_residual(std::span<const Branch> branches, const HamiltonianSpec& h);

/// |<a|b>|^2.
double fidelity(const TotalState& a, const TotalState& b);

}  // namespace pointersim
