#pragma once

#include <pointersim/common.hpp>
#include <pointersim/hilbert.hpp>

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace pointersim {

/// rho[s][s'] = sum_nu amp(s, nu) conj(amp(s', nu)).
Eigen::MatrixXcd reduced_density(const TotalState& state);

struct ExpectationParts {
  double diagonal_part = 0.0;  ///< sum_s ||E_s||^2 Q[s][s]
  double coherent_part = 0.0;  ///< sum_{s != s'} Q[s][s'] <E_s|E_s'>
  double total() const noexcept { return diagonal_part + coherent_part; }
};

/// <Q> for an operator acting on the system only, split through the
/// system-side grouping. Throws DomainError for a non-Hermitian Q.
ExpectationParts expectation_decomposed(const TotalState& state, const Eigen::MatrixXcd& q);

double purity(const Eigen::MatrixXcd& rho);
/// |rho[0][1]|; requires a 2x2 matrix.
double offdiag_coherence(const Eigen::MatrixXcd& rho);

/// Normalized environment vectors of the two pointer classes.
///
/// Class A collects the branches in the first mixing-angle bin (theta ~ 0,
/// system state up), class B those in the last bin (theta ~ pi/2). Either
/// vector is absent when its class is empty, in which case `overlap` is too.
struct SchmidtPair {
  std::optional<Eigen::VectorXcd> env_a;
  std::optional<Eigen::VectorXcd> env_b;
  double weight_a = 0.0;        ///< sum |alpha|^2 over class A
  double weight_b = 0.0;
  double excluded_norm = 0.0;   ///< weight of branches outside both classes
  std::optional<cplx> overlap;  ///< <eps_A|eps_B>

  bool one_sided() const noexcept { return !overlap.has_value(); }
};

/// With `filtered` set, every branch must already sit in an endpoint bin;
/// otherwise interior branches are skipped and counted in excluded_norm.
SchmidtPair schmidt_env_vectors(std::span<const Branch> branches, int n_env, int n_bins, bool filtered);

/// <E_a|E_b> / (||E_a|| ||E_b||) from the system-side grouping; empty if either vector vanishes.
std::optional<cplx> env_overlap(const TotalState& state, int s_a = 0, int s_b = 1);

/// sum over branches of alpha exp(-i Lambda) c (x) |eps_nu>, renormalized.
TotalState assemble_branch_state(std::span<const Branch> branches, int n_sys, int n_env);

struct DecoherenceReport {
  Eigen::MatrixXcd rho_sys;
  double offdiag_mag = 0.0;
  double purity = 0.0;
  std::optional<cplx> env_overlap;
  double lost_norm = 0.0;
};

DecoherenceReport make_report(const TotalState& state, std::optional<cplx> env_overlap, double lost_norm);

}  // namespace pointersim
