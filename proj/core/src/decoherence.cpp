#include <pointersim/decoherence.hpp>

#include <pointersim/hamiltonian.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace pointersim {

Eigen::MatrixXcd reduced_density(const TotalState& state) {
  const Eigen::MatrixXcd c = state.coefficients();
  Eigen::MatrixXcd rho = c * c.adjoint();
  // Symmetrize away the rounding asymmetry of the product.
  return 0.5 * (rho + rho.adjoint());
}

ExpectationParts expectation_decomposed(const TotalState& state, const Eigen::MatrixXcd& q) {
  const int m = state.n_sys();
  if (q.rows() != m || q.cols() != m) {
    throw DomainError("expectation_decomposed: Q must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (hermiticity_defect(q) > kHermitianTolerance) {
    throw DomainError("expectation_decomposed: Q is not Hermitian");
  }
  const auto groups = regroup_by_system(state);
  ExpectationParts out;
  cplx coherent{0.0, 0.0};
  for (int s = 0; s < m; ++s) {
    const auto& es = groups[static_cast<std::size_t>(s)].env;
    out.diagonal_part += es.squaredNorm() * q(s, s).real();
    for (int sp = 0; sp < m; ++sp) {
      if (sp == s) continue;
      coherent += q(s, sp) * es.dot(groups[static_cast<std::size_t>(sp)].env);
    }
  }
  out.coherent_part = coherent.real();
  return out;
}

double purity(const Eigen::MatrixXcd& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho.cwiseAbs2().sum();
}

double offdiag_coherence(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) throw DomainError("offdiag_coherence: requires a 2x2 density matrix");
  return std::abs(rho(0, 1));
}

SchmidtPair schmidt_env_vectors(std::span<const Branch> branches, int n_env, int n_bins, bool filtered) {
  if (n_bins < 2) throw DomainError("schmidt_env_vectors: n_bins must be >= 2");
  const double width = kHalfPi / n_bins;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n_env);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n_env);
  SchmidtPair out;
  bool any_a = false;
  bool any_b = false;
  for (const Branch& br : branches) {
    if (br.sys_coeffs.size() != 2) throw DomainError("schmidt_env_vectors: requires a two-state system");
    if (br.env_index < 0 || br.env_index >= n_env) throw DomainError("schmidt_env_vectors: env index out of range");
    const int bin = std::min(static_cast<int>(std::floor(br.mixing_angle / width)), n_bins - 1);
    const cplx amp = br.weight * std::exp(cplx{0.0, -br.accumulated_phase});
    const double w = std::norm(br.weight);
    if (bin == 0) {
      a[br.env_index] += amp;
      out.weight_a += w;
      any_a = any_a || w > 0.0;
    } else if (bin == n_bins - 1) {
      b[br.env_index] += amp;
      out.weight_b += w;
      any_b = any_b || w > 0.0;
    } else if (filtered) {
      throw DomainError("schmidt_env_vectors: branch " + std::to_string(br.env_index) +
                        " lies outside both pointer classes of a filtered ensemble");
    } else {
      out.excluded_norm += w;
    }
  }
  if (any_a) out.env_a = a / a.norm();
  if (any_b) out.env_b = b / b.norm();
  if (any_a && any_b) out.overlap = out.env_a->dot(*out.env_b);
  return out;
}

std::optional<cplx> env_overlap(const TotalState& state, int s_a, int s_b) {
  const auto groups = regroup_by_system(state);
  const auto& ea = groups.at(static_cast<std::size_t>(s_a)).env;
  const auto& eb = groups.at(static_cast<std::size_t>(s_b)).env;
  const double na = ea.norm();
  const double nb = eb.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return std::nullopt;
  return ea.dot(eb) / (na * nb);
}

TotalState assemble_branch_state(std::span<const Branch> branches, int n_sys, int n_env) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sys) * n_env);
  for (const Branch& b : branches) {
    if (b.sys_coeffs.size() != n_sys || b.env_index < 0 || b.env_index >= n_env) {
      throw DomainError("assemble_branch_state: branch does not fit the requested dimensions");
    }
    const cplx factor = b.weight * std::exp(cplx{0.0, -b.accumulated_phase});
    for (int s = 0; s < n_sys; ++s) amps[static_cast<Eigen::Index>(s) * n_env + b.env_index] += factor * b.sys_coeffs[s];
  }
  const double norm = amps.norm();
  if (!(norm > 0.0)) throw DomainError("assemble_branch_state: branch set carries no weight");
  return TotalState(n_sys, n_env, amps / norm);
}

DecoherenceReport make_report(const TotalState& state, std::optional<cplx> overlap, double lost_norm) {
  DecoherenceReport r;
  r.rho_sys = reduced_density(state);
  r.offdiag_mag = state.n_sys() == 2 ? offdiag_coherence(r.rho_sys) : std::abs(r.rho_sys(0, 1));
  r.purity = purity(r.rho_sys);
  r.env_overlap = overlap;
  r.lost_norm = lost_norm;
  return r;
}

}  // namespace pointersim
