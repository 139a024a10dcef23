// ensemble.hpp: seeded coefficient/potential ensembles and the sweep drivers
//
// Every random draw comes from a generator seeded by (seed, trial, stream),
// so a trial's sample never depends on which other trials were run or in
// what order.

#pragma once

#include <pointersim/common.hpp>
#include <pointersim/hamiltonian.hpp>
#include <pointersim/hilbert.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace pointersim {

enum class CoefficientDistribution {
  complex_normal,               ///< i.i.d. complex Gaussian entries, normalized
  uniform_phase_equal_modulus,  ///< |C| equal everywhere, one uniform phase per sector
};

enum class PotentialDistribution {
  uniform01,  ///< V_s[nu] i.i.d. uniform on [0, 1)
  two_level,  ///< V_up, V_dn constants shared by every sector
};

struct EnsembleSpec {
  int n_sys = 2;
  int n_env = 1;
  int n_trials = 1;
  std::uint64_t seed = 0;
  CoefficientDistribution coeff_dist = CoefficientDistribution::complex_normal;
  PotentialDistribution potential_dist = PotentialDistribution::uniform01;
  double v_up = 1.0;  ///< two_level only
  double v_dn = 0.0;  ///< two_level only
  double g = 0.0;
  double t = 0.0;

  void validate() const;
};

std::string_view to_string(CoefficientDistribution d);
std::string_view to_string(PotentialDistribution d);
CoefficientDistribution parse_coefficient_distribution(std::string_view name);
PotentialDistribution parse_potential_distribution(std::string_view name);

/// Independent generator for (seed, trial, stream).
std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream);

Eigen::MatrixXcd sample_coefficients(const EnsembleSpec& spec, int trial);
/// n_sys x n_env potential matrix (rows V_up, V_dn for two states).
Eigen::MatrixXd sample_potential(const EnsembleSpec& spec, int trial);
/// Branches of the normalized state built from sample_coefficients.
std::vector<Branch> sample_branches(const EnsembleSpec& spec, int trial);

/// Random Hermitian matrix rescaled to unit spectral norm.
Eigen::MatrixXcd random_hermitian(int dim, std::uint64_t seed);

// --- statistics -------------------------------------------------------------

/// Pairwise summation with a fixed split, so results do not depend on threading.
double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);
/// Standard error of the mean (sample standard deviation / sqrt(n)); 0 for n < 2.
double standard_error(std::span<const double> values);
/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

// --- scaling study ----------------------------------------------------------

struct ScalingRow {
  int n_env = 0;
  int trials = 0;
  double mean_before = 0.0;
  double stderr_before = 0.0;
  double mean_after = 0.0;
  double stderr_after = 0.0;
};

/// For each N: sample states, measure |rho_updn|, evolve under the sampled
/// diagonal interaction for time t with coupling g, measure again.
std::vector<ScalingRow> run_scaling_study(const EnsembleSpec& base, std::span<const int> n_grid);

// --- validity sweep ---------------------------------------------------------

struct ValiditySweepSpec {
  std::vector<double> g_grid;
  std::vector<double> eta_grid;
  int n_env = 8;
  double t = 1.0;
  double dt = 1e-2;
  std::uint64_t seed = 0;
  std::size_t dimension_cap = kDefaultDimensionCap;
  double omega_up = 0.5;
  double omega_dn = -0.5;

  void validate() const;
};

struct ValidityRow {
  double g = 0.0;
  double eta = 0.0;
  double fidelity = 0.0;
  double transition_residual = 0.0;
};

struct ValidityFixture {
  TotalState initial;
  std::vector<Branch> branches;
  HamiltonianSpec hamiltonian;  ///< g = eta = 0; perturbation attached
};

/// Complex-normal initial state, diagonal h_sys/h_env, uniform01 potentials
/// and a unit-norm random perturbation, all drawn from spec.seed.
ValidityFixture make_validity_fixture(const ValiditySweepSpec& spec);

std::vector<ValidityRow> run_validity_sweep(const ValiditySweepSpec& spec);

}  // namespace pointersim
