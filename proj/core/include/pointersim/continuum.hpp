// continuum.hpp: 1D grid wavefunction and position-branch dephasing
//
// The domain is periodic: x_j = x_min + j dx, j = 0..n-1, dx = (x_max - x_min) / n.
// Free evolution is exact in momentum space; combined evolution with a
// potential uses second-order (Strang) splitting.

#pragma once

#include <pointersim/common.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pointersim {

inline constexpr double kGridNormTolerance = 1e-10;

struct GridWavefunction {
  double x_min = 0.0;
  double x_max = 1.0;
  Eigen::VectorXcd values;
  double mass = 1.0;

  int n_points() const noexcept { return static_cast<int>(values.size()); }
  double length() const noexcept { return x_max - x_min; }
  double dx() const noexcept { return length() / n_points(); }
  double x(int j) const noexcept { return x_min + j * dx(); }
  /// sum |psi_j|^2 dx
  double norm2() const;
  Eigen::VectorXd density() const;
  /// Shape and mass checks; with `require_normalized` also the unit-norm invariant.
  void validate(bool require_normalized = true) const;
};

struct PotentialSample {
  Eigen::VectorXd v;
  std::uint64_t realization_seed = 0;
};

struct WavepacketSpec {
  double x_min = -40.0;
  double x_max = 40.0;
  int n_points = 1024;
  double mass = 1.0;
  double sigma0 = 1.0;          ///< initial position-density width of each packet
  std::vector<double> centers;  ///< one equal-weight Gaussian per center

  void validate() const;
};

/// Normalized equal-weight sum of real Gaussians exp(-(x-c)^2 / (4 sigma0^2)).
/// Every center must sit at least 5 sigma0 from the periodic wrap point.
GridWavefunction gaussian_packets(const WavepacketSpec& spec);

/// sqrt(sigma0^2 + (t / (2 m sigma0))^2)
double free_gaussian_width(double sigma0, double mass, double t);

GridWavefunction evolve_free(const GridWavefunction& psi, double t);

/// Strang splitting of exp(-i (T + g V) t) with n = ceil(t / dt) equal steps.
GridWavefunction evolve_split(const GridWavefunction& psi, const PotentialSample& v, double g, double t, double dt);

/// t * sum_j V_j |psi_j|^2 dx
double lambda_functional(const GridWavefunction& psi, const PotentialSample& v, double t);

/// V(x) = sum_{j=1..n_modes} u_j cos(2 pi j (x - x_min) / L + phi_j), u_j ~ U[0,1), phi_j ~ U[0, 2 pi).
/// The profile depends on the grid only through where it is sampled.
PotentialSample grid_potential(const GridWavefunction& grid, std::uint64_t realization_seed, int n_modes = 2);

/// `count` independent realizations derived from `seed`.
std::vector<PotentialSample> random_potentials(const GridWavefunction& grid, std::uint64_t seed, int count,
                                               int n_modes = 2);

/// Realization-averaged density of exp(-i g V_r t) psi, optionally followed by
/// free evolution for `observe_after` so that the phase imprint can show up in
/// the position density.
Eigen::VectorXd dephase_position_branches(const GridWavefunction& psi, std::span<const PotentialSample> realizations,
                                          double g, double t, double observe_after = 0.0);

/// |mean_r sum_j rho_j exp(-i g t (V_r(x_j + shift) - V_r(x_j))) dx| for a
/// single normalized packet: the ensemble-averaged overlap between the packet
/// and its copy displaced by `shift_points` grid points, each carrying its own
/// potential phase.
double displaced_coherence(const GridWavefunction& packet, int shift_points,
                           std::span<const PotentialSample> realizations, double g, double t);

/// sqrt of the second central moment of a density sampled on `grid`
double density_width(const GridWavefunction& grid, const Eigen::VectorXd& density);
/// sum rho_j^2 dx
double inverse_participation(const GridWavefunction& grid, const Eigen::VectorXd& density);

/// Relative amplitude of the density's Fourier component at the free
/// two-Gaussian fringe wavenumber k_f(t), taken over one fringe period centred
/// between the outermost packets (rounded to a whole number of grid points): 2 |sum rho_j exp(-i k_f x_j)| / sum rho_j.
/// A density 1 + V cos(k_f x) gives V. Empty with fewer than two packets or
/// when one fringe period does not fit in half the domain (including t = 0).
std::optional<double> fringe_visibility(const WavepacketSpec& packets, const Eigen::VectorXd& density, double t);

struct CompetitionSpec {
  WavepacketSpec packets;
  int n_realizations = 200;
  int n_modes = 2;
  std::uint64_t seed = 0;
  std::vector<double> g_grid;
  std::vector<double> t_grid;
  double dt = 0.025;

  void validate() const;
};

struct CompetitionRow {
  double g = 0.0;
  double t = 0.0;
  double width = 0.0;
  double ipr = 0.0;
  std::optional<double> visibility;
};

struct CompetitionResult {
  std::vector<CompetitionRow> rows;
  /// Averaged density for every row, same order.
  std::vector<Eigen::VectorXd> densities;
  GridWavefunction initial;
};

/// One row per (g, t), g outer. Each row averages the combined-evolution
/// density over the potential realizations.
CompetitionResult competition_experiment(const CompetitionSpec& spec);

}  // namespace pointersim
