// pointer.hpp: stationary-phase selection over the branch mixing angle
//
// For time-independent frames the accumulated phase of a branch with mixing
// angle theta is
//   Lambda(theta) = t * g * (cos^2(theta) V_up + sin^2(theta) V_dn),
// whose only extrema on [0, pi/2] are the endpoints. Branches are binned by
// theta and the phasors |alpha_nu| exp(-i Lambda_nu) are summed coherently
// within each bin; the survival score compares that coherent sum with the
// fully aligned value sum |alpha_nu|.

#pragma once

#include <pointersim/common.hpp>
#include <pointersim/hilbert.hpp>

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace pointersim {

struct LambdaLandscape {
  std::vector<double> theta_grid;
  std::vector<double> lambda_of_theta;
  double t = 0.0;
  double g = 0.0;
  double v_up = 0.0;
  double v_dn = 0.0;
};

double landscape_value(double v_up, double v_dn, double g, double t, double theta);
/// Analytic dLambda/dtheta = g t (V_dn - V_up) sin(2 theta).
double landscape_slope(double v_up, double v_dn, double g, double t, double theta);
/// Central finite difference of landscape_value with step h (also valid at the endpoints).
double landscape_slope_fd(double v_up, double v_dn, double g, double t, double theta, double h);

/// Uniform grid over [0, pi/2] including both endpoints; grid_size >= 3.
LambdaLandscape lambda_landscape(double v_up, double v_dn, double g, double t, int grid_size);

struct Stationarity {
  bool degenerate = false;     ///< every theta is stationary; `points` is then empty
  std::vector<double> points;  ///< ascending
};

/// Boundary extrema are always reported. Interior points are reported where
/// the central difference vanishes within tol or changes sign.
Stationarity stationarity_points(const LambdaLandscape& landscape, double tol);

struct SurvivalHistogram {
  std::vector<double> bin_edges;       ///< n_bins + 1 edges over [0, pi/2]
  std::vector<cplx> coherent_sum;      ///< sum |alpha_nu| exp(-i Lambda_nu)
  std::vector<double> incoherent_sum;  ///< sum |alpha_nu|^2
  std::vector<double> amplitude_sum;   ///< sum |alpha_nu|
  std::vector<int> counts;
  std::vector<double> survival_score;  ///< |coherent|^2 / amplitude_sum^2, 0 for empty bins

  int n_bins() const noexcept { return static_cast<int>(counts.size()); }
  double bin_width() const noexcept { return kHalfPi / n_bins(); }
  /// theta = pi/2 falls into the last bin.
  int bin_of(double theta) const noexcept;
};

inline constexpr int kDefaultBins = 40;
inline constexpr double kDefaultSurvivalThreshold = 0.5;

SurvivalHistogram interference_survival(std::span<const Branch> branches, int n_bins = kDefaultBins);

struct DegeneracyReport {
  std::vector<int> flagged;  ///< sectors with |V_up - V_dn| < tol
  double tol = 0.0;
  bool is_flagged(int nu) const;
};

/// 1e-9 * max |V| over both arrays.
double default_degeneracy_tolerance(const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn);

DegeneracyReport degeneracy_check(const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn, double tol);

struct PointerSelection {
  std::vector<Branch> survivors;  ///< original weights kept
  std::vector<int> kept_bins;
  std::vector<int> non_selecting;  ///< input sectors flagged as degenerate
  double lost_norm = 0.0;          ///< sum |alpha|^2 removed by the filter
};

/// Keeps the branches of every bin whose survival score is >= threshold.
PointerSelection filter_pointer_branches(const SurvivalHistogram& hist, std::span<const Branch> branches,
                                         double threshold = kDefaultSurvivalThreshold,
                                         const DegeneracyReport* degeneracy = nullptr);

}  // namespace pointersim
