#include <pointersim/pointer.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace pointersim {

double landscape_value(double v_up, double v_dn, double g, double t, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return t * g * (c * c * v_up + s * s * v_dn);
}

double landscape_slope(double v_up, double v_dn, double g, double t, double theta) {
  return g * t * (v_dn - v_up) * std::sin(2.0 * theta);
}

double landscape_slope_fd(double v_up, double v_dn, double g, double t, double theta, double h) {
  return (landscape_value(v_up, v_dn, g, t, theta + h) - landscape_value(v_up, v_dn, g, t, theta - h)) /
         (2.0 * h);
}

LambdaLandscape lambda_landscape(double v_up, double v_dn, double g, double t, int grid_size) {
  if (grid_size < 3) throw DomainError("lambda_landscape: grid_size must be >= 3");
  LambdaLandscape out;
  out.t = t;
  out.g = g;
  out.v_up = v_up;
  out.v_dn = v_dn;
  out.theta_grid.resize(static_cast<std::size_t>(grid_size));
  out.lambda_of_theta.resize(static_cast<std::size_t>(grid_size));
  const double h = kHalfPi / (grid_size - 1);
  for (int k = 0; k < grid_size; ++k) {
    const double theta = (k == grid_size - 1) ? kHalfPi : k * h;
    out.theta_grid[static_cast<std::size_t>(k)] = theta;
    out.lambda_of_theta[static_cast<std::size_t>(k)] = landscape_value(v_up, v_dn, g, t, theta);
  }
  // Pin the endpoints to the exact products so Lambda(0) and Lambda(pi/2) carry no cos/sin rounding.
  out.lambda_of_theta.front() = t * g * v_up;
  out.lambda_of_theta.back() = t * g * v_dn;
  return out;
}

Stationarity stationarity_points(const LambdaLandscape& landscape, double tol) {
  const auto& theta = landscape.theta_grid;
  const auto& lam = landscape.lambda_of_theta;
  const std::size_t n = theta.size();
  if (n < 3 || lam.size() != n) throw DomainError("stationarity_points: landscape needs >= 3 samples");

  Stationarity out;
  const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
  if (std::abs(landscape.v_up - landscape.v_dn) <= tol || (*hi - *lo) <= tol) {
    out.degenerate = true;
    return out;
  }

  out.points.push_back(theta.front());
  std::vector<double> slope(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) slope[k] = (lam[k + 1] - lam[k - 1]) / (theta[k + 1] - theta[k - 1]);

  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (std::abs(slope[k]) <= tol) {
      out.points.push_back(theta[k]);
      continue;
    }
    const std::size_t next = k + 1;
    if (next + 1 < n && std::abs(slope[next]) > tol && (slope[k] > 0.0) != (slope[next] > 0.0)) {
      const double w = slope[k] / (slope[k] - slope[next]);
      out.points.push_back(theta[k] + w * (theta[next] - theta[k]));
    }
  }
  out.points.push_back(theta.back());
  return out;
}

int SurvivalHistogram::bin_of(double theta) const noexcept {
  const int nb = n_bins();
  const int k = static_cast<int>(std::floor(theta / bin_width()));
  return std::clamp(k, 0, nb - 1);
}

SurvivalHistogram interference_survival(std::span<const Branch> branches, int n_bins) {
  if (n_bins < 2) throw DomainError("interference_survival: n_bins must be >= 2");
  SurvivalHistogram h;
  const auto nb = static_cast<std::size_t>(n_bins);
  h.bin_edges.resize(nb + 1);
  for (std::size_t k = 0; k <= nb; ++k) h.bin_edges[k] = kHalfPi * static_cast<double>(k) / n_bins;
  h.bin_edges.back() = kHalfPi;
  h.coherent_sum.assign(nb, cplx{0.0, 0.0});
  h.incoherent_sum.assign(nb, 0.0);
  h.amplitude_sum.assign(nb, 0.0);
  h.counts.assign(nb, 0);
  h.survival_score.assign(nb, 0.0);

  for (const Branch& b : branches) {
    const auto k = static_cast<std::size_t>(h.bin_of(b.mixing_angle));
    const double r = std::abs(b.weight);
    h.coherent_sum[k] += std::polar(r, -b.accumulated_phase);
    h.incoherent_sum[k] += r * r;
    h.amplitude_sum[k] += r;
    h.counts[k] += 1;
  }
  for (std::size_t k = 0; k < nb; ++k) {
    if (h.amplitude_sum[k] > 0.0) {
      h.survival_score[k] = std::norm(h.coherent_sum[k]) / (h.amplitude_sum[k] * h.amplitude_sum[k]);
    }
  }
  return h;
}

bool DegeneracyReport::is_flagged(int nu) const {
  return std::binary_search(flagged.begin(), flagged.end(), nu);
}

double default_degeneracy_tolerance(const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn) {
  double scale = 0.0;
  if (v_up.size() > 0) scale = std::max(scale, v_up.cwiseAbs().maxCoeff());
  if (v_dn.size() > 0) scale = std::max(scale, v_dn.cwiseAbs().maxCoeff());
  return 1e-9 * scale;
}

DegeneracyReport degeneracy_check(const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn, double tol) {
  if (v_up.size() != v_dn.size()) throw DomainError("degeneracy_check: V_up and V_dn lengths differ");
  DegeneracyReport r;
  r.tol = tol;
  for (Eigen::Index nu = 0; nu < v_up.size(); ++nu) {
    if (std::abs(v_up[nu] - v_dn[nu]) < tol || (tol == 0.0 && v_up[nu] == v_dn[nu])) {
      r.flagged.push_back(static_cast<int>(nu));
    }
  }
  return r;
}

PointerSelection filter_pointer_branches(const SurvivalHistogram& hist, std::span<const Branch> branches,
                                         double threshold, const DegeneracyReport* degeneracy) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw DomainError("filter_pointer_branches: threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
  PointerSelection out;
  for (int k = 0; k < hist.n_bins(); ++k) {
    if (hist.counts[static_cast<std::size_t>(k)] > 0 && hist.survival_score[static_cast<std::size_t>(k)] >= threshold) {
      out.kept_bins.push_back(k);
    }
  }
  double total = 0.0;
  double kept = 0.0;
  for (const Branch& b : branches) {
    const double w = std::norm(b.weight);
    total += w;
    if (degeneracy != nullptr && degeneracy->is_flagged(b.env_index)) out.non_selecting.push_back(b.env_index);
    if (std::binary_search(out.kept_bins.begin(), out.kept_bins.end(), hist.bin_of(b.mixing_angle))) {
      out.survivors.push_back(b);
      kept += w;
    }
  }
  out.lost_norm = std::max(0.0, total - kept);
  return out;
}

}  // namespace pointersim
