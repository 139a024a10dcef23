// Shared generators and reference computations for the test suites.
//
// The reference routines deliberately avoid the library's own kernels:
// matrix exponentials use scaled Taylor series, partial traces and phasor
// sums are written as plain loops.

#pragma once

#include <pointersim/common.hpp>
#include <pointersim/hilbert.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace testsupport {

using pointersim::cplx;

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx{re, im};
    }
  return m;
}

inline Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
  const Eigen::MatrixXcd x = random_complex(rng, dim, dim);
  return scale * 0.5 * (x + x.adjoint());
}

inline pointersim::TotalState random_state(std::mt19937_64& rng, int m, int n) {
  Eigen::MatrixXcd c = random_complex(rng, m, n);
  c /= c.norm();
  Eigen::VectorXcd amps(m * n);
  for (int s = 0; s < m; ++s)
    for (int nu = 0; nu < n; ++nu) amps[s * n + nu] = c(s, nu);
  return pointersim::TotalState(m, n, amps);
}

/// exp(-i H t) by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& h, double t) {
  const Eigen::Index d = h.rows();
  const Eigen::MatrixXcd a = cplx{0.0, -t} * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.25) {
    scaled *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXcd b = a / std::pow(2.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// rho[s][s'] = sum_nu amp(s, nu) conj(amp(s', nu)), written out directly.
inline Eigen::MatrixXcd partial_trace_env(const Eigen::VectorXcd& amps, int m, int n) {
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(m, m);
  for (int s = 0; s < m; ++s)
    for (int sp = 0; sp < m; ++sp)
      for (int nu = 0; nu < n; ++nu) rho(s, sp) += amps[s * n + nu] * std::conj(amps[sp * n + nu]);
  return rho;
}

inline double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Least-squares slope of log y against log x, computed independently of the library.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsupport
