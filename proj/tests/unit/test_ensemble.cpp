#include <pointersim/decoherence.hpp>
#include <pointersim/ensemble.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

using namespace pointersim;

namespace {

EnsembleSpec base_spec(int n, int trials, std::uint64_t seed) {
  EnsembleSpec e;
  e.n_env = n;
  e.n_trials = trials;
  e.seed = seed;
  return e;
}

bool bitwise_equal(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(), [](cplx x, cplx y) {
           return std::memcmp(&x, &y, sizeof(cplx)) == 0;
         });
}

// |sum_nu c_up,nu conj(c_dn,nu) exp(-i g t (V_up,nu - V_dn,nu))| evaluated directly.
double direct_offdiag(const Eigen::MatrixXcd& c, const Eigen::MatrixXd& v, double gt) {
  cplx acc = 0.0;
  for (Eigen::Index nu = 0; nu < c.cols(); ++nu) {
    acc += c(0, nu) * std::conj(c(1, nu)) * std::exp(cplx(0.0, -gt * (v(0, nu) - v(1, nu))));
  }
  return std::abs(acc);
}

}  // namespace

TEST(TrialStream, Deterministic) {
  auto a = trial_stream(1, 2, 3);
  auto b = trial_stream(1, 2, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  auto c = trial_stream(1, 3, 3);
  auto d = trial_stream(1, 2, 4);
  auto e = trial_stream(1, 2, 3);
  const auto x = e();
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(SampleCoefficients, DeterministicAndNormalized) {
  for (auto dist : {CoefficientDistribution::complex_normal, CoefficientDistribution::uniform_phase_equal_modulus}) {
    EnsembleSpec e = base_spec(37, 5, 11);
    e.coeff_dist = dist;
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = sample_coefficients(e, trial);
      EXPECT_TRUE(bitwise_equal(a, sample_coefficients(e, trial)));
      EXPECT_NEAR(a.norm(), 1.0, 1e-14);
      EXPECT_EQ(a.rows(), 2);
      EXPECT_EQ(a.cols(), 37);
    }
    EXPECT_FALSE(bitwise_equal(sample_coefficients(e, 0), sample_coefficients(e, 1)));
  }
}

TEST(SampleCoefficients, EqualModulusSharesPhaseWithinColumn) {
  EnsembleSpec e = base_spec(20, 1, 12);
  e.coeff_dist = CoefficientDistribution::uniform_phase_equal_modulus;
  const auto c = sample_coefficients(e, 0);
  for (int s = 0; s < 2; ++s)
    for (int nu = 0; nu < 20; ++nu) {
      EXPECT_NEAR(std::abs(c(s, nu)), 1.0 / std::sqrt(40.0), 1e-15);
      EXPECT_NEAR(std::abs(c(s, nu) - c(0, nu)), 0.0, 1e-15);
    }
  EXPECT_NEAR(offdiag_coherence(reduced_density(build_entangled_state(c))), 0.5, 1e-14);
}

TEST(SampleCoefficients, ComplexNormalMixingAngleMarginal) {
  // Each column is a pair of i.i.d. complex Gaussians, so cos^2 theta ~ Beta(1, 1).
  EnsembleSpec e = base_spec(10000, 1, 13);
  double acc = 0.0;
  for (const auto& b : sample_branches(e, 0)) acc += std::pow(std::cos(b.mixing_angle), 2);
  EXPECT_NEAR(acc / 1e4, 0.5, 0.02);
}

TEST(SampleCoefficients, TrialOutOfRange) {
  EnsembleSpec e = base_spec(3, 2, 0);
  EXPECT_THROW(sample_coefficients(e, 2), DomainError);
  EXPECT_THROW(sample_coefficients(e, -1), DomainError);
}

TEST(SamplePotential, Distributions) {
  EnsembleSpec e = base_spec(500, 3, 14);
  const auto v = sample_potential(e, 1);
  EXPECT_GE(v.minCoeff(), 0.0);
  EXPECT_LT(v.maxCoeff(), 1.0);
  EXPECT_NEAR(v.mean(), 0.5, 0.05);
  e.potential_dist = PotentialDistribution::two_level;
  e.v_up = 2.5;
  e.v_dn = -1.0;
  const auto w = sample_potential(e, 1);
  EXPECT_TRUE((w.row(0).array() == 2.5).all());
  EXPECT_TRUE((w.row(1).array() == -1.0).all());
}

TEST(SampleBranches, TrialIndependenceUnderReordering) {
  EnsembleSpec e = base_spec(64, 10, 15);
  std::vector<Eigen::MatrixXcd> forward;
  for (int t = 0; t < 10; ++t) forward.push_back(sample_coefficients(e, t));
  std::vector<int> order(10);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(order.begin(), order.end(), rng);
  for (int t : order) {
    EXPECT_TRUE(bitwise_equal(sample_coefficients(e, t), forward[static_cast<std::size_t>(t)]));
    EXPECT_TRUE(bitwise_equal(sample_potential(e, t).cast<cplx>(), sample_potential(e, t).cast<cplx>()));
  }
  // A larger trial count does not change earlier trials.
  EnsembleSpec bigger = e;
  bigger.n_trials = 1000;
  EXPECT_TRUE(bitwise_equal(sample_coefficients(bigger, 3), forward[3]));
}

TEST(SampleBranches, EnvironmentRelabelingInvariance) {
  // Complex normal entries: column statistics do not depend on the index.
  EnsembleSpec e = base_spec(8, 4000, 16);
  std::vector<double> first(8, 0.0);
  for (int t = 0; t < e.n_trials; ++t) {
    const auto c = sample_coefficients(e, t);
    for (int nu = 0; nu < 8; ++nu) first[static_cast<std::size_t>(nu)] += c.col(nu).squaredNorm();
  }
  for (double f : first) EXPECT_NEAR(f / e.n_trials, 1.0 / 8, 0.01);
}

TEST(RandomHermitian, UnitSpectralNorm) {
  const auto h = random_hermitian(12, 17);
  EXPECT_LT(hermiticity_defect(h), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  EXPECT_NEAR(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0, 1e-12);
  EXPECT_TRUE(bitwise_equal(h, random_hermitian(12, 17)));
}

TEST(Statistics, PairwiseSumAndMoments) {
  std::vector<double> v(1000);
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& x : v) x = u(rng);
  long double ref = 0.0L;
  for (double x : v) ref += x;
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-12);
  EXPECT_NEAR(mean(v), static_cast<double>(ref / 1000), 1e-15);
  const double m = static_cast<double>(ref / 1000);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  EXPECT_NEAR(standard_error(v), std::sqrt(ss / 999) / std::sqrt(1000.0), 1e-14);
  EXPECT_EQ(standard_error(std::vector<double>{3.0}), 0.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);

  // The reduction tree is fixed: identical input gives identical bits.
  const double s1 = pairwise_sum(v), s2 = pairwise_sum(v);
  EXPECT_EQ(std::memcmp(&s1, &s2, sizeof s1), 0);
}

TEST(Statistics, LogLogSlope) {
  const std::vector<double> x = {1, 10, 100, 1000};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * std::pow(xi, -0.5));
  EXPECT_NEAR(fit_loglog_slope(x, y), -0.5, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(x, y), testsupport::loglog_slope(x, y), 1e-12);
  EXPECT_THROW(fit_loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
}

TEST(ScalingStudy, ZeroCouplingLeavesCoherence) {
  EnsembleSpec e = base_spec(1, 20, 19);
  e.g = 0.0;
  e.t = 5.0;
  const std::vector<int> ns = {10, 100};
  for (const auto& row : run_scaling_study(e, ns)) {
    EXPECT_NEAR(row.mean_before, row.mean_after, 1e-13);
    EXPECT_EQ(row.trials, 20);
  }
}

TEST(ScalingStudy, PipelineMatchesDirectCoherentSum) {
  EnsembleSpec e = base_spec(1, 100, 20);
  e.coeff_dist = CoefficientDistribution::uniform_phase_equal_modulus;
  e.g = 1.0;
  e.t = 1e3;
  const std::vector<int> ns = {1000};
  const auto rows = run_scaling_study(e, ns);
  ASSERT_EQ(rows.size(), 1u);
  EnsembleSpec at = e;
  at.n_env = 1000;
  std::vector<double> after;
  for (int t = 0; t < 100; ++t) after.push_back(direct_offdiag(sample_coefficients(at, t), sample_potential(at, t), e.g * e.t));
  double ref = 0.0;
  for (double a : after) ref += a;
  EXPECT_NEAR(rows[0].mean_after, ref / 100, 1e-12);
  EXPECT_NEAR(rows[0].mean_before, 0.5, 1e-12);
  EXPECT_LT(rows[0].mean_after / rows[0].mean_before, 0.1);
}

TEST(ScalingStudy, AfterFollowsInverseSquareRoot) {
  EnsembleSpec e = base_spec(1, 100, 21);
  e.coeff_dist = CoefficientDistribution::uniform_phase_equal_modulus;
  e.g = 1.0;
  e.t = 1e3;
  const std::vector<int> ns = {10, 30, 100, 300, 1000};
  const auto rows = run_scaling_study(e, ns);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.n_env);
    y.push_back(r.mean_after);
    EXPECT_GT(r.stderr_after, 0.0);
  }
  EXPECT_NEAR(testsupport::loglog_slope(x, y), -0.5, 0.1);
}

TEST(ScalingStudy, RejectsBadInput) {
  EnsembleSpec e = base_spec(1, 1, 0);
  EXPECT_THROW(run_scaling_study(e, std::vector<int>{}), DomainError);
  EXPECT_THROW(run_scaling_study(e, std::vector<int>{0}), DomainError);
  e.n_sys = 3;
  EXPECT_THROW(run_scaling_study(e, std::vector<int>{4}), DomainError);
}

TEST(ValiditySweep, ZeroCouplingIsExact) {
  ValiditySweepSpec v;
  v.g_grid = {0.0};
  v.eta_grid = {0.0};
  v.seed = 22;
  const auto rows = run_validity_sweep(v);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].fidelity, 1.0, 1e-10);
  EXPECT_EQ(rows[0].transition_residual, 0.0);
}

TEST(ValiditySweep, FidelityMonotoneInCouplingAndResidualZero) {
  ValiditySweepSpec v;
  v.g_grid = {0.0, 0.05, 0.1, 0.2, 0.4};
  v.eta_grid = {0.0};
  v.seed = 23;
  const auto rows = run_validity_sweep(v);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].transition_residual, 0.0);
    if (i > 0) EXPECT_LE(rows[i].fidelity, rows[i - 1].fidelity + 1e-12);
  }
  EXPECT_LT(rows.back().fidelity, 1.0);
}

TEST(ValiditySweep, PerturbationRaisesResidual) {
  ValiditySweepSpec v;
  v.g_grid = {0.1};
  v.eta_grid = {0.0, 0.1};
  v.seed = 24;
  const auto rows = run_validity_sweep(v);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].transition_residual, 0.0);
  EXPECT_GT(rows[1].transition_residual, 0.0);
}

TEST(ValiditySweep, DimensionCap) {
  ValiditySweepSpec v;
  v.g_grid = {0.1};
  v.eta_grid = {0.0};
  v.n_env = 2049;
  EXPECT_THROW(run_validity_sweep(v), CapError);
  try {
    run_validity_sweep(v);
  } catch (const CapError& e) {
    EXPECT_NE(std::string(e.what()).find("4098"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("4096"), std::string::npos);
  }
}

TEST(ValiditySweep, Reproducible) {
  ValiditySweepSpec v;
  v.g_grid = {0.1, 0.2};
  v.eta_grid = {0.0, 0.05};
  v.seed = 25;
  const auto a = run_validity_sweep(v), b = run_validity_sweep(v);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].fidelity, b[i].fidelity);
    EXPECT_EQ(a[i].transition_residual, b[i].transition_residual);
  }
}
