#include <pointersim/decoherence.hpp>
#include <pointersim/dynamics.hpp>
#include <pointersim/ensemble.hpp>
#include <pointersim/pointer.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pointersim;

namespace {

Eigen::MatrixXcd sigma_x() {
  Eigen::MatrixXcd q(2, 2);
  q << 0, 1, 1, 0;
  return q;
}

TotalState bell_state(int n = 2) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, n);
  c(0, 0) = std::sqrt(0.5);
  c(1, 1) = std::sqrt(0.5);
  return build_entangled_state(c);
}

TotalState plus_product(int n = 3) {
  Eigen::VectorXcd sys(2);
  sys << std::sqrt(0.5), std::sqrt(0.5);
  Eigen::VectorXcd env = Eigen::VectorXcd::Zero(n);
  env[0] = 1.0;
  return build_product_state(sys, env);
}

void expect_density_invariants(const Eigen::MatrixXcd& rho) {
  EXPECT_NEAR(std::abs(rho.trace() - cplx(1.0)), 0.0, 1e-12);
  EXPECT_LT(hermiticity_defect(rho), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  const double p = purity(rho);
  EXPECT_GE(p, 1.0 / rho.rows() - 1e-12);
  EXPECT_LE(p, 1.0 + 1e-12);
}

// Filtered two-class ensemble: A-class branches point up, B-class down.
std::vector<Branch> filtered_ensemble(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  std::vector<Branch> out;
  double total = 0.0;
  for (int nu = 0; nu < n; ++nu) {
    const bool a = std::bernoulli_distribution(0.5)(rng);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2);
    c[a ? 0 : 1] = 1.0;
    Branch b = make_branch(nu, cplx(nd(rng), nd(rng)), c);
    b.accumulated_phase = ph(rng);
    total += std::norm(b.weight);
    out.push_back(b);
  }
  for (auto& b : out) b.weight /= std::sqrt(total);
  return out;
}

}  // namespace

TEST(ReducedDensity, Examples) {
  Eigen::VectorXcd up(2), env(3);
  up << 1, 0;
  env << 1, 0, 0;
  const auto r1 = reduced_density(build_product_state(up, env));
  EXPECT_NEAR(std::abs(r1(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(r1.cwiseAbs().sum(), 1.0, 1e-15);
  EXPECT_NEAR(purity(r1), 1.0, 1e-15);

  const auto r2 = reduced_density(bell_state());
  EXPECT_LT((r2 - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(offdiag_coherence(r2), 0.0, 1e-15);
  EXPECT_NEAR(purity(r2), 0.5, 1e-15);

  const auto r3 = reduced_density(plus_product());
  EXPECT_NEAR(offdiag_coherence(r3), 0.5, 1e-15);
  EXPECT_NEAR(purity(r3), 1.0, 1e-15);
}

TEST(ReducedDensity, MatchesLoopPartialTraceOnRandomStates) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 3, n = 1 + trial % 11;
    const TotalState s = testsupport::random_state(rng, m, n);
    const Eigen::MatrixXcd rho = reduced_density(s);
    EXPECT_LT((rho - testsupport::partial_trace_env(s.amplitudes(), m, n)).cwiseAbs().maxCoeff(), 1e-14);
    expect_density_invariants(rho);
  }
}

TEST(ReducedDensity, BranchSumsRespectSesquilinearity) {
  // rho of a superposition equals the sum of all pairwise branch cross terms.
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial;
    const TotalState s = testsupport::random_state(rng, 2, n);
    const auto branches = decompose_by_environment(s);
    Eigen::MatrixXcd cross = Eigen::MatrixXcd::Zero(2, 2);
    for (const auto& bi : branches)
      for (const auto& bj : branches) {
        if (bi.env_index != bj.env_index) continue;  // <eps_i|eps_j> = delta_ij
        cross += bi.weight * std::conj(bj.weight) * bi.sys_coeffs * bj.sys_coeffs.adjoint();
      }
    EXPECT_LT((reduced_density(s) - cross).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ExpectationDecomposed, Examples) {
  const TotalState s = [] { std::mt19937_64 r(3); return testsupport::random_state(r, 2, 5); }();
  const auto id = expectation_decomposed(s, Eigen::MatrixXcd::Identity(2, 2));
  EXPECT_NEAR(id.diagonal_part, 1.0, 1e-14);
  EXPECT_NEAR(id.coherent_part, 0.0, 1e-14);

  EXPECT_NEAR(expectation_decomposed(bell_state(), sigma_x()).coherent_part, 0.0, 1e-15);
  const auto px = expectation_decomposed(plus_product(), sigma_x());
  EXPECT_NEAR(px.coherent_part, 1.0, 1e-14);
  EXPECT_NEAR(px.diagonal_part, 0.0, 1e-15);
}

TEST(ExpectationDecomposed, TotalEqualsTraceRhoQ) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 4, n = 1 + trial % 13;
    const TotalState s = testsupport::random_state(rng, m, n);
    const Eigen::MatrixXcd q = testsupport::random_hermitian(rng, m);
    const auto parts = expectation_decomposed(s, q);
    const cplx tr = (testsupport::partial_trace_env(s.amplitudes(), m, n) * q).trace();
    EXPECT_NEAR(parts.total(), tr.real(), 1e-12);
    EXPECT_NEAR(tr.imag(), 0.0, 1e-12);
  }
}

TEST(ExpectationDecomposed, RejectsNonHermitian) {
  Eigen::MatrixXcd q = sigma_x();
  q(0, 1) = cplx(0.0, 1.0);
  EXPECT_THROW(expectation_decomposed(bell_state(), q), DomainError);
}

TEST(ExpectationDecomposed, CoherentPartBoundedByEnvOverlap) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const TotalState s = testsupport::random_state(rng, 2, 1 + trial % 17);
    double nu = 0, nd = 0;
    cplx dot = 0;
    for (int k = 0; k < s.n_env(); ++k) {
      nu += std::norm(s.amp(0, k));
      nd += std::norm(s.amp(1, k));
      dot += std::conj(s.amp(0, k)) * s.amp(1, k);
    }
    nu = std::sqrt(nu);
    nd = std::sqrt(nd);
    const auto ov = env_overlap(s);
    ASSERT_TRUE(ov.has_value());
    EXPECT_NEAR(std::abs(*ov), std::abs(dot) / (nu * nd), 1e-12);
    EXPECT_LE(std::abs(*ov), 1.0 + 1e-12);
    const double coh = expectation_decomposed(s, sigma_x()).coherent_part;
    EXPECT_LE(std::abs(coh), 2.0 * nu * nd * std::abs(*ov) + 1e-12);
  }
}

TEST(Purity, ClosedFormOnDiagonalGrid) {
  for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.01) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
    rho(0, 0) = p;
    rho(1, 1) = 1.0 - p;
    EXPECT_NEAR(purity(rho), p * p + (1 - p) * (1 - p), 1e-12);
  }
  EXPECT_NEAR(purity(Eigen::MatrixXcd::Identity(3, 3) / 3.0), 1.0 / 3.0, 1e-15);
}

TEST(OffdiagCoherence, RequiresTwoByTwo) {
  EXPECT_THROW(offdiag_coherence(Eigen::MatrixXcd::Identity(3, 3) / 3.0), DomainError);
}

TEST(OffdiagCoherence, RandomPhaseScalingLaw) {
  // Relative phase dLambda_nu on the down component of every environment column.
  const std::vector<int> ns = {100, 1000, 10000};
  std::vector<double> xs, lib;
  for (int n : ns) {
    EnsembleSpec e;
    e.n_env = n;
    e.seed = 6;
    const int trials = 200;
    e.n_trials = trials;
    double acc = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      Eigen::MatrixXcd c = sample_coefficients(e, trial);
      auto rng = trial_stream(6, static_cast<std::uint64_t>(trial), 99);
      std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
      cplx direct = 0.0;
      for (int nu = 0; nu < n; ++nu) {
        const double dl = ph(rng);
        c(1, nu) *= std::exp(cplx(0.0, -dl));
        direct += c(0, nu) * std::conj(c(1, nu));
      }
      const double value = offdiag_coherence(reduced_density(build_entangled_state(c)));
      EXPECT_NEAR(value, std::abs(direct), 1e-12);
      acc += value;
    }
    xs.push_back(n);
    lib.push_back(acc / trials);
  }
  EXPECT_NEAR(testsupport::loglog_slope(xs, lib), -0.5, 0.1);
}

TEST(SchmidtEnvVectors, DisjointBasisVectors) {
  Eigen::VectorXcd up(2), dn(2);
  up << 1, 0;
  dn << 0, 1;
  Branch a = make_branch(0, std::sqrt(0.5), up);
  Branch b = make_branch(1, std::sqrt(0.5), dn);
  a.accumulated_phase = 0.4;
  b.accumulated_phase = -1.1;
  const auto sp = schmidt_env_vectors(std::vector<Branch>{a, b}, 2, 40, true);
  ASSERT_FALSE(sp.one_sided());
  EXPECT_NEAR(std::abs((*sp.env_a)[0] - std::exp(cplx(0, -0.4))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs((*sp.env_b)[1] - std::exp(cplx(0, 1.1))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(*sp.overlap), 0.0, 1e-15);
}

TEST(SchmidtEnvVectors, RandomFilteredEnsemblesAreOrthogonal) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial * 3;
    const auto br = filtered_ensemble(rng, n);
    const auto sp = schmidt_env_vectors(br, n, 40, true);
    if (sp.one_sided()) continue;
    EXPECT_NEAR(std::abs(*sp.overlap), 0.0, 1e-12);
    EXPECT_NEAR(sp.weight_a + sp.weight_b, 1.0, 1e-12);
    EXPECT_NEAR(sp.env_a->norm(), 1.0, 1e-12);
  }
}

TEST(SchmidtEnvVectors, OneSidedIsFlagged) {
  Eigen::VectorXcd up(2);
  up << 1, 0;
  const auto sp = schmidt_env_vectors(std::vector<Branch>{make_branch(0, 1.0, up)}, 3, 40, true);
  EXPECT_TRUE(sp.one_sided());
  EXPECT_TRUE(sp.env_a.has_value());
  EXPECT_FALSE(sp.env_b.has_value());
  EXPECT_NEAR(sp.weight_a, 1.0, 1e-15);
}

TEST(SchmidtEnvVectors, InteriorBranchesHandledPerMode) {
  Eigen::VectorXcd mid(2);
  mid << std::sqrt(0.5), std::sqrt(0.5);
  Eigen::VectorXcd up(2);
  up << 1, 0;
  const std::vector<Branch> br = {make_branch(0, std::sqrt(0.5), up), make_branch(1, std::sqrt(0.5), mid)};
  EXPECT_THROW(schmidt_env_vectors(br, 2, 40, true), DomainError);
  const auto sp = schmidt_env_vectors(br, 2, 40, false);
  EXPECT_NEAR(sp.excluded_norm, 0.5, 1e-15);
  EXPECT_TRUE(sp.one_sided());
}

TEST(SchmidtEnvVectors, PerturbationLeakageBoundsOverlap) {
  // Disjoint supports evolve exactly; the overlap is bounded by the weight that
  // leaves each support, measured directly on the evolved amplitudes.
  ValiditySweepSpec vs;
  vs.seed = 8;
  vs.g_grid = {1.0};
  vs.eta_grid = {0.0};
  const ValidityFixture fx = make_validity_fixture(vs);
  const int n = 8;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, n);
  std::mt19937_64 rng(9);
  const Eigen::MatrixXcd r = testsupport::random_complex(rng, 2, n);
  for (int nu = 0; nu < n; ++nu) c(nu < n / 2 ? 0 : 1, nu) = r(0, nu);
  c /= c.norm();
  const TotalState s0 = build_entangled_state(c);
  ASSERT_NEAR(std::abs(*env_overlap(s0)), 0.0, 1e-15);

  HamiltonianSpec h = fx.hamiltonian;
  h.g = 1.0;
  for (double eta : {0.0, 1e-3, 1e-2, 1e-1}) {
    h.eta = eta;
    double prev = -1.0;
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const TotalState st = exact_evolve(s0, h, t);
      double in_a = 0, out_a = 0, in_b = 0, out_b = 0;
      for (int nu = 0; nu < n; ++nu) {
        (nu < n / 2 ? in_a : out_a) += std::norm(st.amp(0, nu));
        (nu >= n / 2 ? in_b : out_b) += std::norm(st.amp(1, nu));
      }
      const double ra = std::sqrt(out_a / (in_a + out_a)), rb = std::sqrt(out_b / (in_b + out_b));
      const double ov = std::abs(*env_overlap(st));
      EXPECT_LE(ov, ra + rb + ra * rb + 1e-12) << eta << " " << t;
      if (eta == 0.0) {
        EXPECT_LT(ov, 1e-14);
      } else {
        EXPECT_LT(ov, 10.0 * eta * t);
        if (t <= 0.5) EXPECT_GT(ov, prev);
      }
      prev = ov;
    }
  }
}

TEST(AssembleBranchState, RoundTripsDecomposition) {
  std::mt19937_64 rng(10);
  const TotalState s = testsupport::random_state(rng, 2, 9);
  const auto br = decompose_by_environment(s);
  EXPECT_LT(testsupport::max_abs_diff(assemble_branch_state(br, 2, 9).amplitudes(), s.amplitudes()), 1e-14);
  EXPECT_THROW(assemble_branch_state(std::vector<Branch>{}, 2, 9), DomainError);
}

TEST(MakeReport, FieldsAreConsistent) {
  const auto rep = make_report(plus_product(), std::nullopt, 0.25);
  EXPECT_NEAR(rep.offdiag_mag, 0.5, 1e-15);
  EXPECT_NEAR(rep.purity, 1.0, 1e-15);
  EXPECT_FALSE(rep.env_overlap.has_value());
  EXPECT_EQ(rep.lost_norm, 0.25);
}
