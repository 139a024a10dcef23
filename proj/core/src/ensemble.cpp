#include <pointersim/ensemble.hpp>

#include <pointersim/decoherence.hpp>
#include <pointersim/dynamics.hpp>

#include <cmath>
#include <string>

namespace pointersim {

namespace {

constexpr std::uint64_t kCoefficientStream = 0x636f656666ULL;  // "coeff"
constexpr std::uint64_t kPotentialStream = 0x706f74ULL;        // "pot"

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double pairwise_sum_range(const double* first, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += first[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(first, half) + pairwise_sum_range(first + half, n - half);
}

}  // namespace

void EnsembleSpec::validate() const {
  if (n_sys < 2) throw DomainError("EnsembleSpec: n_sys must be >= 2");
  if (n_env < 1) throw DomainError("EnsembleSpec: n_env must be >= 1");
  if (n_trials < 1) throw DomainError("EnsembleSpec: n_trials must be >= 1");
  if (!(g >= 0.0)) throw DomainError("EnsembleSpec: g must be >= 0");
  if (!(t >= 0.0)) throw DomainError("EnsembleSpec: t must be >= 0");
}

std::string_view to_string(CoefficientDistribution d) {
  switch (d) {
    case CoefficientDistribution::complex_normal: return "complex-normal-normalized";
    case CoefficientDistribution::uniform_phase_equal_modulus: return "uniform-phase-equal-modulus";
  }
  return "?";
}

std::string_view to_string(PotentialDistribution d) {
  switch (d) {
    case PotentialDistribution::uniform01: return "uniform01";
    case PotentialDistribution::two_level: return "two-level";
  }
  return "?";
}

CoefficientDistribution parse_coefficient_distribution(std::string_view name) {
  if (name == "complex-normal-normalized") return CoefficientDistribution::complex_normal;
  if (name == "uniform-phase-equal-modulus") return CoefficientDistribution::uniform_phase_equal_modulus;
  throw DomainError("unknown coefficient distribution '" + std::string(name) + "'");
}

PotentialDistribution parse_potential_distribution(std::string_view name) {
  if (name == "uniform01") return PotentialDistribution::uniform01;
  if (name == "two-level") return PotentialDistribution::two_level;
  throw DomainError("unknown potential distribution '" + std::string(name) + "'");
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x51ed27ULL) ^ splitmix64(stream));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXcd sample_coefficients(const EnsembleSpec& spec, int trial) {
  spec.validate();
  if (trial < 0 || trial >= spec.n_trials) {
    throw DomainError("sample_coefficients: trial " + std::to_string(trial) + " outside [0, n_trials)");
  }
  auto rng = trial_stream(spec.seed, static_cast<std::uint64_t>(trial), kCoefficientStream);
  Eigen::MatrixXcd c(spec.n_sys, spec.n_env);
  switch (spec.coeff_dist) {
    case CoefficientDistribution::complex_normal: {
      std::normal_distribution<double> normal(0.0, 1.0);
      // Column-major fill: sector by sector.
      for (int nu = 0; nu < spec.n_env; ++nu)
        for (int s = 0; s < spec.n_sys; ++s) {
          const double re = normal(rng);
          const double im = normal(rng);
          c(s, nu) = cplx{re, im};
        }
      break;
    }
    case CoefficientDistribution::uniform_phase_equal_modulus: {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      for (int nu = 0; nu < spec.n_env; ++nu) {
        const cplx p = std::polar(1.0, phase(rng));
        for (int s = 0; s < spec.n_sys; ++s) c(s, nu) = p;
      }
      break;
    }
  }
  return c / c.norm();
}

Eigen::MatrixXd sample_potential(const EnsembleSpec& spec, int trial) {
  spec.validate();
  Eigen::MatrixXd v(spec.n_sys, spec.n_env);
  switch (spec.potential_dist) {
    case PotentialDistribution::uniform01: {
      auto rng = trial_stream(spec.seed, static_cast<std::uint64_t>(trial), kPotentialStream);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int nu = 0; nu < spec.n_env; ++nu)
        for (int s = 0; s < spec.n_sys; ++s) v(s, nu) = u(rng);
      break;
    }
    case PotentialDistribution::two_level: {
      v.setZero();
      v.row(0).setConstant(spec.v_up);
      v.row(1).setConstant(spec.v_dn);
      break;
    }
  }
  return v;
}

std::vector<Branch> sample_branches(const EnsembleSpec& spec, int trial) {
  return decompose_by_environment(build_entangled_state(sample_coefficients(spec, trial)));
}

Eigen::MatrixXcd random_hermitian(int dim, std::uint64_t seed) {
  if (dim < 1) throw DomainError("random_hermitian: dim must be >= 1");
  auto rng = trial_stream(seed, 0, 0x68657270ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd x(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      x(i, j) = cplx{re, im};
    }
  Eigen::MatrixXcd h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("random_hermitian: eigendecomposition failed");
  const double spectral = solver.eigenvalues().cwiseAbs().maxCoeff();
  h /= spectral;
  return 0.5 * (h + h.adjoint());
}

double pairwise_sum(std::span<const double> values) { return pairwise_sum_range(values.data(), values.size()); }

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mu = mean(values);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mu) * (values[i] - mu);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_loglog_slope: need >= 2 matching points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_loglog_slope: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

std::vector<ScalingRow> run_scaling_study(const EnsembleSpec& base, std::span<const int> n_grid) {
  base.validate();
  if (base.n_sys != 2) throw DomainError("run_scaling_study: requires n_sys = 2");
  if (n_grid.empty()) throw DomainError("run_scaling_study: empty N grid");
  std::vector<ScalingRow> rows;
  rows.reserve(n_grid.size());
  for (int n : n_grid) {
    EnsembleSpec spec = base;
    spec.n_env = n;
    spec.validate();
    std::vector<double> before(static_cast<std::size_t>(spec.n_trials));
    std::vector<double> after(static_cast<std::size_t>(spec.n_trials));
    for (int trial = 0; trial < spec.n_trials; ++trial) {
      const TotalState state = build_entangled_state(sample_coefficients(spec, trial));
      before[static_cast<std::size_t>(trial)] = offdiag_coherence(reduced_density(state));

      HamiltonianSpec h;
      h.h_sys = Eigen::MatrixXcd::Zero(2, 2);
      h.env_levels = Eigen::VectorXd::Zero(n);
      h.potential = sample_potential(spec, trial);
      h.g = spec.g;
      const TotalState evolved = exact_evolve(state, h, spec.t);
      after[static_cast<std::size_t>(trial)] = offdiag_coherence(reduced_density(evolved));
    }
    rows.push_back({n, spec.n_trials, mean(before), standard_error(before), mean(after), standard_error(after)});
  }
  return rows;
}

void ValiditySweepSpec::validate() const {
  if (g_grid.empty() || eta_grid.empty()) throw DomainError("ValiditySweepSpec: g and eta grids must be non-empty");
  for (double g : g_grid)
    if (!(g >= 0.0)) throw DomainError("ValiditySweepSpec: g values must be >= 0");
  for (double e : eta_grid)
    if (!(e >= 0.0)) throw DomainError("ValiditySweepSpec: eta values must be >= 0");
  if (n_env < 1) throw DomainError("ValiditySweepSpec: n_env must be >= 1");
  if (!(t >= 0.0)) throw DomainError("ValiditySweepSpec: t must be >= 0");
  if (!(dt > 0.0)) throw DomainError("ValiditySweepSpec: dt must be > 0");
  const std::size_t dim = 2 * static_cast<std::size_t>(n_env);
  if (dim > dimension_cap) {
    throw CapError("validity sweep: total dimension M*N = " + std::to_string(dim) +
                   " exceeds the exact-propagator cap of " + std::to_string(dimension_cap));
  }
}

ValidityFixture make_validity_fixture(const ValiditySweepSpec& spec) {
  spec.validate();
  EnsembleSpec ens;
  ens.n_env = spec.n_env;
  ens.seed = spec.seed;
  ens.coeff_dist = CoefficientDistribution::complex_normal;
  ens.potential_dist = PotentialDistribution::uniform01;

  ValidityFixture fx{build_entangled_state(sample_coefficients(ens, 0)), {}, {}};
  fx.branches = decompose_by_environment(fx.initial);

  auto rng = trial_stream(spec.seed, 0, 0x656e76ULL);
  std::uniform_real_distribution<double> level(-1.0, 1.0);
  HamiltonianSpec& h = fx.hamiltonian;
  h.h_sys = two_level_system(spec.omega_up, spec.omega_dn);
  h.env_levels.resize(spec.n_env);
  for (int nu = 0; nu < spec.n_env; ++nu) h.env_levels[nu] = level(rng);
  h.potential = sample_potential(ens, 0);
  h.perturbation = random_hermitian(2 * spec.n_env, spec.seed ^ 0x70657274ULL);
  h.g = 0.0;
  h.eta = 0.0;
  h.validate();
  return fx;
}

std::vector<ValidityRow> run_validity_sweep(const ValiditySweepSpec& spec) {
  ValidityFixture fx = make_validity_fixture(spec);
  PropagatorSpec prop;
  prop.t_final = spec.t;
  prop.dt = spec.t > 0.0 ? std::min(spec.dt, spec.t) : spec.dt;

  std::vector<ValidityRow> rows;
  for (double g : spec.g_grid) {
    for (double eta : spec.eta_grid) {
      HamiltonianSpec h = fx.hamiltonian;
      h.g = g;
      h.eta = eta;
      const TotalState exact = exact_evolve(fx.initial, h, spec.t, spec.dimension_cap);
      const TotalState approx = phase_evolve(fx.branches, h, prop);
      rows.push_back({g, eta, fidelity(exact, approx), transition_residual(fx.branches, h)});
    }
  }
  return rows;
}

}  // namespace pointersim
