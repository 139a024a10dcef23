#include <pointersim/continuum.hpp>
#include <pointersim/dynamics.hpp>
#include <pointersim/ensemble.hpp>
#include <pointersim/pointer.hpp>

#include <benchmark/benchmark.h>

using namespace pointersim;

namespace {

HamiltonianSpec dense_fixture(int n_env) {
  EnsembleSpec e;
  e.n_env = n_env;
  HamiltonianSpec h;
  h.h_sys = two_level_system(0.5, -0.5, 0.1);
  h.env_levels = Eigen::VectorXd::LinSpaced(n_env, -1.0, 1.0);
  h.potential = sample_potential(e, 0);
  h.g = 0.1;
  return h;
}

void BM_ExactEvolveDense(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  EnsembleSpec e;
  e.n_env = n;
  const TotalState psi = build_entangled_state(sample_coefficients(e, 0));
  const HamiltonianSpec h = dense_fixture(n);
  for (auto _ : st) benchmark::DoNotOptimize(exact_evolve(psi, h, 1.0));
}
BENCHMARK(BM_ExactEvolveDense)->Arg(8)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PhaseEvolve(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  EnsembleSpec e;
  e.n_env = n;
  const auto branches = sample_branches(e, 0);
  HamiltonianSpec h = dense_fixture(n);
  h.h_sys = two_level_system(0.5, -0.5);
  PropagatorSpec p;
  p.t_final = 1.0;
  p.dt = 0.01;
  for (auto _ : st) benchmark::DoNotOptimize(phase_evolve(branches, h, p));
}
BENCHMARK(BM_PhaseEvolve)->Arg(8)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_InterferenceSurvival(benchmark::State& st) {
  EnsembleSpec e;
  e.n_env = static_cast<int>(st.range(0));
  auto branches = sample_branches(e, 0);
  for (std::size_t i = 0; i < branches.size(); ++i) branches[i].accumulated_phase = 0.37 * static_cast<double>(i);
  for (auto _ : st) benchmark::DoNotOptimize(interference_survival(branches));
}
BENCHMARK(BM_InterferenceSurvival)->Arg(2000)->Arg(100000);

void BM_EvolveFree(benchmark::State& st) {
  WavepacketSpec w;
  w.n_points = static_cast<int>(st.range(0));
  w.centers = {-6.0, 6.0};
  const GridWavefunction psi = gaussian_packets(w);
  for (auto _ : st) benchmark::DoNotOptimize(evolve_free(psi, 16.0));
}
BENCHMARK(BM_EvolveFree)->Arg(1024)->Arg(4096);

void BM_EvolveSplit(benchmark::State& st) {
  WavepacketSpec w;
  w.centers = {-6.0, 6.0};
  const GridWavefunction psi = gaussian_packets(w);
  const auto v = random_potentials(psi, 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(evolve_split(psi, v[0], 0.16, 16.0, 0.025));
}
BENCHMARK(BM_EvolveSplit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
