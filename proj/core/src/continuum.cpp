#include <pointersim/continuum.hpp>

#include <pointersim/ensemble.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace pointersim {

namespace {

constexpr std::uint64_t kRealizationStream = 0x7265616cULL;  // "real"
constexpr std::uint64_t kModeStream = 0x6d6f6465ULL;         // "mode"

// Owns a forward/backward plan pair over one in-place buffer.
class Spectral {
 public:
  explicit Spectral(int n) : n_(n), buf_(static_cast<std::size_t>(n)) {
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (fwd_ == nullptr || bwd_ == nullptr) throw NumericalError("FFTW plan creation failed");
  }
  ~Spectral() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  cplx* data() noexcept { return buf_.data(); }

  // buf <- IFFT(phase * FFT(buf)), normalized.
  void apply(const std::vector<cplx>& phase) {
    fftw_execute(fwd_);
    const double inv = 1.0 / n_;
    for (int j = 0; j < n_; ++j) buf_[static_cast<std::size_t>(j)] *= phase[static_cast<std::size_t>(j)] * inv;
    fftw_execute(bwd_);
  }

 private:
  int n_;
  std::vector<cplx> buf_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

std::vector<double> wavenumbers(int n, double length) {
  std::vector<double> k(static_cast<std::size_t>(n));
  const double dk = 2.0 * kPi / length;
  for (int j = 0; j < n; ++j) k[static_cast<std::size_t>(j)] = dk * (j < (n + 1) / 2 ? j : j - n);
  return k;
}

std::vector<cplx> kinetic_phase(int n, double length, double mass, double t) {
  const auto k = wavenumbers(n, length);
  std::vector<cplx> ph(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) ph[j] = std::polar(1.0, -k[j] * k[j] * t / (2.0 * mass));
  return ph;
}

void check_potential(const GridWavefunction& psi, const PotentialSample& v) {
  if (v.v.size() != psi.values.size()) {
    throw DomainError("potential has " + std::to_string(v.v.size()) + " samples, grid has " +
                      std::to_string(psi.values.size()));
  }
  if (!v.v.allFinite()) throw DomainError("potential sample contains non-finite entries");
}

int split_steps(double t, double dt) {
  if (!(dt > 0.0)) throw DomainError("split-step dt must be > 0");
  return static_cast<int>(std::ceil(t / dt - 1e-9));
}

// Strang splitting with the inner kinetic half steps merged.
void split_in_place(Spectral& fft, const Eigen::VectorXd& v, double g, int n_steps, double step,
                    const std::vector<cplx>& half, const std::vector<cplx>& full) {
  const int n = static_cast<int>(v.size());
  std::vector<cplx> pot(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) pot[static_cast<std::size_t>(j)] = std::polar(1.0, -g * v[j] * step);
  cplx* p = fft.data();
  fft.apply(half);
  for (int s = 0; s < n_steps; ++s) {
    for (int j = 0; j < n; ++j) p[j] *= pot[static_cast<std::size_t>(j)];
    fft.apply(s + 1 < n_steps ? full : half);
  }
}

}  // namespace

double GridWavefunction::norm2() const { return values.squaredNorm() * dx(); }

Eigen::VectorXd GridWavefunction::density() const { return values.cwiseAbs2(); }

void GridWavefunction::validate(bool require_normalized) const {
  if (n_points() < 4) throw DomainError("GridWavefunction: need at least 4 grid points");
  if (!(x_max > x_min)) throw DomainError("GridWavefunction: x_max must exceed x_min");
  if (!(mass > 0.0)) throw DomainError("GridWavefunction: mass must be > 0");
  if (require_normalized && std::abs(norm2() - 1.0) > kGridNormTolerance) {
    throw DomainError("GridWavefunction: sum |psi|^2 dx = " + std::to_string(norm2()) + ", expected 1");
  }
}

void WavepacketSpec::validate() const {
  if (n_points < 4) throw DomainError("WavepacketSpec: n_points must be >= 4");
  if (!(x_max > x_min)) throw DomainError("WavepacketSpec: x_max must exceed x_min");
  if (!(mass > 0.0)) throw DomainError("WavepacketSpec: mass must be > 0");
  if (!(sigma0 > 0.0)) throw DomainError("WavepacketSpec: sigma0 must be > 0");
  if (centers.empty()) throw DomainError("WavepacketSpec: at least one packet center is required");
  for (double c : centers) {
    if (c - x_min < 5.0 * sigma0 || x_max - c < 5.0 * sigma0) {
      throw DomainError("WavepacketSpec: center " + std::to_string(c) +
                        " lies within 5 sigma0 of the periodic boundary");
    }
  }
}

GridWavefunction gaussian_packets(const WavepacketSpec& spec) {
  spec.validate();
  GridWavefunction psi;
  psi.x_min = spec.x_min;
  psi.x_max = spec.x_max;
  psi.mass = spec.mass;
  psi.values = Eigen::VectorXcd::Zero(spec.n_points);
  const double a = 4.0 * spec.sigma0 * spec.sigma0;
  for (double c : spec.centers) {
    for (int j = 0; j < spec.n_points; ++j) {
      const double d = psi.x(j) - c;
      psi.values[j] += std::exp(-d * d / a);
    }
  }
  psi.values /= std::sqrt(psi.norm2());
  return psi;
}

double free_gaussian_width(double sigma0, double mass, double t) {
  const double spread = t / (2.0 * mass * sigma0);
  return std::sqrt(sigma0 * sigma0 + spread * spread);
}

GridWavefunction evolve_free(const GridWavefunction& psi, double t) {
  psi.validate();
  if (t == 0.0) return psi;
  const int n = psi.n_points();
  Spectral fft(n);
  std::copy(psi.values.data(), psi.values.data() + n, fft.data());
  fft.apply(kinetic_phase(n, psi.length(), psi.mass, t));
  GridWavefunction out = psi;
  std::copy(fft.data(), fft.data() + n, out.values.data());
  return out;
}

GridWavefunction evolve_split(const GridWavefunction& psi, const PotentialSample& v, double g, double t, double dt) {
  psi.validate();
  check_potential(psi, v);
  if (!(t >= 0.0)) throw DomainError("evolve_split: t must be >= 0");
  const int steps = split_steps(t, dt);
  if (steps == 0) return psi;
  const double step = t / steps;
  const int n = psi.n_points();
  Spectral fft(n);
  std::copy(psi.values.data(), psi.values.data() + n, fft.data());
  split_in_place(fft, v.v, g, steps, step, kinetic_phase(n, psi.length(), psi.mass, 0.5 * step),
                 kinetic_phase(n, psi.length(), psi.mass, step));
  GridWavefunction out = psi;
  std::copy(fft.data(), fft.data() + n, out.values.data());
  return out;
}

double lambda_functional(const GridWavefunction& psi, const PotentialSample& v, double t) {
  psi.validate();
  check_potential(psi, v);
  return t * v.v.dot(psi.density()) * psi.dx();
}

PotentialSample grid_potential(const GridWavefunction& grid, std::uint64_t realization_seed, int n_modes) {
  if (n_modes < 1) throw DomainError("grid_potential: n_modes must be >= 1");
  auto rng = trial_stream(realization_seed, 0, kModeStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PotentialSample out;
  out.realization_seed = realization_seed;
  out.v = Eigen::VectorXd::Zero(grid.n_points());
  const double L = grid.length();
  for (int m = 1; m <= n_modes; ++m) {
    const double u = unit(rng);
    const double phi = 2.0 * kPi * unit(rng);
    for (int j = 0; j < grid.n_points(); ++j) {
      out.v[j] += u * std::cos(2.0 * kPi * m * (grid.x(j) - grid.x_min) / L + phi);
    }
  }
  return out;
}

std::vector<PotentialSample> random_potentials(const GridWavefunction& grid, std::uint64_t seed, int count,
                                               int n_modes) {
  if (count < 1) throw DomainError("random_potentials: count must be >= 1");
  std::vector<PotentialSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    auto rng = trial_stream(seed, static_cast<std::uint64_t>(r), kRealizationStream);
    out.push_back(grid_potential(grid, rng(), n_modes));
  }
  return out;
}

Eigen::VectorXd dephase_position_branches(const GridWavefunction& psi, std::span<const PotentialSample> realizations,
                                          double g, double t, double observe_after) {
  psi.validate();
  if (realizations.size() < 2) throw DomainError("dephase_position_branches: need at least 2 realizations");
  if (!(observe_after >= 0.0)) throw DomainError("dephase_position_branches: observe_after must be >= 0");
  for (const auto& v : realizations) check_potential(psi, v);
  const int n = psi.n_points();
  if (g * t == 0.0) return evolve_free(psi, observe_after).density();

  Spectral fft(n);
  const auto kin = kinetic_phase(n, psi.length(), psi.mass, observe_after);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  cplx* p = fft.data();
  for (const auto& v : realizations) {
    for (int j = 0; j < n; ++j) p[j] = psi.values[j] * std::polar(1.0, -g * v.v[j] * t);
    if (observe_after > 0.0) fft.apply(kin);
    for (int j = 0; j < n; ++j) acc[j] += std::norm(p[j]);
  }
  return acc / static_cast<double>(realizations.size());
}

double displaced_coherence(const GridWavefunction& packet, int shift_points,
                           std::span<const PotentialSample> realizations, double g, double t) {
  packet.validate();
  if (realizations.empty()) throw DomainError("displaced_coherence: need at least one realization");
  const int n = packet.n_points();
  const Eigen::VectorXd rho = packet.density();
  cplx acc{0.0, 0.0};
  for (const auto& v : realizations) {
    check_potential(packet, v);
    cplx s{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      const int jb = ((j + shift_points) % n + n) % n;
      s += rho[j] * std::polar(1.0, -g * t * (v.v[jb] - v.v[j]));
    }
    acc += s * packet.dx();
  }
  return std::abs(acc) / static_cast<double>(realizations.size());
}

double density_width(const GridWavefunction& grid, const Eigen::VectorXd& density) {
  if (density.size() != grid.values.size()) throw DomainError("density_width: density does not match the grid");
  double w = 0.0;
  double m1 = 0.0;
  for (int j = 0; j < grid.n_points(); ++j) {
    w += density[j];
    m1 += density[j] * grid.x(j);
  }
  if (!(w > 0.0)) throw DomainError("density_width: density carries no weight");
  const double mean_x = m1 / w;
  double m2 = 0.0;
  for (int j = 0; j < grid.n_points(); ++j) {
    const double d = grid.x(j) - mean_x;
    m2 += density[j] * d * d;
  }
  return std::sqrt(m2 / w);
}

double inverse_participation(const GridWavefunction& grid, const Eigen::VectorXd& density) {
  if (density.size() != grid.values.size()) {
    throw DomainError("inverse_participation: density does not match the grid");
  }
  return density.squaredNorm() * grid.dx();
}

std::optional<double> fringe_visibility(const WavepacketSpec& packets, const Eigen::VectorXd& density, double t) {
  if (packets.centers.size() < 2) return std::nullopt;
  if (density.size() != packets.n_points) throw DomainError("fringe_visibility: density does not match the grid");
  const double c0 = packets.centers.front();
  const double c1 = packets.centers.back();
  const double sep = std::abs(c1 - c0);
  const double mid = 0.5 * (c0 + c1);
  const double s2 = packets.sigma0 * packets.sigma0;
  const double tau = t / (2.0 * packets.mass * s2);
  const double kf = sep * tau / (2.0 * s2 * (1.0 + tau * tau));
  const double length = packets.x_max - packets.x_min;
  if (!(kf > 0.0) || kPi / kf > 0.5 * length) return std::nullopt;
  // Snap the period to a whole number of grid points so a constant density
  // projects to exactly zero.
  const double dx = length / packets.n_points;
  const int span = std::max(2, static_cast<int>(std::lround(2.0 * kPi / kf / dx)));
  const double k = 2.0 * kPi / (span * dx);
  const int start = static_cast<int>(std::lround((mid - packets.x_min) / dx)) - span / 2;
  cplx fringe{0.0, 0.0};
  double mass = 0.0;
  for (int i = 0; i < span; ++i) {
    const int j = ((start + i) % packets.n_points + packets.n_points) % packets.n_points;
    fringe += density[j] * std::polar(1.0, -k * i * dx);
    mass += density[j];
  }
  if (!(mass > 0.0)) return std::nullopt;
  return 2.0 * std::abs(fringe) / mass;
}

void CompetitionSpec::validate() const {
  packets.validate();
  const double dx = (packets.x_max - packets.x_min) / packets.n_points;
  if (packets.sigma0 / dx < 8.0) {
    throw DomainError("competition: grid too coarse, sigma0/dx = " + std::to_string(packets.sigma0 / dx) +
                      " (need at least 8 points per initial width)");
  }
  if (n_realizations < 2) throw DomainError("competition: n_realizations must be >= 2");
  if (n_modes < 1) throw DomainError("competition: n_modes must be >= 1");
  if (g_grid.empty() || t_grid.empty()) throw DomainError("competition: g and t grids must be non-empty");
  for (double g : g_grid)
    if (!(g >= 0.0)) throw DomainError("competition: g values must be >= 0");
  for (double t : t_grid)
    if (!(t >= 0.0)) throw DomainError("competition: t values must be >= 0");
  if (!(dt > 0.0)) throw DomainError("competition: dt must be > 0");
}

CompetitionResult competition_experiment(const CompetitionSpec& spec) {
  spec.validate();
  CompetitionResult out;
  out.initial = gaussian_packets(spec.packets);
  const GridWavefunction& psi0 = out.initial;
  const auto realizations = random_potentials(psi0, spec.seed, spec.n_realizations, spec.n_modes);
  const int n = psi0.n_points();

  Spectral fft(n);
  for (double g : spec.g_grid) {
    for (double t : spec.t_grid) {
      Eigen::VectorXd rho;
      if (t == 0.0) {
        rho = psi0.density();
      } else if (g == 0.0) {
        rho = evolve_free(psi0, t).density();
      } else {
        const int steps = split_steps(t, spec.dt);
        const double step = t / steps;
        const auto half = kinetic_phase(n, psi0.length(), psi0.mass, 0.5 * step);
        const auto full = kinetic_phase(n, psi0.length(), psi0.mass, step);
        rho = Eigen::VectorXd::Zero(n);
        for (const auto& v : realizations) {
          std::copy(psi0.values.data(), psi0.values.data() + n, fft.data());
          split_in_place(fft, v.v, g, steps, step, half, full);
          for (int j = 0; j < n; ++j) rho[j] += std::norm(fft.data()[j]);
        }
        rho /= static_cast<double>(realizations.size());
      }
      CompetitionRow row;
      row.g = g;
      row.t = t;
      row.width = density_width(psi0, rho);
      row.ipr = inverse_participation(psi0, rho);
      row.visibility = fringe_visibility(spec.packets, rho, t);
      out.rows.push_back(row);
      out.densities.push_back(std::move(rho));
    }
  }
  return out;
}

}  // namespace pointersim
