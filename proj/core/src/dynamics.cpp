#include <pointersim/dynamics.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace pointersim {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_dims(const TotalState& state, const HamiltonianSpec& h, const char* op) {
  if (state.n_sys() != h.n_sys() || state.n_env() != h.n_env()) {
    throw DomainError(std::string(op) + ": state is " + std::to_string(state.n_sys()) + "x" +
                      std::to_string(state.n_env()) + " but Hamiltonian is " +
                      std::to_string(h.n_sys()) + "x" + std::to_string(h.n_env()));
  }
}

void require_cap(Eigen::Index dim, std::size_t cap, const char* op) {
  if (static_cast<std::size_t>(dim) > cap) {
    throw CapError(std::string(op) + ": dimension " + std::to_string(dim) +
                   " exceeds the dense propagator cap of " + std::to_string(cap));
  }
}

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

Spectrum diagonalize(const Eigen::MatrixXcd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXcd apply_spectral(const Spectrum& sp, const Eigen::VectorXcd& v, double t) {
  Eigen::VectorXcd w = sp.vectors.adjoint() * v;
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] *= std::exp(-kI * (sp.values[k] * t));
  return sp.vectors * w;
}

// One RK4 step of i dy/dt = A y.
Eigen::VectorXcd rk4_step(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y, double dt) {
  const Eigen::VectorXcd k1 = -kI * (a * y);
  const Eigen::VectorXcd k2 = -kI * (a * (y + 0.5 * dt * k1));
  const Eigen::VectorXcd k3 = -kI * (a * (y + 0.5 * dt * k2));
  const Eigen::VectorXcd k4 = -kI * (a * (y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Frames of all branches advanced together; used by accumulate_lambda and phase_evolve.
class FrameSweep {
 public:
  FrameSweep(std::span<const Branch> branches, const HamiltonianSpec& h, PropagationMethod method)
      : h_(h), method_(method), initial_(branches.begin(), branches.end()) {
    if (method_ == PropagationMethod::eigendecomposition) {
      evolver_.emplace(h_);
    } else {
      if (h_.env_diagonal()) {
        env_levels_ = h_.h_env ? Eigen::VectorXd(h_.h_env->diagonal().real()) : h_.env_levels;
      } else {
        env_matrix_ = *h_.h_env;
      }
      current_.reserve(initial_.size());
      for (const Branch& b : initial_) {
        BranchFrame f;
        f.branch = b;
        if (!h_.env_diagonal()) {
          f.env_state = Eigen::VectorXcd::Zero(h_.n_env());
          f.env_state[b.env_index] = 1.0;
          f.monitor_orthogonality = true;
        }
        current_.push_back(std::move(f));
      }
    }
  }

  // Moves the sweep to time t (t must not decrease between calls).
  void advance_to(double t) {
    if (method_ == PropagationMethod::eigendecomposition) {
      current_.clear();
      current_.reserve(initial_.size());
      for (const Branch& b : initial_) current_.push_back(evolver_->evolve(b, t));
    } else {
      const double step = t - time_;
      if (step > 0.0) {
        for (std::size_t i = 0; i < current_.size(); ++i) {
          BranchFrame& f = current_[i];
          f.branch.sys_coeffs = rk4_step(h_.h_sys, f.branch.sys_coeffs, step);
          f.branch.mixing_angle = mixing_angle_of(f.branch.sys_coeffs);
          if (f.env_state.size() > 0) {
            f.env_state = rk4_step(env_matrix_, f.env_state, step);
          } else {
            const double level = env_levels_[f.branch.env_index];
            f.branch.weight = initial_[i].weight * std::exp(-kI * (level * t));
          }
        }
      }
    }
    time_ = t;
  }

  const std::vector<BranchFrame>& frames() const noexcept { return current_; }

 private:
  const HamiltonianSpec& h_;
  PropagationMethod method_;
  std::vector<Branch> initial_;
  std::optional<FrameEvolver> evolver_;
  Eigen::MatrixXcd env_matrix_;
  Eigen::VectorXd env_levels_;
  std::vector<BranchFrame> current_;
  double time_ = 0.0;
};

struct SweepResult {
  PhaseTrajectory trajectory;
  std::vector<BranchFrame> final_frames;
};

SweepResult run_sweep(std::span<const Branch> branches, const HamiltonianSpec& h,
                      const PropagatorSpec& spec) {
  spec.validate();
  h.validate();
  for (const Branch& b : branches) {
    if (b.env_index < 0 || b.env_index >= h.n_env() || b.sys_coeffs.size() != h.n_sys()) {
      throw DomainError("accumulate_lambda: branch indices do not match the Hamiltonian dimensions");
    }
  }

  const Eigen::Index nb = static_cast<Eigen::Index>(branches.size());
  const int steps = spec.n_steps();

  std::vector<int> recorded;
  for (int k = 0; k <= steps; ++k)
    if (k % spec.sample_stride == 0 || k == steps) recorded.push_back(k);

  SweepResult out;
  PhaseTrajectory& traj = out.trajectory;
  traj.lambda.resize(nb, static_cast<Eigen::Index>(recorded.size()));
  traj.interaction_expectation.resize(nb, static_cast<Eigen::Index>(recorded.size()));
  traj.times.reserve(recorded.size());

  FrameSweep sweep(branches, h, spec.method);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd previous(nb);
  double previous_t = 0.0;
  std::size_t next_record = 0;

  for (int k = 0; k <= steps; ++k) {
    const double t = spec.time_at(k);
    sweep.advance_to(t);
    Eigen::VectorXd current(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
      current[i] = interaction_expectation(sweep.frames()[static_cast<std::size_t>(i)], h);
    }
    if (k > 0) running += 0.5 * (t - previous_t) * (previous + current);
    if (next_record < recorded.size() && recorded[next_record] == k) {
      const auto col = static_cast<Eigen::Index>(next_record);
      traj.times.push_back(t);
      traj.lambda.col(col) = running;
      traj.interaction_expectation.col(col) = current;
      ++next_record;
    }
    previous = current;
    previous_t = t;
  }
  traj.final_lambda = running;
  out.final_frames = sweep.frames();
  return out;
}

}  // namespace

void PropagatorSpec::validate() const {
  if (!(dt > 0.0)) throw DomainError("PropagatorSpec: dt must be > 0");
  if (!(t_final >= 0.0)) throw DomainError("PropagatorSpec: t_final must be >= 0");
  if (t_final > 0.0 && dt > t_final) throw DomainError("PropagatorSpec: dt must not exceed t_final");
  if (sample_stride < 1) throw DomainError("PropagatorSpec: sample_stride must be >= 1");
}

int PropagatorSpec::n_steps() const {
  if (t_final == 0.0) return 0;
  return static_cast<int>(std::ceil(t_final / dt - 1e-9));
}

double PropagatorSpec::time_at(int step) const {
  return step >= n_steps() ? t_final : step * dt;
}

ExactPropagator::ExactPropagator(const HamiltonianSpec& h, std::size_t dimension_cap)
    : n_sys_(h.n_sys()), n_env_(h.n_env()) {
  h.validate();
  diagonal_ = h.fully_diagonal();
  if (diagonal_) {
    energies_ = h.total_diagonal();
    return;
  }
  require_cap(h.dim(), dimension_cap, "exact_evolve");
  Spectrum sp = diagonalize(h.total_matrix(), "exact_evolve");
  energies_ = std::move(sp.values);
  vectors_ = std::move(sp.vectors);
}

TotalState ExactPropagator::evolve(const TotalState& state, double t) const {
  if (state.n_sys() != n_sys_ || state.n_env() != n_env_) {
    throw DomainError("exact_evolve: state dimensions do not match the Hamiltonian");
  }
  if (!(t >= 0.0)) throw DomainError("exact_evolve: t must be >= 0");
  if (diagonal_) {
    Eigen::VectorXcd out = state.amplitudes();
    for (Eigen::Index k = 0; k < out.size(); ++k) out[k] *= std::exp(-kI * (energies_[k] * t));
    return TotalState(n_sys_, n_env_, std::move(out));
  }
  return TotalState(n_sys_, n_env_, apply_spectral({energies_, vectors_}, state.amplitudes(), t));
}

TotalState exact_evolve(const TotalState& state, const HamiltonianSpec& h, double t,
                        std::size_t dimension_cap) {
  require_dims(state, h, "exact_evolve");
  return ExactPropagator(h, dimension_cap).evolve(state, t);
}

TotalState integrate_rk4(const TotalState& state, const HamiltonianSpec& h, double t, double dt,
                         std::size_t dimension_cap) {
  require_dims(state, h, "integrate_rk4");
  h.validate();
  require_cap(h.dim(), dimension_cap, "integrate_rk4");
  if (!(dt > 0.0)) throw DomainError("integrate_rk4: dt must be > 0");
  if (!(t >= 0.0)) throw DomainError("integrate_rk4: t must be >= 0");
  const Eigen::MatrixXcd total = h.total_matrix();
  Eigen::VectorXcd y = state.amplitudes();
  const int steps = t == 0.0 ? 0 : static_cast<int>(std::ceil(t / dt - 1e-9));
  double now = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double next = (k + 1 == steps) ? t : (k + 1) * dt;
    y = rk4_step(total, y, next - now);
    now = next;
  }
  return TotalState(state.n_sys(), state.n_env(), std::move(y));
}

FrameEvolver::FrameEvolver(const HamiltonianSpec& h, std::size_t dimension_cap) {
  h.validate();
  Spectrum sys = diagonalize(h.h_sys, "evolve_branch_frame (h_sys)");
  sys_energies_ = std::move(sys.values);
  sys_vectors_ = std::move(sys.vectors);
  env_diagonal_ = h.env_diagonal();
  if (env_diagonal_) {
    env_levels_ = h.h_env ? Eigen::VectorXd(h.h_env->diagonal().real()) : h.env_levels;
  } else {
    require_cap(h.n_env(), dimension_cap, "evolve_branch_frame (h_env)");
    Spectrum env = diagonalize(*h.h_env, "evolve_branch_frame (h_env)");
    env_energies_ = std::move(env.values);
    env_vectors_ = std::move(env.vectors);
  }
}

Eigen::MatrixXcd FrameEvolver::system_propagator(double t) const {
  Eigen::VectorXcd phases(sys_energies_.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * (sys_energies_[k] * t));
  return sys_vectors_ * phases.asDiagonal() * sys_vectors_.adjoint();
}

BranchFrame FrameEvolver::evolve(const Branch& branch, double t) const {
  BranchFrame f;
  f.branch = branch;
  f.branch.sys_coeffs = apply_spectral({sys_energies_, sys_vectors_}, branch.sys_coeffs, t);
  f.branch.mixing_angle = mixing_angle_of(f.branch.sys_coeffs);
  if (env_diagonal_) {
    f.branch.weight = branch.weight * std::exp(-kI * (env_levels_[branch.env_index] * t));
  } else {
    Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(env_vectors_.rows());
    unit[branch.env_index] = 1.0;
    f.env_state = apply_spectral({env_energies_, env_vectors_}, unit, t);
    f.monitor_orthogonality = true;
  }
  return f;
}

BranchFrame evolve_branch_frame(const Branch& branch, const HamiltonianSpec& h, double t) {
  return FrameEvolver(h).evolve(branch, t);
}

double interaction_expectation(const Branch& branch, const HamiltonianSpec& h) {
  const int m = h.n_sys();
  const int n = h.n_env();
  const int nu = branch.env_index;
  double diag = 0.0;
  for (int s = 0; s < m; ++s) diag += std::norm(branch.sys_coeffs[s]) * h.potential(s, nu);
  double pert = 0.0;
  if (h.has_perturbation()) {
    cplx acc{0.0, 0.0};
    for (int s = 0; s < m; ++s)
      for (int sp = 0; sp < m; ++sp) {
        acc += std::conj(branch.sys_coeffs[s]) *
               (*h.perturbation)(static_cast<Eigen::Index>(s) * n + nu, static_cast<Eigen::Index>(sp) * n + nu) *
               branch.sys_coeffs[sp];
      }
    pert = h.eta * acc.real();
  }
  return h.g * (diag + pert);
}

double interaction_expectation(const BranchFrame& frame, const HamiltonianSpec& h) {
  if (frame.env_state.size() == 0) return interaction_expectation(frame.branch, h);
  const int m = h.n_sys();
  const int n = h.n_env();
  Eigen::VectorXcd psi(h.dim());
  for (int s = 0; s < m; ++s)
    psi.segment(static_cast<Eigen::Index>(s) * n, n) = frame.branch.sys_coeffs[s] * frame.env_state;
  double diag = 0.0;
  for (int s = 0; s < m; ++s)
    for (int mu = 0; mu < n; ++mu) diag += std::norm(psi[static_cast<Eigen::Index>(s) * n + mu]) * h.potential(s, mu);
  double pert = 0.0;
  if (h.has_perturbation()) pert = h.eta * psi.dot(*h.perturbation * psi).real();
  return h.g * (diag + pert);
}

PhaseTrajectory accumulate_lambda(std::span<const Branch> branches, const HamiltonianSpec& h,
                                  const PropagatorSpec& spec) {
  return run_sweep(branches, h, spec).trajectory;
}

std::vector<Branch> with_accumulated_phases(std::span<const Branch> branches,
                                            const PhaseTrajectory& trajectory) {
  if (trajectory.final_lambda.size() != static_cast<Eigen::Index>(branches.size())) {
    throw DomainError("with_accumulated_phases: trajectory and branch list sizes differ");
  }
  std::vector<Branch> out(branches.begin(), branches.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].accumulated_phase = trajectory.final_lambda[static_cast<Eigen::Index>(i)];
  }
  return out;
}

TotalState phase_evolve(std::span<const Branch> branches, const HamiltonianSpec& h,
                        const PropagatorSpec& spec) {
  SweepResult sweep = run_sweep(branches, h, spec);
  const int m = h.n_sys();
  const int n = h.n_env();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(h.dim());
  for (std::size_t i = 0; i < sweep.final_frames.size(); ++i) {
    const BranchFrame& f = sweep.final_frames[i];
    const cplx factor = f.branch.weight * std::exp(-kI * sweep.trajectory.final_lambda[static_cast<Eigen::Index>(i)]);
    for (int s = 0; s < m; ++s) {
      const cplx c = factor * f.branch.sys_coeffs[s];
      if (f.env_state.size() == 0) {
        amps[static_cast<Eigen::Index>(s) * n + f.branch.env_index] += c;
      } else {
        amps.segment(static_cast<Eigen::Index>(s) * n, n) += c * f.env_state;
      }
    }
  }
  return TotalState(m, n, std::move(amps));
}

double transition_residual(std::span<const Branch> branches, const HamiltonianSpec& h) {
  h.validate();
  if (!h.has_perturbation() || h.g == 0.0) return 0.0;
  const int m = h.n_sys();
  const int n = h.n_env();
  const Eigen::MatrixXcd& p = *h.perturbation;
  double worst = 0.0;
  for (const Branch& a : branches) {
    for (const Branch& b : branches) {
      if (a.env_index == b.env_index) continue;
      cplx acc{0.0, 0.0};
      for (int s = 0; s < m; ++s)
        for (int sp = 0; sp < m; ++sp) {
          acc += std::conj(a.sys_coeffs[s]) *
                 p(static_cast<Eigen::Index>(s) * n + a.env_index, static_cast<Eigen::Index>(sp) * n + b.env_index) *
                 b.sys_coeffs[sp];
        }
      worst = std::max(worst, std::abs(h.g * h.eta * acc));
    }
  }
  return worst;
}

double fidelity(const TotalState& a, const TotalState& b) {
  if (a.n_sys() != b.n_sys() || a.n_env() != b.n_env()) {
    throw DomainError("fidelity: state dimensions differ");
  }
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace pointersim
