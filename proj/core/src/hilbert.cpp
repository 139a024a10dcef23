#include <pointersim/hilbert.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace pointersim {

namespace {

void require_normalized(const TotalState& state, const char* op) {
  if (std::abs(state.norm() - 1.0) > kNormTolerance) {
    throw DomainError(std::string(op) + ": state is not normalized (norm = " +
                      std::to_string(state.norm()) + ")");
  }
}

}  // namespace

TotalState::TotalState(int n_sys, int n_env, Eigen::VectorXcd amplitudes)
    : n_sys_(n_sys), n_env_(n_env), amplitudes_(std::move(amplitudes)) {
  if (n_sys_ < 2) throw DomainError("TotalState: n_sys must be >= 2");
  if (n_env_ < 1) throw DomainError("TotalState: n_env must be >= 1");
  if (amplitudes_.size() != static_cast<Eigen::Index>(n_sys_) * n_env_) {
    throw DomainError("TotalState: amplitude length " + std::to_string(amplitudes_.size()) +
                      " does not equal n_sys*n_env = " +
                      std::to_string(static_cast<long long>(n_sys_) * n_env_));
  }
}

Eigen::MatrixXcd TotalState::coefficients() const {
  Eigen::MatrixXcd c(n_sys_, n_env_);
  for (int s = 0; s < n_sys_; ++s)
    for (int nu = 0; nu < n_env_; ++nu) c(s, nu) = amp(s, nu);
  return c;
}

double mixing_angle_of(const Eigen::VectorXcd& sys_coeffs) {
  const double up = std::abs(sys_coeffs[0]);
  const double rest = sys_coeffs.tail(sys_coeffs.size() - 1).norm();
  return std::atan2(rest, up);
}

Branch make_branch(int env_index, cplx weight, Eigen::VectorXcd sys_coeffs) {
  Branch b;
  b.env_index = env_index;
  b.weight = weight;
  b.mixing_angle = mixing_angle_of(sys_coeffs);
  b.sys_coeffs = std::move(sys_coeffs);
  return b;
}

TotalState build_entangled_state(const Eigen::MatrixXcd& coefficients) {
  const double norm = coefficients.norm();
  if (!(norm > 0.0)) {
    throw DomainError("build_entangled_state: coefficient matrix C is identically zero");
  }
  const int m = static_cast<int>(coefficients.rows());
  const int n = static_cast<int>(coefficients.cols());
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(m) * n);
  for (int s = 0; s < m; ++s)
    for (int nu = 0; nu < n; ++nu) amps[static_cast<Eigen::Index>(s) * n + nu] = coefficients(s, nu) / norm;
  return TotalState(m, n, std::move(amps));
}

TotalState build_product_state(const Eigen::VectorXcd& sys, const Eigen::VectorXcd& env) {
  if (!(sys.norm() > 0.0)) throw DomainError("build_product_state: system factor is zero");
  if (!(env.norm() > 0.0)) throw DomainError("build_product_state: environment factor is zero");
  const Eigen::VectorXcd a = sys / sys.norm();
  const Eigen::VectorXcd b = env / env.norm();
  Eigen::MatrixXcd c = a * b.transpose();
  return build_entangled_state(c);
}

std::vector<Branch> decompose_by_environment(const TotalState& state) {
  require_normalized(state, "decompose_by_environment");
  const int m = state.n_sys();
  const int n = state.n_env();
  std::vector<Branch> branches;
  branches.reserve(static_cast<std::size_t>(n));
  for (int nu = 0; nu < n; ++nu) {
    Eigen::VectorXcd col(m);
    for (int s = 0; s < m; ++s) col[s] = state.amp(s, nu);
    const double modulus = col.norm();

    int lead = -1;
    for (int s = 0; s < m; ++s) {
      if (std::abs(col[s]) > kPhaseCutoff) {
        lead = s;
        break;
      }
    }
    if (lead < 0) {
      Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(m);
      unit[0] = 1.0;
      branches.push_back(make_branch(nu, cplx{0.0, 0.0}, std::move(unit)));
      continue;
    }
    const cplx phase = col[lead] / std::abs(col[lead]);
    const cplx weight = modulus * phase;
    branches.push_back(make_branch(nu, weight, col / weight));
  }
  return branches;
}

std::vector<SystemGroup> regroup_by_system(const TotalState& state) {
  require_normalized(state, "regroup_by_system");
  std::vector<SystemGroup> groups;
  groups.reserve(static_cast<std::size_t>(state.n_sys()));
  for (int s = 0; s < state.n_sys(); ++s) {
    SystemGroup g;
    g.sys_index = s;
    g.env = state.amplitudes().segment(state.index(s, 0), state.n_env());
    groups.push_back(std::move(g));
  }
  return groups;
}

TotalState reconstruct(std::span<const Branch> branches) {
  if (branches.empty()) throw DomainError("reconstruct: empty branch list");
  const int n = static_cast<int>(branches.size());
  const auto m = branches.front().sys_coeffs.size();
  if (m < 2) throw DomainError("reconstruct: branches need at least two system coefficients");

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  double total = 0.0;
  for (const Branch& b : branches) {
    if (b.sys_coeffs.size() != m) throw DomainError("reconstruct: inconsistent system dimension across branches");
    if (b.env_index < 0 || b.env_index >= n || seen[static_cast<std::size_t>(b.env_index)]) {
      throw DomainError("reconstruct: env indices are not a permutation of 0..N-1 (N = " +
                        std::to_string(n) + ")");
    }
    seen[static_cast<std::size_t>(b.env_index)] = true;
    total += std::norm(b.weight);
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw DomainError("reconstruct: branch weights are not normalized (sum |alpha|^2 = " +
                      std::to_string(total) + ")");
  }

  Eigen::VectorXcd amps(m * n);
  for (const Branch& b : branches)
    for (Eigen::Index s = 0; s < m; ++s) amps[s * n + b.env_index] = b.weight * b.sys_coeffs[s];
  return TotalState(static_cast<int>(m), n, std::move(amps));
}

bool is_product_state(const TotalState& state, double tol) {
  const auto branches = decompose_by_environment(state);
  const Eigen::VectorXcd* reference = nullptr;
  for (const Branch& b : branches) {
    if (std::abs(b.weight) <= tol) continue;
    if (reference == nullptr) {
      reference = &b.sys_coeffs;
      continue;
    }
    if ((b.sys_coeffs - *reference).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace pointersim
