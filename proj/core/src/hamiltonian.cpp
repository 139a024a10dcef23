#include <pointersim/hamiltonian.hpp>

#include <string>

namespace pointersim {

namespace {

bool is_diagonal(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx{0.0, 0.0}) return false;
  return true;
}

void require_hermitian(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != m.cols()) throw DomainError(std::string("HamiltonianSpec: ") + what + " is not square");
  const double defect = hermiticity_defect(m);
  if (defect > kHermitianTolerance) {
    throw DomainError(std::string("HamiltonianSpec: ") + what +
                      " is not Hermitian (max |H - H^dagger| = " + std::to_string(defect) + ")");
  }
}

}  // namespace

double hermiticity_defect(const Eigen::MatrixXcd& h) {
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void HamiltonianSpec::validate() const {
  const int m = n_sys();
  const int n = n_env();
  if (m < 2) throw DomainError("HamiltonianSpec: h_sys must be at least 2x2");
  if (n < 1) throw DomainError("HamiltonianSpec: potential must have at least one column");
  require_hermitian(h_sys, "h_sys");
  if (potential.rows() != m) {
    throw DomainError("HamiltonianSpec: potential has " + std::to_string(potential.rows()) +
                      " rows, expected n_sys = " + std::to_string(m));
  }
  if (h_env) {
    if (h_env->rows() != n) throw DomainError("HamiltonianSpec: h_env dimension does not match n_env");
    require_hermitian(*h_env, "h_env");
  } else if (env_levels.size() != n) {
    throw DomainError("HamiltonianSpec: env_levels length does not match n_env");
  }
  if (perturbation) {
    if (perturbation->rows() != dim()) {
      throw DomainError("HamiltonianSpec: perturbation dimension does not match n_sys*n_env");
    }
    require_hermitian(*perturbation, "perturbation");
  }
  if (!(g >= 0.0)) throw DomainError("HamiltonianSpec: g must be >= 0");
  if (!(eta >= 0.0)) throw DomainError("HamiltonianSpec: eta must be >= 0");
}

bool HamiltonianSpec::sys_diagonal() const { return is_diagonal(h_sys); }

bool HamiltonianSpec::env_diagonal() const { return !h_env || is_diagonal(*h_env); }

Eigen::MatrixXcd HamiltonianSpec::env_matrix() const {
  if (h_env) return *h_env;
  return env_levels.cast<cplx>().asDiagonal();
}

Eigen::MatrixXcd HamiltonianSpec::interaction_matrix() const {
  const int m = n_sys();
  const int n = n_env();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int s = 0; s < m; ++s)
    for (int nu = 0; nu < n; ++nu) {
      const Eigen::Index k = static_cast<Eigen::Index>(s) * n + nu;
      v(k, k) = potential(s, nu);
    }
  if (has_perturbation()) v += eta * (*perturbation);
  return g * v;
}

Eigen::MatrixXcd HamiltonianSpec::total_matrix() const {
  const int m = n_sys();
  const int n = n_env();
  const Eigen::MatrixXcd henv = env_matrix();
  Eigen::MatrixXcd h = interaction_matrix();
  for (int s = 0; s < m; ++s)
    for (int sp = 0; sp < m; ++sp)
      for (int nu = 0; nu < n; ++nu) {
        h(static_cast<Eigen::Index>(s) * n + nu, static_cast<Eigen::Index>(sp) * n + nu) += h_sys(s, sp);
      }
  for (int s = 0; s < m; ++s) {
    const Eigen::Index off = static_cast<Eigen::Index>(s) * n;
    h.block(off, off, n, n) += henv;
  }
  return h;
}

Eigen::VectorXd HamiltonianSpec::total_diagonal() const {
  const int m = n_sys();
  const int n = n_env();
  Eigen::VectorXd d(dim());
  for (int s = 0; s < m; ++s)
    for (int nu = 0; nu < n; ++nu) {
      const double env = h_env ? (*h_env)(nu, nu).real() : env_levels[nu];
      d[static_cast<Eigen::Index>(s) * n + nu] = h_sys(s, s).real() + env + g * potential(s, nu);
    }
  return d;
}

HamiltonianSpec diagonal_family(Eigen::MatrixXcd h_sys, Eigen::VectorXd env_levels,
                                const Eigen::VectorXd& v_up, const Eigen::VectorXd& v_dn,
                                double g) {
  if (v_up.size() != v_dn.size()) throw DomainError("diagonal_family: V_up and V_dn lengths differ");
  HamiltonianSpec h;
  h.h_sys = std::move(h_sys);
  h.env_levels = std::move(env_levels);
  h.potential.resize(2, v_up.size());
  h.potential.row(0) = v_up.transpose();
  h.potential.row(1) = v_dn.transpose();
  h.g = g;
  h.validate();
  return h;
}

Eigen::MatrixXcd two_level_system(double omega_up, double omega_dn, double delta) {
  Eigen::MatrixXcd h(2, 2);
  h << omega_up, delta, delta, omega_dn;
  return h;
}

}  // namespace pointersim
