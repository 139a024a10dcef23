#include <pointersim/io.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

#ifndef POINTERSIM_VERSION
#define POINTERSIM_VERSION "0.0.0"
#endif

namespace pointersim {

using nlohmann::json;

std::string version() { return POINTERSIM_VERSION; }

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.14e", v);
  return buf;
}

namespace {

class Row {
 public:
  explicit Row(std::ostream& os) : os_(os) {}
  ~Row() { os_ << '\n'; }
  Row& operator<<(double v) { return field(format_real(v)); }
  Row& operator<<(int v) { return field(std::to_string(v)); }
  Row& operator<<(const char* s) { return field(s); }

 private:
  Row& field(const std::string& s) {
    if (!first_) os_ << ", ";
    os_ << s;
    first_ = false;
    return *this;
  }
  std::ostream& os_;
  bool first_ = true;
};

json json_real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string state_to_json(const TotalState& state) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    re.push_back(state.amplitudes()[i].real());
    im.push_back(state.amplitudes()[i].imag());
  }
  json j = {{"n_sys", state.n_sys()}, {"n_env", state.n_env()}, {"re", re}, {"im", im}};
  return j.dump(2) + "\n";
}

TotalState state_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("state JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("state JSON: top level must be an object");
  for (const char* key : {"n_sys", "n_env", "re", "im"}) {
    if (!j.contains(key)) throw DomainError(std::string("state JSON: missing key '") + key + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "n_sys" && k != "n_env" && k != "re" && k != "im") {
      throw DomainError("state JSON: unknown key '" + k + "'");
    }
  }
  if (!j["n_sys"].is_number_integer() || !j["n_env"].is_number_integer()) {
    throw DomainError("state JSON: n_sys and n_env must be integers");
  }
  const int m = j["n_sys"].get<int>();
  const int n = j["n_env"].get<int>();
  const auto& re = j["re"];
  const auto& im = j["im"];
  if (!re.is_array() || !im.is_array()) throw DomainError("state JSON: re and im must be arrays");
  if (m < 2 || n < 1) throw DomainError("state JSON: need n_sys >= 2 and n_env >= 1");
  const auto dim = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
  if (re.size() != dim || im.size() != dim) {
    throw DomainError("state JSON: re/im must have n_sys*n_env = " + std::to_string(dim) + " entries");
  }
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (!re[i].is_number() || !im[i].is_number()) throw DomainError("state JSON: amplitudes must be numbers");
    amps[static_cast<Eigen::Index>(i)] = cplx{re[i].get<double>(), im[i].get<double>()};
  }
  TotalState state(m, n, std::move(amps));
  if (std::abs(state.norm() - 1.0) > kNormTolerance) {
    throw DomainError("state JSON: amplitudes are not normalized (norm " + format_real(state.norm()) + ")");
  }
  return state;
}

void write_trajectory_csv(std::ostream& os, const PhaseTrajectory& tr) {
  os << "t, nu, lambda, h_int_expect\n";
  for (Eigen::Index k = 0; k < tr.n_samples(); ++k) {
    for (Eigen::Index nu = 0; nu < tr.n_branches(); ++nu) {
      Row(os) << tr.times[static_cast<std::size_t>(k)] << static_cast<int>(nu) << tr.lambda(nu, k)
              << tr.interaction_expectation(nu, k);
    }
  }
}

void write_survival_csv(std::ostream& os, const SurvivalHistogram& h) {
  os << "bin_lo, bin_hi, coherent_re, coherent_im, incoherent, survival\n";
  for (int k = 0; k < h.n_bins(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    Row(os) << h.bin_edges[i] << h.bin_edges[i + 1] << h.coherent_sum[i].real() << h.coherent_sum[i].imag()
            << h.incoherent_sum[i] << h.survival_score[i];
  }
}

void write_landscape_csv(std::ostream& os, const LambdaLandscape& l) {
  os << "theta, lambda, slope\n";
  for (std::size_t k = 0; k < l.theta_grid.size(); ++k) {
    Row(os) << l.theta_grid[k] << l.lambda_of_theta[k]
            << landscape_slope(l.v_up, l.v_dn, l.g, l.t, l.theta_grid[k]);
  }
}

void write_branches_csv(std::ostream& os, std::span<const Branch> branches, const PointerSelection& sel) {
  std::vector<int> kept;
  kept.reserve(sel.survivors.size());
  for (const Branch& b : sel.survivors) kept.push_back(b.env_index);
  std::sort(kept.begin(), kept.end());
  os << "nu, theta, abs_weight, lambda, kept\n";
  for (const Branch& b : branches) {
    const int k = std::binary_search(kept.begin(), kept.end(), b.env_index) ? 1 : 0;
    Row(os) << b.env_index << b.mixing_angle << std::abs(b.weight) << b.accumulated_phase << k;
  }
}

std::string report_to_json(const DecoherenceReport& r) {
  json rho_re = json::array();
  json rho_im = json::array();
  for (Eigen::Index i = 0; i < r.rho_sys.rows(); ++i) {
    json row_re = json::array();
    json row_im = json::array();
    for (Eigen::Index k = 0; k < r.rho_sys.cols(); ++k) {
      row_re.push_back(r.rho_sys(i, k).real());
      row_im.push_back(r.rho_sys(i, k).imag());
    }
    rho_re.push_back(row_re);
    rho_im.push_back(row_im);
  }
  json j;
  j["rho"] = {{"re", rho_re}, {"im", rho_im}};
  j["offdiag_mag"] = json_real(r.offdiag_mag);
  j["purity"] = json_real(r.purity);
  if (r.env_overlap) {
    j["env_overlap_re"] = json_real(r.env_overlap->real());
    j["env_overlap_im"] = json_real(r.env_overlap->imag());
  } else {
    j["env_overlap_re"] = nullptr;
    j["env_overlap_im"] = nullptr;
  }
  j["env_overlap_defined"] = r.env_overlap.has_value();
  j["lost_norm"] = json_real(r.lost_norm);
  return j.dump(2) + "\n";
}

void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows) {
  os << "N, trials, mean_offdiag, stderr_offdiag\n";
  for (const auto& r : rows) Row(os) << r.n_env << r.trials << r.mean_after << r.stderr_after;
}

void write_scaling_detail_csv(std::ostream& os, std::span<const ScalingRow> rows) {
  os << "N, trials, mean_before, stderr_before, mean_after, stderr_after\n";
  for (const auto& r : rows) {
    Row(os) << r.n_env << r.trials << r.mean_before << r.stderr_before << r.mean_after << r.stderr_after;
  }
}

void write_validity_csv(std::ostream& os, std::span<const ValidityRow> rows) {
  os << "g, eta, fidelity, transition_residual\n";
  for (const auto& r : rows) Row(os) << r.g << r.eta << r.fidelity << r.transition_residual;
}

void write_density_csv(std::ostream& os, const GridWavefunction& grid, const Eigen::VectorXd& density) {
  if (density.size() != grid.values.size()) throw DomainError("write_density_csv: density does not match the grid");
  os << "x, density\n";
  for (int j = 0; j < grid.n_points(); ++j) Row(os) << grid.x(j) << density[j];
}

void write_competition_csv(std::ostream& os, std::span<const CompetitionRow> rows) {
  os << "g, t, width, ipr, visibility\n";
  for (const auto& r : rows) {
    Row(os) << r.g << r.t << r.width << r.ipr << r.visibility.value_or(std::nan(""));
  }
}

}  // namespace pointersim
