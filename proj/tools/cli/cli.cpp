#include "cli.hpp"

#include "config.hpp"

#include <pointersim/continuum.hpp>
#include <pointersim/decoherence.hpp>
#include <pointersim/dynamics.hpp>
#include <pointersim/ensemble.hpp>
#include <pointersim/hilbert.hpp>
#include <pointersim/io.hpp>
#include <pointersim/pointer.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace pointersim::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatVersion = "1";
constexpr std::uint64_t kPerturbationSalt = 0x70657274ULL;

// Artifacts are rendered in memory and only written once the whole command
// has succeeded, so a failing run never leaves partial tables behind.
using Artifacts = std::map<std::string, std::string>;

struct Plan {
  json resolved;
  json gates = json::object();
  json notes = json::object();
  std::function<void(Artifacts&)> execute;
};

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

json real_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

EnsembleSpec read_ensemble_fields(Section& s, std::uint64_t seed, int n_env, int n_trials) {
  EnsembleSpec e;
  e.n_env = n_env;
  e.n_trials = n_trials;
  e.seed = seed;
  e.g = s.real("g");
  e.t = s.real("t");
  try {
    e.coeff_dist = parse_coefficient_distribution(s.text("coeff_dist", "complex-normal-normalized"));
  } catch (const DomainError& ex) {
    s.fail("coeff_dist", ex.what());
  }
  try {
    e.potential_dist = parse_potential_distribution(s.text("potential", "uniform01"));
  } catch (const DomainError& ex) {
    s.fail("potential", ex.what());
  }
  e.v_up = s.real("v_up", 1.0);
  e.v_dn = s.real("v_dn", 0.0);
  return e;
}

PropagationMethod parse_method(Section& s) {
  const std::string m = s.text("method", "eigendecomposition");
  if (m == "eigendecomposition") return PropagationMethod::eigendecomposition;
  if (m == "rk4") return PropagationMethod::rk4;
  s.fail("method", "expected 'eigendecomposition' or 'rk4', got '" + m + "'");
}

void require_dense_cap(std::size_t dim, std::size_t cap, const std::string& what) {
  if (dim > cap) {
    throw CapError(what + ": total dimension M*N = " + std::to_string(dim) + " exceeds the exact-propagator cap of " +
                   std::to_string(cap));
  }
}

// --- two-state ---------------------------------------------------------------

Plan plan_two_state(Section& s, std::uint64_t seed) {
  EnsembleSpec ens = read_ensemble_fields(s, seed, s.integer("n_env"), 1);
  PropagatorSpec prop;
  prop.dt = s.real("dt", 1e-2);
  prop.sample_stride = s.integer("sample_stride", 1);
  prop.method = parse_method(s);
  prop.t_final = ens.t;
  const double omega_up = s.real("omega_up", 0.5);
  const double omega_dn = s.real("omega_dn", -0.5);
  const double delta = s.real("delta", 0.0);
  const double eta = s.real("eta", 0.0);
  const int cap = s.integer("dimension_cap", static_cast<int>(kDefaultDimensionCap));
  s.finish();

  ens.validate();
  prop.validate();
  if (cap < 1) s.fail("dimension_cap", "must be >= 1");
  if (eta < 0.0) s.fail("eta", "must be >= 0");
  const auto dim = 2 * static_cast<std::size_t>(ens.n_env);
  if (delta != 0.0 || eta != 0.0) require_dense_cap(dim, static_cast<std::size_t>(cap), "two-state");

  Plan p;
  p.resolved = s.resolved();
  p.execute = [=](Artifacts& out) {
    const TotalState initial = build_entangled_state(sample_coefficients(ens, 0));
    const auto branches = decompose_by_environment(initial);
    HamiltonianSpec h;
    h.h_sys = two_level_system(omega_up, omega_dn, delta);
    h.env_levels = Eigen::VectorXd::Zero(ens.n_env);
    h.potential = sample_potential(ens, 0);
    h.g = ens.g;
    h.eta = eta;
    if (eta != 0.0) h.perturbation = random_hermitian(static_cast<int>(dim), seed ^ kPerturbationSalt);

    const PhaseTrajectory traj = accumulate_lambda(branches, h, prop);
    const TotalState phase = phase_evolve(branches, h, prop);
    const TotalState exact = exact_evolve(initial, h, ens.t, static_cast<std::size_t>(cap));

    out["state_initial.json"] = state_to_json(initial);
    out["state_exact.json"] = state_to_json(exact);
    out["state_phase.json"] = state_to_json(phase);
    out["trajectory.csv"] = render([&](std::ostream& os) { write_trajectory_csv(os, traj); });
    out["report.json"] = report_to_json(make_report(exact, env_overlap(exact), 0.0));
    out["report_phase.json"] = report_to_json(make_report(phase, env_overlap(phase), 0.0));
    json summary = {{"fidelity", real_or_null(fidelity(exact, phase))},
                    {"transition_residual", real_or_null(transition_residual(branches, h))}};
    out["summary.json"] = summary.dump(2) + "\n";
  };
  return p;
}

// --- landscape ---------------------------------------------------------------

Plan plan_landscape(Section& s, std::uint64_t) {
  const double v_up = s.real("v_up");
  const double v_dn = s.real("v_dn");
  const double g = s.real("g");
  const double t = s.real("t");
  const int grid = s.integer("grid_size", 181);
  const double tol = s.real("tol", 1e-9);
  s.finish();
  if (grid < 3) s.fail("grid_size", "must be >= 3");
  if (!(tol >= 0.0)) s.fail("tol", "must be >= 0");

  Plan p;
  p.resolved = s.resolved();
  p.execute = [=](Artifacts& out) {
    const LambdaLandscape l = lambda_landscape(v_up, v_dn, g, t, grid);
    const Stationarity st = stationarity_points(l, tol);
    out["landscape.csv"] = render([&](std::ostream& os) { write_landscape_csv(os, l); });
    json j = {{"degenerate", st.degenerate}, {"points", st.points}};
    out["stationarity.json"] = j.dump(2) + "\n";
  };
  return p;
}

// --- filter ------------------------------------------------------------------

Plan plan_filter(Section& s, std::uint64_t seed) {
  EnsembleSpec ens = read_ensemble_fields(s, seed, s.integer("n_env"), 1);
  const int n_bins = s.integer("n_bins", kDefaultBins);
  const double threshold = s.real("threshold", kDefaultSurvivalThreshold);
  const std::string initial_kind = s.text("initial", "entangled");
  s.finish();
  ens.validate();
  if (n_bins < 2) s.fail("n_bins", "must be >= 2");
  if (!(threshold > 0.0 && threshold <= 1.0)) s.fail("threshold", "must lie in (0, 1]");
  if (initial_kind != "entangled" && initial_kind != "product") {
    s.fail("initial", "expected 'entangled' or 'product', got '" + initial_kind + "'");
  }

  Plan p;
  p.resolved = s.resolved();
  p.gates = {{"survival_threshold", threshold}, {"n_bins", n_bins}};
  p.execute = [=](Artifacts& out) {
    const Eigen::MatrixXcd c = sample_coefficients(ens, 0);
    const TotalState state = initial_kind == "product"
                                 ? build_product_state(c.col(0), c.row(0).transpose())
                                 : build_entangled_state(c);
    const auto branches = decompose_by_environment(state);
    HamiltonianSpec h;
    h.h_sys = Eigen::MatrixXcd::Zero(2, 2);
    h.env_levels = Eigen::VectorXd::Zero(ens.n_env);
    h.potential = sample_potential(ens, 0);
    h.g = ens.g;
    PropagatorSpec prop;
    prop.t_final = ens.t;
    prop.dt = ens.t > 0.0 ? ens.t : 1.0;
    const auto phased = with_accumulated_phases(branches, accumulate_lambda(branches, h, prop));

    const Eigen::VectorXd v_up = h.potential.row(0).transpose();
    const Eigen::VectorXd v_dn = h.potential.row(1).transpose();
    const DegeneracyReport deg = degeneracy_check(v_up, v_dn, default_degeneracy_tolerance(v_up, v_dn));
    const SurvivalHistogram hist = interference_survival(phased, n_bins);
    const PointerSelection sel = filter_pointer_branches(hist, phased, threshold, &deg);
    const SchmidtPair sp = schmidt_env_vectors(sel.survivors, ens.n_env, n_bins, false);

    out["survival.csv"] = render([&](std::ostream& os) { write_survival_csv(os, hist); });
    out["branches.csv"] = render([&](std::ostream& os) { write_branches_csv(os, phased, sel); });
    json j = {{"kept_bins", sel.kept_bins},
              {"n_survivors", sel.survivors.size()},
              {"lost_norm", real_or_null(sel.lost_norm)},
              {"non_selecting", sel.non_selecting},
              {"weight_a", real_or_null(sp.weight_a)},
              {"weight_b", real_or_null(sp.weight_b)},
              {"excluded_norm", real_or_null(sp.excluded_norm)},
              {"one_sided", sp.one_sided()}};
    out["selection.json"] = j.dump(2) + "\n";
    if (!sel.survivors.empty()) {
      const TotalState filtered = assemble_branch_state(sel.survivors, 2, ens.n_env);
      out["report.json"] = report_to_json(make_report(filtered, sp.overlap, sel.lost_norm));
    }
  };
  return p;
}

// --- ensemble ----------------------------------------------------------------

Plan plan_ensemble(Section& s, std::uint64_t seed) {
  const std::vector<int> n_grid = s.integers("n_grid");
  if (n_grid.empty()) s.fail("n_grid", "must not be empty");
  EnsembleSpec ens = read_ensemble_fields(s, seed, n_grid.front(), s.integer("n_trials"));
  s.finish();
  for (int n : n_grid)
    if (n < 1) s.fail("n_grid", "every N must be >= 1");
  ens.validate();

  Plan p;
  p.resolved = s.resolved();
  p.gates = {{"scaling_slope_target", -0.5}, {"scaling_slope_tolerance", 0.1}};
  p.execute = [=](Artifacts& out) {
    const auto rows = run_scaling_study(ens, n_grid);
    out["scaling.csv"] = render([&](std::ostream& os) { write_scaling_csv(os, rows); });
    out["scaling_detail.csv"] = render([&](std::ostream& os) { write_scaling_detail_csv(os, rows); });
    if (rows.size() >= 2) {
      std::vector<double> x, before, after;
      for (const auto& r : rows) {
        x.push_back(r.n_env);
        before.push_back(r.mean_before);
        after.push_back(r.mean_after);
      }
      json j = json::object();
      try {
        j["slope_before"] = fit_loglog_slope(x, before);
        j["slope_after"] = fit_loglog_slope(x, after);
      } catch (const DomainError&) {
        j["slope_before"] = nullptr;
        j["slope_after"] = nullptr;
      }
      out["fit.json"] = j.dump(2) + "\n";
    }
  };
  return p;
}

// --- validity ----------------------------------------------------------------

Plan plan_validity(Section& s, std::uint64_t seed) {
  ValiditySweepSpec v;
  v.g_grid = s.reals("g_grid");
  v.eta_grid = s.reals("eta_grid");
  v.n_env = s.integer("n_env", 8);
  v.t = s.real("t", 1.0);
  v.dt = s.real("dt", 1e-2);
  const int cap = s.integer("dimension_cap", static_cast<int>(kDefaultDimensionCap));
  v.omega_up = s.real("omega_up", 0.5);
  v.omega_dn = s.real("omega_dn", -0.5);
  v.seed = seed;
  s.finish();
  if (cap < 1) s.fail("dimension_cap", "must be >= 1");
  v.dimension_cap = static_cast<std::size_t>(cap);
  v.validate();

  Plan p;
  p.resolved = s.resolved();
  p.execute = [=](Artifacts& out) {
    const auto rows = run_validity_sweep(v);
    out["validity.csv"] = render([&](std::ostream& os) { write_validity_csv(os, rows); });
  };
  return p;
}

// --- continuum ---------------------------------------------------------------

Plan plan_continuum(Section& s, std::uint64_t seed) {
  CompetitionSpec c;
  c.packets.x_min = s.real("x_min", -40.0);
  c.packets.x_max = s.real("x_max", 40.0);
  c.packets.n_points = s.integer("n_points", 1024);
  c.packets.mass = s.real("mass", 1.0);
  c.packets.sigma0 = s.real("sigma0", 1.0);
  c.packets.centers = s.reals("centers", {-6.0, 6.0});
  c.n_realizations = s.integer("n_realizations", 200);
  c.n_modes = s.integer("n_modes", 2);
  c.g_grid = s.reals("g_grid");
  c.t_grid = s.reals("t_grid");
  c.dt = s.real("dt", 0.025);
  const bool densities = s.flag("write_densities", true);
  c.seed = seed;
  s.finish();
  c.validate();

  Plan p;
  p.resolved = s.resolved();
  p.gates = {{"monotone_visibility_tolerance", 0.02}, {"width_law_tolerance", 0.01}};
  p.notes = {{"environment_model",
              "random-potential dephasing channel: a stand-in environment, one cosine-mode potential per realization"}};
  p.execute = [=](Artifacts& out) {
    const CompetitionResult r = competition_experiment(c);
    out["competition.csv"] = render([&](std::ostream& os) { write_competition_csv(os, r.rows); });
    out["density_initial.csv"] =
        render([&](std::ostream& os) { write_density_csv(os, r.initial, r.initial.density()); });
    if (densities) {
      for (std::size_t k = 0; k < r.densities.size(); ++k) {
        char name[48];
        std::snprintf(name, sizeof name, "density_row%03zu.csv", k);
        out[name] = render([&](std::ostream& os) { write_density_csv(os, r.initial, r.densities[k]); });
      }
    }
  };
  return p;
}

using Planner = Plan (*)(Section&, std::uint64_t);

const std::map<std::string, Planner>& planners() {
  static const std::map<std::string, Planner> table = {
      {"two-state", plan_two_state}, {"landscape", plan_landscape}, {"filter", plan_filter},
      {"ensemble", plan_ensemble},   {"validity", plan_validity},   {"continuum", plan_continuum},
  };
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Resolved {
  std::uint64_t seed = 0;
  Plan plan;
};

// Validates every command section present in the file, then returns the
// plan of the requested one.
Resolved resolve(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed_arg) {
  const std::string raw = read_file(config_path);
  const json root = parse_config_text(raw, config_path);
  Section top(root, "", &raw);
  if (!top.has("format_version")) top.fail("format_version", "required key is missing");
  const std::string fv = top.text("format_version", "");
  if (fv != kFormatVersion) top.fail("format_version", "unsupported version '" + fv + "', expected '1'");
  Resolved r;
  r.seed = top.u64("seed", 0);
  if (seed_arg) r.seed = *seed_arg;

  bool found = false;
  for (const auto& [name, planner] : planners()) {
    if (!top.has(name.c_str())) continue;
    const json& obj = root.at(name);
    if (!obj.is_object()) top.fail(name, "section must be a JSON object");
    top.consume(name.c_str());
    Section sec(obj, name, &raw);
    Plan p = planner(sec, r.seed);
    if (name == command) {
      r.plan = std::move(p);
      found = true;
    }
  }
  top.finish();
  if (!found) throw ConfigError("config has no '" + command + "' section");
  return r;
}

void write_artifacts(const fs::path& dir, const Artifacts& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& [name, body] : files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) throw std::runtime_error("failed to write '" + (dir / name).string() + "'");
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : planners()) v.push_back(k);
    return v;
  }();
  return names;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pointersim: branch-phase decoherence experiments"};
  app.set_version_flag("--version", version());
  std::string command;
  std::string config_path;
  std::string out_dir = "pointersim-out";
  std::optional<std::uint64_t> seed;
  bool validate_only = false;
  app.add_option("command", command, "experiment to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--validate", validate_only, "check the config and exit without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Resolved r = resolve(command, config_path, seed);
    if (validate_only) {
      out << config_path << ": ok (" << command << ")\n";
      return kExitOk;
    }
    Artifacts files;
    r.plan.execute(files);

    json manifest;
    manifest["tool"] = "pointersim";
    manifest["version"] = version();
    manifest["format_version"] = kFormatVersion;
    manifest["command"] = command;
    manifest["seed"] = r.seed;
    manifest["config"] = r.plan.resolved;
    manifest["gates"] = r.plan.gates;
    for (auto it = r.plan.notes.begin(); it != r.plan.notes.end(); ++it) manifest[it.key()] = it.value();
    json names = json::array();
    for (const auto& [name, _] : files) names.push_back(name);
    manifest["outputs"] = names;
    files["manifest.json"] = manifest.dump(2) + "\n";

    write_artifacts(out_dir, files);
    out << "wrote " << files.size() << " files to " << out_dir << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapError& e) {
    err << "dimension cap: " << e.what() << "\n";
    return kExitCap;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace pointersim::cli
