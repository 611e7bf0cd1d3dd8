#include "wide/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include "wide/csv.hpp"
#include "wide/diagnostics.hpp"
#include "wide/dissipation.hpp"
#include "wide/energy.hpp"
#include "wide/errors.hpp"
#include "wide/minimize.hpp"
#include "wide/oracles.hpp"
#include "wide/pde.hpp"
#include "wide/sweep.hpp"
#include "wide/weights.hpp"

namespace wide {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "mode",        "seed",          "problem",       "T",
      "steps",       "epsilon",       "epsilons",      "tau_rule",
      "reference",   "solver",        "norm",          "lambda",
      "nu",          "alpha",         "rho",           "u0",
      "u1",          "forcing_value", "mesh.points",   "mesh.length",
      "mesh.mode",   "gamma",         "gamma.coeff",   "rho_phys",
      "zeta.p",      "zeta.coeff",    "check.samples", "check.slack",
      "check.balance_tol"};
  return keys;
}

}  // namespace

bool ConfigMap::has(const std::string& key) const {
  return entries.count(key) > 0;
}

std::string ConfigMap::get(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) {
    throw ConfigError("missing required config key: " + key);
  }
  return it->second;
}

std::string ConfigMap::get_or(const std::string& key,
                              const std::string& dflt) const {
  auto it = entries.find(key);
  return it == entries.end() ? dflt : it->second;
}

double ConfigMap::number(const std::string& key) const {
  const std::string raw = get(key);
  try {
    size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + " is not a number: " + raw);
  }
}

double ConfigMap::number_or(const std::string& key, double dflt) const {
  return has(key) ? number(key) : dflt;
}

long ConfigMap::integer(const std::string& key) const {
  const std::string raw = get(key);
  try {
    size_t used = 0;
    const long v = std::stol(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + " is not an integer: " + raw);
  }
}

long ConfigMap::integer_or(const std::string& key, long dflt) const {
  return has(key) ? integer(key) : dflt;
}

std::vector<double> ConfigMap::number_list(const std::string& key) const {
  const std::string raw = get(key);
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    try {
      size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("key " + key + " has a non-numeric entry: " + cell);
    }
  }
  if (out.empty()) throw ConfigError("key " + key + " is an empty list");
  return out;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line;
  long lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        " is not 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("empty key on line " + std::to_string(lineno));
    }
    if (map.entries.count(key)) {
      throw ConfigError("duplicate config key: " + key);
    }
    map.entries[key] = value;
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

RunMode parse_mode(const std::string& word) {
  if (word == "run") return RunMode::Run;
  if (word == "sweep") return RunMode::Sweep;
  if (word == "pde") return RunMode::Pde;
  if (word == "check") return RunMode::Check;
  if (word == "oracle") return RunMode::Oracle;
  throw ConfigError("unknown mode: " + word);
}

ExperimentConfig load_experiment(const std::string& path) {
  ExperimentConfig config;
  config.raw = parse_config_file(path);
  for (const auto& [key, value] : config.raw.entries) {
    if (!allowed_keys().count(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }
  config.mode = parse_mode(config.raw.get_or("mode", "run"));
  config.seed = static_cast<std::uint64_t>(config.raw.integer_or("seed", 1));
  config.problem_kind = config.raw.get("problem");

  if (config.raw.has("epsilons")) {
    config.epsilons = config.raw.number_list("epsilons");
  } else if (config.raw.has("epsilon")) {
    config.epsilons = {config.raw.number("epsilon")};
  }
  config.tau_rule = config.raw.get_or("tau_rule", "fixed");
  if (config.tau_rule != "fixed" && config.tau_rule != "eps_squared") {
    throw ConfigError("tau_rule must be 'fixed' or 'eps_squared'");
  }
  config.reference = config.raw.get_or("reference", "");
  config.solver = config.raw.get_or("solver", "auto");
  if (config.solver != "auto" && config.solver != "banded" &&
      config.solver != "newton" && config.solver != "prox") {
    throw ConfigError("solver must be auto|banded|newton|prox");
  }
  if (config.mode != RunMode::Oracle && config.epsilons.empty()) {
    throw ConfigError("an epsilon (or epsilons list) is required");
  }
  return config;
}

namespace {

std::vector<double> ramp_forcing(const TimeGrid& grid) {
  std::vector<double> f(static_cast<size_t>(grid.steps) + 1);
  for (long i = 0; i <= grid.steps; ++i) f[static_cast<size_t>(i)] = grid.node(i);
  return f;
}

ScalarNonlinearity gamma_from_config(const ExperimentConfig& config) {
  const std::string kind = config.raw.get_or("gamma", "none");
  if (kind == "none") return no_nonlinearity();
  if (kind == "linear") {
    return linear_nonlinearity(config.raw.number_or("gamma.coeff", 1.0));
  }
  if (kind == "cubic") return odd_power_nonlinearity(2);
  throw ConfigError("gamma must be none|linear|cubic");
}

AnalyticSpec analytic_spec_from_config(const ExperimentConfig& config,
                                       const std::string& name) {
  AnalyticSpec spec;
  spec.name = name;
  spec.lambda = config.raw.number_or("lambda", 1.0);
  spec.nu = config.raw.number_or("nu", 1.0);
  spec.rho = config.raw.number_or("rho", 1.0);
  spec.alpha = config.raw.number_or("alpha", 1.0);
  spec.epsilon = config.epsilons.empty() ? 0.0 : config.epsilons.front();
  spec.horizon = config.raw.number_or("T", 1.0);
  if (config.raw.has("u0")) spec.u0 = config.raw.number_list("u0");
  if (config.raw.has("u1")) spec.u1 = config.raw.number_list("u1");
  spec.mode_k = static_cast<int>(config.raw.integer_or("mesh.mode", 1));
  spec.mesh_points = static_cast<int>(config.raw.integer_or("mesh.points", 0));
  spec.mesh_length = config.raw.number_or("mesh.length", 1.0);
  return spec;
}

ReferenceSolution reference_from_config(const ExperimentConfig& config,
                                        const WideProblem& problem,
                                        const std::string& name) {
  if (name == "implicit_euler") return implicit_euler(problem);
  if (name == "incremental") {
    return incremental_minimization(problem, problem.grid.tau);
  }
  if (name == "leapfrog") return leapfrog_wave(problem);
  if (name == "quasistatic") {
    return solve_quasistatic(problem.energy, problem.grid);
  }
  return analytic_catalogue(analytic_spec_from_config(config, name));
}

std::string default_reference(const WideProblem& problem) {
  return problem.rho > 0.0 ? "leapfrog" : "implicit_euler";
}

void write_trajectory(const Trajectory& u, const std::string& path) {
  Table table;
  table.header.push_back("t");
  for (int c = 1; c <= u.dim; ++c) {
    table.header.push_back("u_" + std::to_string(c));
  }
  table.rows.reserve(static_cast<size_t>(u.grid.steps) + 1);
  for (long i = 0; i <= u.grid.steps; ++i) {
    std::vector<double> row;
    row.reserve(static_cast<size_t>(u.dim) + 1);
    row.push_back(u.grid.node(i));
    const double* x = u.node(i);
    for (int c = 0; c < u.dim; ++c) row.push_back(x[c]);
    table.rows.push_back(std::move(row));
  }
  emit_table(table, path);
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

SolveResult dispatch_solve(const WideProblem& problem, const WeightScheme& w,
                           const std::string& solver) {
  if (solver == "banded") return solve_quadratic(problem, w);
  if (solver == "newton") {
    return solve_newton(problem, w, problem.constrained_trajectory(), -1.0);
  }
  if (solver == "prox") {
    return solve_prox(problem, w, problem.constrained_trajectory(), -1.0);
  }
  return solve_auto(problem, w);
}

}  // namespace

WideProblem build_problem(const ExperimentConfig& config) {
  try {
    const std::string& kind = config.problem_kind;
    const double T = config.raw.number_or("T", 1.0);
    const long steps = config.raw.integer_or("steps", 100);
    const double nu = config.raw.number_or("nu", 1.0);

    WideProblem problem;
    if (kind == "heat" || kind == "wave") {
      const SpatialMesh mesh =
          SpatialMesh::make(config.raw.number_or("mesh.length", 1.0),
                            static_cast<int>(config.raw.integer("mesh.points")));
      const ScalarNonlinearity g = gamma_from_config(config);
      std::vector<double> u0 =
          config.raw.has("u0")
              ? config.raw.number_list("u0")
              : mode_initializer(
                    mesh, static_cast<int>(config.raw.integer_or("mesh.mode", 1)));
      if (kind == "heat") {
        problem = discretize_heat(mesh, g, nu, u0, T, steps);
      } else {
        WaveDiscretization wd;
        wd.rho_phys = config.raw.number_or("rho_phys", 1.0);
        wd.nu = config.raw.number_or("nu", 0.0);
        if (config.raw.has("zeta.p")) {
          wd.zeta_p = config.raw.number("zeta.p");
          wd.zeta_coeff = config.raw.number_or("zeta.coeff", 1.0);
        }
        std::vector<double> u1 =
            config.raw.has("u1")
                ? config.raw.number_list("u1")
                : std::vector<double>(u0.size(), 0.0);
        problem = discretize_wave(mesh, g, wd, u0, u1, T, steps);
      }
      return problem;
    }

    problem.grid = TimeGrid::make(T, steps);
    problem.rho = config.raw.number_or("rho", 0.0);
    problem.u0 = config.raw.has("u0") ? config.raw.number_list("u0")
                                      : std::vector<double>{1.0};
    if (config.raw.has("u1")) problem.u1 = config.raw.number_list("u1");

    if (kind == "linear") {
      problem.energy = quadratic_energy(config.raw.number_or("lambda", 1.0),
                                        static_cast<int>(problem.u0.size()));
      problem.dissipation = quadratic_dissipation(nu);
    } else if (kind == "double_well") {
      problem.energy =
          double_well_energy(static_cast<int>(problem.u0.size()));
      problem.dissipation = quadratic_dissipation(nu);
    } else if (kind == "selection") {
      if (!config.raw.has("u0")) problem.u0 = {0.0};
      problem.energy = sqrt_selection_energy();
      problem.dissipation = quadratic_dissipation(nu);
    } else if (kind == "play") {
      if (!config.raw.has("u0")) problem.u0 = {0.0};
      problem.energy = with_forcing(quadratic_energy(1.0),
                                    ramp_forcing(problem.grid));
      problem.dissipation =
          one_homogeneous_dissipation(config.raw.number_or("alpha", 1.0));
    } else if (kind == "power_flow") {
      const double fval = config.raw.number_or("forcing_value", 1.0);
      problem.energy = with_forcing(
          power_energy(4.0, static_cast<int>(problem.u0.size())),
          std::vector<double>(
              static_cast<size_t>(steps + 1) * problem.u0.size(), fval));
      problem.dissipation = quadratic_dissipation(nu);
    } else {
      throw ConfigError("unknown problem kind: " + kind);
    }
    problem.validate();
    return problem;
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid problem configuration: ") + e.what());
  }
}

namespace {

int run_single(const ExperimentConfig& config, bool check_mode) {
  const WideProblem problem = build_problem(config);
  const double epsilon = config.epsilons.front();
  const WeightScheme w = weights_for(problem, epsilon);
  const SolveResult solved = dispatch_solve(problem, w, config.solver);

  write_trajectory(solved.trajectory,
                   join_path(config.out_dir, "trajectory.csv"));

  Table report;
  std::vector<double> row;
  auto col = [&](const std::string& name, double value) {
    report.header.push_back(name);
    row.push_back(value);
  };
  col("epsilon", epsilon);
  col("tau", problem.grid.tau);
  col("objective", solved.report.objective);
  col("iterations", static_cast<double>(solved.report.iterations));
  col("residual", solved.report.residual);
  col("converged", solved.report.converged ? 1.0 : 0.0);
  col("solver_path", static_cast<double>(solved.report.solver));
  col("weight_prefactor_dropped", solved.report.weight_prefactor_dropped);

  bool all_pass = solved.report.converged;
  double sup = 0.0;
  for (double v : solved.trajectory.values) sup = std::max(sup, std::abs(v));

  const FinalConditions fc = final_conditions(solved.trajectory, problem, w);
  col("final_residual_max",
      *std::max_element(fc.residuals.begin(), fc.residuals.end()));
  col("final_threshold", fc.threshold);
  col("final_pass", fc.pass ? 1.0 : 0.0);
  all_pass = all_pass && fc.pass;

  if (problem.dissipation.kind != DissipationKind::OneHomogeneous) {
    const std::vector<double> el = el_residual(solved.trajectory, problem, w);
    const double el_max =
        el.empty() ? 0.0 : *std::max_element(el.begin(), el.end());
    const double el_threshold = 1e-6 * (1.0 + sup);
    col("el_residual_max", el_max);
    col("el_pass", el_max <= el_threshold ? 1.0 : 0.0);
    all_pass = all_pass && el_max <= el_threshold;
  }
  if (problem.rho == 0.0 &&
      problem.dissipation.kind == DissipationKind::Quadratic &&
      !problem.energy.has_forcing()) {
    const InnerVariation iv =
        inner_variation_identity(solved.trajectory, problem, w);
    const double iv_threshold = 10.0 * problem.grid.tau * (1.0 + sup);
    col("inner_variation_defect", iv.global_defect);
    col("inner_variation_pass", iv.global_defect <= iv_threshold ? 1.0 : 0.0);
    all_pass = all_pass && iv.global_defect <= iv_threshold;
  }
  if (problem.dissipation.kind == DissipationKind::OneHomogeneous &&
      problem.energy.has_forcing()) {
    const EnergeticChecks ec = energetic_checks(
        solved.trajectory, problem,
        static_cast<int>(config.raw.integer_or("check.samples", 64)),
        config.raw.number_or("check.slack", 1e-2),
        config.raw.number_or("check.balance_tol", 5e-3), config.seed);
    col("stability_violation", ec.worst_stability_violation);
    col("stability_pass", ec.stability_pass ? 1.0 : 0.0);
    col("balance_defect", ec.balance_defect);
    col("balance_pass", ec.balance_pass ? 1.0 : 0.0);
    all_pass = all_pass && ec.stability_pass && ec.balance_pass;
  }
  col("all_pass", all_pass ? 1.0 : 0.0);

  report.rows.push_back(std::move(row));
  emit_table(report, join_path(config.out_dir, "report.csv"));
  return (check_mode && !all_pass) ? 4 : 0;
}

int run_pde(const ExperimentConfig& config) {
  const WideProblem problem = build_problem(config);
  const double epsilon = config.epsilons.front();
  const WeightScheme w = weights_for(problem, epsilon);
  const SolveResult solved = dispatch_solve(problem, w, config.solver);
  write_trajectory(solved.trajectory,
                   join_path(config.out_dir, "trajectory.csv"));

  Table report;
  std::vector<double> row;
  auto col = [&](const std::string& name, double value) {
    report.header.push_back(name);
    row.push_back(value);
  };
  col("epsilon", epsilon);
  col("tau", problem.grid.tau);
  col("objective", solved.report.objective);
  col("iterations", static_cast<double>(solved.report.iterations));
  col("residual", solved.report.residual);
  col("converged", solved.report.converged ? 1.0 : 0.0);

  // Mode-initialized linear problems carry an analytic reference.
  if (config.raw.get_or("gamma", "none") == "none" && !config.raw.has("u0")) {
    const std::string ref_name =
        problem.rho > 0.0 ? "wave_mode" : "heat_mode";
    const ReferenceSolution ref =
        analytic_catalogue(analytic_spec_from_config(config, ref_name));
    double sup = 0.0;
    for (long i = 0; i <= problem.grid.steps; ++i) {
      const std::vector<double> r = ref.at(problem.grid.node(i));
      for (int c = 0; c < problem.dim(); ++c) {
        sup = std::max(sup,
                       std::abs(solved.trajectory.node(i)[c] - r[c]));
      }
    }
    col("reference_sup_distance", sup);
  }
  report.rows.push_back(std::move(row));
  emit_table(report, join_path(config.out_dir, "report.csv"));
  return 0;
}

int run_sweep(const ExperimentConfig& config) {
  if (config.tau_rule == "eps_squared") {
    if (config.problem_kind != "linear") {
      throw ConfigError("eps_squared coupling is defined for the linear family");
    }
    const std::vector<double> u0 = config.raw.has("u0")
                                       ? config.raw.number_list("u0")
                                       : std::vector<double>{1.0};
    const RateReport rate =
        rate_report(config.raw.number_or("lambda", 1.0), u0.front(),
                    config.raw.number_or("T", 1.0), config.epsilons);
    Table table;
    table.header = {"epsilon", "tau", "steps", "sup_error"};
    for (const RateRow& row : rate.rows) {
      table.rows.push_back({row.epsilon, row.tau,
                            static_cast<double>(row.steps), row.sup_error});
    }
    emit_table(table, join_path(config.out_dir, "sweep.csv"));
    Table report;
    report.header = {"fitted_rate", "exact"};
    report.rows.push_back({rate.fitted_rate, rate.exact ? 1.0 : 0.0});
    emit_table(report, join_path(config.out_dir, "report.csv"));
    return 0;
  }

  const WideProblem problem = build_problem(config);
  const std::string ref_name =
      config.reference.empty() ? default_reference(problem) : config.reference;
  const ReferenceSolution ref = reference_from_config(config, problem, ref_name);
  const std::string norm_word = config.raw.get_or("norm", "sup");
  if (norm_word != "sup" && norm_word != "l2") {
    throw ConfigError("norm must be 'sup' or 'l2'");
  }
  const ErrorNorm norm = norm_word == "sup" ? ErrorNorm::Sup : ErrorNorm::L2;
  const SweepResult result = sweep(problem, config.epsilons, ref, norm,
                                   config.solver == "banded");

  Table table;
  table.header = {"epsilon", "error"};
  for (size_t i = 0; i < result.epsilons.size(); ++i) {
    table.rows.push_back({result.epsilons[i], result.errors[i]});
  }
  emit_table(table, join_path(config.out_dir, "sweep.csv"));
  Table report;
  report.header = {"fitted_exponent", "fit_residual", "degenerate"};
  report.rows.push_back(
      {result.fitted_exponent, result.fit_residual,
       result.degenerate ? 1.0 : 0.0});
  emit_table(report, join_path(config.out_dir, "report.csv"));
  return 0;
}

int run_oracle(const ExperimentConfig& config) {
  if (config.reference.empty()) {
    throw ConfigError("oracle mode needs a reference id");
  }
  const std::string& name = config.reference;
  Trajectory out;
  if (name == "implicit_euler" || name == "incremental" ||
      name == "leapfrog" || name == "quasistatic") {
    const WideProblem problem = build_problem(config);
    const ReferenceSolution ref = reference_from_config(config, problem, name);
    out = ref.trajectory;
  } else {
    const ReferenceSolution ref =
        analytic_catalogue(analytic_spec_from_config(config, name));
    const TimeGrid grid = TimeGrid::make(config.raw.number_or("T", 1.0),
                                         config.raw.integer_or("steps", 100));
    out = Trajectory::zeros(grid, ref.trajectory.dim);
    for (long i = 0; i <= grid.steps; ++i) {
      const std::vector<double> r = ref.at(grid.node(i));
      for (int c = 0; c < out.dim; ++c) out.node(i)[c] = r[c];
    }
  }
  write_trajectory(out, join_path(config.out_dir, "trajectory.csv"));
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  try {
    switch (config.mode) {
      case RunMode::Run:
        return run_single(config, false);
      case RunMode::Check:
        return run_single(config, true);
      case RunMode::Sweep:
        return run_sweep(config);
      case RunMode::Pde:
        return run_pde(config);
      case RunMode::Oracle:
        return run_oracle(config);
    }
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 3;
  } catch (const SolverFailure& e) {
    std::cerr << "solve error: " << e.what() << std::endl;
    return 2;
  }
}

}  // namespace wide
