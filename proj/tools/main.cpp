// Command-line front end: solve single scenarios, run parameter sweeps over
// the comparative statics, and cross-check the analytic machinery against the
// Monte Carlo oracle.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or validation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <revcausal/revcausal.hpp>

namespace rc = revcausal;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rc::ValidationError("file", "cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rc::ValidationError("file", "cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// scenario assembly from flags / preset / file

struct ScenarioArgs {
  std::string preset;
  std::string file;
  std::string family;
  std::optional<double> gamma, lambda, kappa, alpha, delta;
  std::optional<double> var_theta, var_eps, var_eta, tau;
  bool unsafe = false;
};

void add_scenario_options(CLI::App& cmd, ScenarioArgs& args) {
  cmd.add_option("--preset", args.preset, "named scenario preset (see `revcausal presets`)");
  cmd.add_option("--scenario", args.file, "scenario file (key = value lines)");
  cmd.add_option("--family", args.family, "main | exogeneity-only | reverse-only");
  cmd.add_option("--gamma", args.gamma, "direct offsetting effect of a on x");
  cmd.add_option("--lambda", args.lambda, "direct offsetting effect of a on y");
  cmd.add_option("--kappa", args.kappa, "exogeneity-only: offsetting effect of a on x");
  cmd.add_option("--alpha", args.alpha, "exogeneity-only: effect of y on x");
  cmd.add_option("--delta", args.delta, "exogeneity-only: effect of a on y");
  cmd.add_option("--var-theta", args.var_theta, "variance of the state");
  cmd.add_option("--var-eps", args.var_eps, "variance of the x-equation noise");
  cmd.add_option("--var-eta", args.var_eta, "variance of the y-equation noise");
  cmd.add_option("--tau", args.tau, "sets var_eps = tau * var_eta");
  cmd.add_flag("--unsafe-params", args.unsafe, "skip parameter range checks (output is tagged)");
}

rc::Scenario build_scenario(const ScenarioArgs& args) {
  std::map<std::string, std::string> kv;
  if (!args.preset.empty() && !args.file.empty()) {
    throw rc::ValidationError("scenario", "--preset and --scenario are mutually exclusive");
  }
  if (!args.preset.empty()) {
    rc::preset(args.preset);  // validate the name
    for (const auto& [name, text] : rc::preset_definitions()) {
      if (name == args.preset) kv = rc::detail::parse_key_values(text);
    }
  } else if (!args.file.empty()) {
    kv = rc::detail::parse_key_values(read_file(args.file));
  }
  if (!args.family.empty()) kv["family"] = args.family;
  if (kv.find("family") == kv.end()) {
    throw rc::ValidationError("family", "no scenario given: use --family, --preset or --scenario");
  }
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) kv[key] = rc::format_number(*v);
  };
  put("gamma", args.gamma);
  put("lambda", args.lambda);
  put("kappa", args.kappa);
  put("alpha", args.alpha);
  put("delta", args.delta);
  put("var_theta", args.var_theta);
  put("var_eps", args.var_eps);
  put("var_eta", args.var_eta);
  if (args.tau) {
    if (args.var_eps) {
      throw rc::ValidationError("tau", "--tau and --var-eps are mutually exclusive");
    }
    double var_eta = 1.0;
    if (auto it = kv.find("var_eta"); it != kv.end()) {
      var_eta = rc::detail::parse_double("var_eta", it->second);
    }
    if (*args.tau < 0.0) throw rc::ValidationError("tau", "tau out of [0,inf)");
    kv["var_eps"] = rc::format_number(*args.tau * var_eta);
  }
  return rc::detail::scenario_from_map(std::move(kv), args.unsafe);
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  ScenarioArgs scenario;
  double init_k = 0.0;
  double init_b = 0.0;
  double tol = 1e-10;
  int max_iter = 200;
  std::string subjective = "model";  // model | true | edge-list file
  bool as_json = false;
};

int run_solve(const SolveArgs& args) {
  const rc::Scenario sc = build_scenario(args.scenario);
  const rc::Dag dag = [&] {
    if (args.subjective == "model") return rc::subjective_dag(sc);
    if (args.subjective == "true") return rc::true_dag(sc);
    return rc::Dag::from_edge_list(read_file(args.subjective));
  }();

  const rc::EquilibriumReport rep = rc::solve_equilibrium(
      sc, dag, {args.init_b, args.init_k, 0.0}, args.tol, args.max_iter);
  const double k_closed = rc::closed_form_strategy(sc).slope;

  if (args.as_json) {
    json out;
    out["family"] = rc::family_name(sc.family());
    out["subjective_dag"] = args.subjective;
    out["pure_prediction"] = sc.pure_prediction();
    out["unsafe_params"] = sc.unsafe_params();
    out["k_equilibrium"] = rep.strategy.slope;
    out["b_equilibrium"] = rep.strategy.intercept;
    out["k_benchmark"] = rep.benchmark_strategy.slope;
    out["k_closed_form"] = k_closed;
    out["welfare"] = rep.welfare;
    out["welfare_benchmark"] = rep.welfare_benchmark;
    out["welfare_gap"] = rep.welfare_gap();
    out["c2_margin"] = rep.c2_margin;
    out["iterations"] = rep.iterations;
    out["residual"] = rep.residual;
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  auto line = [](const char* key, const std::string& value) {
    std::printf("%-17s = %s\n", key, value.c_str());
  };
  line("family", rc::family_name(sc.family()));
  if (args.subjective != "model") line("subjective_dag", args.subjective);
  if (sc.pure_prediction()) line("pure_prediction", "true");
  if (sc.unsafe_params()) line("unsafe_params", "true");
  line("k_equilibrium", rc::format_number(rep.strategy.slope));
  line("b_equilibrium", rc::format_number(rep.strategy.intercept));
  line("k_benchmark", rc::format_number(rep.benchmark_strategy.slope));
  line("k_closed_form", rc::format_number(k_closed));
  line("welfare", rc::format_number(rep.welfare));
  line("welfare_benchmark", rc::format_number(rep.welfare_benchmark));
  line("welfare_gap", rc::format_number(rep.welfare_gap()));
  line("c2_margin", rc::format_number(rep.c2_margin));
  line("iterations", rc::format_number(rep.iterations));
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

double sweep_column(const std::string& name, const rc::Scenario& sc,
                    const rc::EquilibriumReport& rep) {
  if (name == "k_equilibrium") return rep.strategy.slope;
  if (name == "k_benchmark") return rep.benchmark_strategy.slope;
  if (name == "welfare_gap") return rep.welfare_gap();
  if (name == "k_closed_form") return rc::closed_form_strategy(sc).slope;
  if (name == "welfare") return rep.welfare;
  if (name == "welfare_benchmark") return rep.welfare_benchmark;
  if (name == "b_equilibrium") return rep.strategy.intercept;
  if (name == "c2_margin") return rep.c2_margin;
  if (name == "iterations") return rep.iterations;
  if (name == "residual") return rep.residual;
  if (name == "tau") return sc.tau();
  if (name == "beta") return sc.beta();
  if (name == "var_eps") return sc.var_eps();
  throw rc::ValidationError("outputs", "unknown output column: " + name);
}

int run_sweep(const std::string& spec_path, const std::string& out_path, bool unsafe) {
  const rc::SweepSpec spec = rc::parse_sweep_spec(read_file(spec_path), unsafe);
  std::vector<std::string> columns = {"k_equilibrium", "k_benchmark", "welfare_gap"};
  for (const auto& extra : spec.outputs) columns.push_back(extra);

  std::ostringstream csv;
  csv << spec.parameter;
  for (const auto& c : columns) csv << ',' << c;
  csv << '\n';
  for (double v : spec.grid) {
    const rc::Scenario sc = rc::apply_sweep_value(spec.base, spec.parameter, v);
    const rc::EquilibriumReport rep = rc::solve_equilibrium(sc);
    csv << rc::format_number(v);
    for (const auto& c : columns) csv << ',' << rc::format_number(sweep_column(c, sc, rep));
    csv << '\n';
  }
  if (out_path == "-") {
    std::cout << csv.str();
  } else {
    write_file(out_path, csv.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  bool pass;
  double worst;
  double tol;
};

class Verifier {
public:
  Verifier(std::uint64_t draws, std::uint64_t seed) : draws_(draws), seed_(seed) {}

  void check(const std::string& name, double worst, double tol) {
    results_.push_back({name, worst <= tol, worst, tol});
  }

  void check_at_least(const std::string& name, double value, double floor) {
    results_.push_back({name, value >= floor, value, floor});
  }

  int report() const {
    int failed = 0;
    for (const auto& r : results_) {
      if (!r.pass) ++failed;
      std::printf("[%s] %-38s worst %.3e  (tol %.1e)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                  r.worst, r.tol);
    }
    std::printf("verify: %zu/%zu checks passed\n", results_.size() - failed, results_.size());
    return failed == 0 ? 0 : 1;
  }

  void run() {
    closed_form_checks();
    invariance_checks();
    welfare_checks();
    monte_carlo_checks();
    mutation_canary();
  }

private:
  static constexpr double kGammaGrid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  static constexpr double kLambdaGrid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  static constexpr double kTauGrid[5] = {0.1, 0.5, 1.0, 2.0, 10.0};
  static constexpr double kUnitGrid[3] = {0.25, 0.5, 0.75};

  void closed_form_checks() {
    double worst_main = 0.0;
    double worst_l1 = 0.0, worst_gap_l1 = 0.0;
    for (double g : kGammaGrid) {
      for (double l : kLambdaGrid) {
        for (double t : kTauGrid) {
          const auto sc = rc::Scenario::main(g, l, 1.0, t, 1.0);
          const auto rep = rc::solve_equilibrium(sc);
          worst_main = std::max(worst_main,
                                std::abs(rep.strategy.slope - rc::closed_form_strategy(sc).slope));
          if (l == 1.0) {
            worst_l1 = std::max(
                worst_l1, std::abs(rep.strategy.slope - rep.benchmark_strategy.slope));
            worst_gap_l1 = std::max(worst_gap_l1, rep.welfare_gap());
          }
        }
      }
    }
    check("solver-vs-closed-form (main)", worst_main, 1e-6);
    check("lambda-1 slope protection", worst_l1, 1e-6);
    check("lambda-1 welfare protection", worst_gap_l1, 1e-9);

    double worst_exo = 0.0, worst_exo_bench = 0.0;
    for (double kp : kUnitGrid) {
      for (double al : kUnitGrid) {
        for (double de : kUnitGrid) {
          const auto sc = rc::Scenario::exogeneity_only(kp, al, de, 1.0, 1.0, 1.0);
          const auto rep = rc::solve_equilibrium(sc);
          worst_exo = std::max(worst_exo, std::abs(rep.strategy.slope - 1.0 / (1.0 + kp)));
          worst_exo_bench = std::max(
              worst_exo_bench, std::abs(rep.benchmark_strategy.slope - 1.0 / (1.0 + kp - al * de)));
        }
      }
    }
    check("solver-vs-closed-form (exogeneity-only)", worst_exo, 1e-9);
    check("benchmark closed form (exogeneity-only)", worst_exo_bench, 1e-12);

    double worst_rev = 0.0;
    int worst_iters = 0;
    for (double g : kGammaGrid) {
      for (double t : {0.1, 1.0, 10.0}) {
        for (double k0 : {0.0, 2.0}) {
          const auto sc = rc::Scenario::reverse_only(g, 0.5, 1.0, t, 1.0);
          const auto rep = rc::solve_equilibrium(sc, {0.0, k0, 0.0});
          worst_rev = std::max(worst_rev, std::abs(rep.strategy.slope - 1.0 / (1.0 + g)));
          worst_iters = std::max(worst_iters, rep.iterations);
        }
      }
    }
    check("solver-vs-closed-form (reverse-only)", worst_rev, 1e-6);
    check("reverse-only iteration budget", worst_iters, 200);
  }

  void invariance_checks() {
    // Benchmark slope must not move across noise variances (solved against
    // the true model).
    double worst_bench = 0.0;
    for (double g : {0.0, 0.5, 1.0}) {
      for (double ve : {0.5, 1.0, 2.0}) {
        for (double vh : {0.5, 1.0, 2.0}) {
          const auto sc = rc::Scenario::main(g, 0.5, 1.0, ve, vh);
          const auto rep = rc::solve_equilibrium(sc, rc::true_dag(sc));
          worst_bench = std::max(worst_bench, std::abs(rep.strategy.slope - 1.0 / (1.0 + g)));
        }
      }
    }
    check("benchmark variance invariance", worst_bench, 1e-9);

    double worst_exo_var = 0.0;
    for (double ve : {0.5, 1.0, 2.0}) {
      for (double vh : {0.5, 1.0, 2.0}) {
        const auto sc = rc::Scenario::exogeneity_only(0.5, 0.5, 0.5, 1.0, ve, vh);
        const auto rep = rc::solve_equilibrium(sc);
        worst_exo_var = std::max(worst_exo_var, std::abs(rep.strategy.slope - 1.0 / 1.5));
      }
    }
    check("exogeneity-only variance invariance", worst_exo_var, 1e-9);

    // Rigidity in tau: equilibrium slope strictly decreasing, vanishing as
    // tau explodes.
    double worst_monotone = -std::numeric_limits<double>::infinity();  // > 0 means an increase
    for (double g : {0.0, 0.5, 1.0}) {
      for (double l : {0.0, 0.5}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double t : kTauGrid) {
          const auto sc = rc::Scenario::main(g, l, 1.0, t, 1.0);
          const double k = rc::solve_equilibrium(sc).strategy.slope;
          worst_monotone = std::max(worst_monotone, k - prev);
          prev = k;
        }
      }
    }
    check("tau rigidity (strictly decreasing)", worst_monotone, -1e-12);
    const auto sc_huge = rc::Scenario::main(0.0, 0.0, 1.0, 1e4, 1.0);
    check("tau rigidity (k at tau=1e4)", rc::solve_equilibrium(sc_huge).strategy.slope, 1e-3);

    double worst_gap_monotone = -std::numeric_limits<double>::infinity();
    double prev_gap = -std::numeric_limits<double>::infinity();
    for (double de : kUnitGrid) {
      const auto sc = rc::Scenario::exogeneity_only(0.5, 0.5, de, 1.0, 1.0, 1.0);
      const double gap = rc::solve_equilibrium(sc).welfare_gap();
      if (std::isfinite(prev_gap)) worst_gap_monotone = std::max(worst_gap_monotone, prev_gap - gap);
      prev_gap = gap;
    }
    check("exogeneity-only gap increasing in delta", worst_gap_monotone, -1e-12);

    double worst_intercept = 0.0;
    for (const auto& name : rc::preset_names()) {
      const auto sc = rc::preset(name);
      const auto rep = rc::solve_equilibrium(sc);
      const auto joint = rc::objective_joint(sc, rep.strategy);
      worst_intercept = std::max(worst_intercept, std::abs(rep.strategy.intercept));
      worst_intercept = std::max(worst_intercept, std::abs(joint.mean_of("y")));
    }
    check("equilibrium intercept and E(y) are zero", worst_intercept, 1e-9);
  }

  void welfare_checks() {
    // Analytic welfare against the hand-derived formula.
    std::mt19937_64 gen(seed_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> var(0.1, 3.0);
    std::uniform_real_distribution<double> slope(-1.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double g = unit(gen), l = unit(gen);
      const double vt = var(gen), ve = var(gen), vh = var(gen);
      const auto sc = i % 2 == 0 ? rc::Scenario::main(g, l, vt, ve, vh)
                                 : rc::Scenario::reverse_only(g, l, vt, ve, vh);
      const rc::LinearStrategy st{slope(gen) * 0.5, slope(gen), unit(gen) * 0.01};
      const double oracle = -((1.0 - (1.0 + g) * st.slope) * (1.0 - (1.0 + g) * st.slope) * vt +
                              (1.0 + g) * (1.0 + g) *
                                  (st.intercept * st.intercept + st.tremble_variance) +
                              ve);
      worst = std::max(worst, std::abs(rc::objective_welfare(sc, st) - oracle));
    }
    check("welfare analytic identity", worst, 1e-12);
  }

  void monte_carlo_checks() {
    struct Point {
      rc::Scenario scenario;
      rc::LinearStrategy strategy;
    };
    const std::vector<Point> points = {
        {rc::Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0), {0.0, 1.0 / 1.5, 1e-6}},
        {rc::Scenario::main(0.0, 0.25, 1.0, 2.0, 1.0), {0.5, 0.3, 0.0016}},
        {rc::Scenario::main(1.0, 1.0, 2.0, 0.5, 1.5), {0.0, 0.5, 0.0}},
        {rc::Scenario::exogeneity_only(0.5, 0.5, 0.5, 1.0, 1.0, 1.0), {0.0, 1.0 / 1.5, 1e-6}},
        {rc::Scenario::exogeneity_only(0.25, 0.5, 0.75, 1.0, 0.5, 2.0), {0.4, 0.8, 0.0025}},
        {rc::Scenario::exogeneity_only(0.75, 0.25, 0.3, 2.0, 1.0, 1.0), {0.0, 0.6, 0.0}},
        {rc::Scenario::reverse_only(0.0, 0.5, 1.0, 1.0, 1.0), {0.0, 1.0, 1e-6}},
        {rc::Scenario::reverse_only(0.5, 0.5, 1.0, 2.0, 0.5), {0.2, 2.0 / 3.0, 0.0009}},
        {rc::Scenario::reverse_only(1.0, 0.25, 0.5, 1.0, 2.0), {0.0, 0.5, 0.0}},
    };
    double worst_cov = 0.0;
    std::uint64_t point_seed = seed_;
    for (const auto& p : points) {
      const auto emp = rc::simulate(p.scenario, p.strategy, {draws_, point_seed++, 0});
      const auto ana = rc::objective_joint(p.scenario, p.strategy);
      for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
          const double dev = std::abs(emp.sample_covariance(i, j) - ana.covariance()(i, j));
          const double se = emp.cov_standard_error(i, j);
          worst_cov = std::max(worst_cov, dev == 0.0 ? 0.0 : dev / se);
        }
      }
    }
    check("mc covariance vs analytic (5 SE units)", worst_cov, 5.0);

    double worst_welfare = 0.0;
    for (std::size_t i : {0u, 3u, 6u}) {
      const auto& p = points[i];
      const auto est = rc::empirical_welfare(p.scenario, p.strategy, {draws_, point_seed++, 0});
      const double dev = std::abs(est.value - rc::objective_welfare(p.scenario, p.strategy));
      worst_welfare = std::max(worst_welfare, dev / est.standard_error);
    }
    check("mc welfare vs analytic (5 SE units)", worst_welfare, 5.0);

    // Finite-sample OLS recovery of the subjective and true factorizations.
    // The strategy tremble is sized so the regressor block is well
    // conditioned; the population coefficients do not depend on it.
    const auto sc = rc::Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);
    const rc::LinearStrategy st{0.0, 1.0 / 1.5, 0.05};
    const auto emp = rc::simulate(sc, st, {draws_, point_seed++, 0});
    const double fit_tol = 1e-2 * std::sqrt(1e7 / static_cast<double>(draws_));
    const auto beta = sc.beta();
    const auto fitted = rc::empirical_fit(emp, rc::subjective_dag(sc));
    const auto& fx = fitted.factor("x");  // on (theta, a, y)
    double worst_fit = std::max({std::abs(fx.coefficients(0) - (1.0 - beta)),
                                 std::abs(fx.coefficients(1) -
                                          (beta * sc.lambda() + beta * sc.gamma() - sc.gamma())),
                                 std::abs(fx.coefficients(2) - beta)});
    const auto fitted_true = rc::empirical_fit(emp, rc::true_dag(sc));
    const auto& tx = fitted_true.factor("x");  // on (theta, a)
    worst_fit = std::max({worst_fit, std::abs(tx.coefficients(0) - 1.0),
                          std::abs(tx.coefficients(1) + sc.gamma())});
    check("mc regression fit recovery", worst_fit, fit_tol);
  }

  void mutation_canary() {
    // A 1e-3 perturbation of the equilibrium-slope denominator must exceed
    // the closed-form check tolerance everywhere on the verification grid, so
    // a corrupted build cannot pass check 1.
    double min_effect = std::numeric_limits<double>::infinity();
    for (double g : kGammaGrid) {
      for (double l : kLambdaGrid) {
        for (double t : kTauGrid) {
          const double denom = 1.0 + g + t * (1.0 - l);
          min_effect = std::min(min_effect, std::abs(1.0 / denom - 1.0 / (denom + 1e-3)));
        }
      }
    }
    check_at_least("mutation canary margin over check tol", min_effect, 1e-6);
  }

  std::uint64_t draws_;
  std::uint64_t seed_;
  std::vector<CheckResult> results_;
};

int run_verify(std::uint64_t draws, std::uint64_t seed) {
  if (draws < 10'000) {
    std::cerr << "warning: sampling tolerances are unreliable below 10000 draws\n";
  }
  std::printf("verify: %llu draws, seed %llu\n", static_cast<unsigned long long>(draws),
              static_cast<unsigned long long>(seed));
  Verifier v(draws, seed);
  v.run();
  return v.report();
}

// ---------------------------------------------------------------------------

int run_presets() {
  for (const auto& [name, text] : rc::preset_definitions()) {
    std::cout << name << ":\n";
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) std::cout << "  " << line << "\n";
  }
  std::cout << "(preset parameter values are implementation defaults, not estimates)\n";
  return 0;
}

int run_dags(const ScenarioArgs& args, const std::string& out_path) {
  const rc::Scenario sc = build_scenario(args);
  std::ostringstream out;
  out << "# true model\n" << rc::true_dag(sc).to_edge_list();
  out << "# subjective model\n" << rc::subjective_dag(sc).to_edge_list();
  if (out_path.empty() || out_path == "-") {
    std::cout << out.str();
  } else {
    write_file(out_path, out.str());
  }
  return 0;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("REVCAUSAL_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw rc::ValidationError("seed", "REVCAUSAL_SEED is not an integer");
    }
  }
  return 20240917ull;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personal-equilibrium solver for linear-Gaussian causal-misperception models"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "solve one scenario and report the equilibrium");
  add_scenario_options(*solve_cmd, solve_args.scenario);
  solve_cmd->add_option("--init-k", solve_args.init_k, "initial strategy slope");
  solve_cmd->add_option("--init-b", solve_args.init_b, "initial strategy intercept");
  solve_cmd->add_option("--tol", solve_args.tol, "fixed-point tolerance");
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "iteration budget");
  solve_cmd->add_option("--subjective-dag", solve_args.subjective,
                        "model | true | path to an edge-list file");
  solve_cmd->add_flag("--json", solve_args.as_json, "emit JSON instead of key = value lines");

  std::string sweep_spec, sweep_out = "-";
  bool sweep_unsafe = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "solve along a parameter grid, write CSV");
  sweep_cmd->add_option("spec", sweep_spec, "sweep spec file")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "output CSV path (- for stdout)");
  sweep_cmd->add_flag("--unsafe-params", sweep_unsafe, "skip parameter range checks");

  std::uint64_t verify_draws = 1'000'000;
  std::optional<std::uint64_t> verify_seed;
  auto* verify_cmd =
      app.add_subcommand("verify", "cross-check solver, closed forms and Monte Carlo");
  verify_cmd->add_option("--draws", verify_draws, "Monte Carlo draws per check");
  verify_cmd->add_option("--seed", verify_seed, "RNG seed (default: REVCAUSAL_SEED or built-in)");

  auto* presets_cmd = app.add_subcommand("presets", "list the named scenario presets");

  ScenarioArgs dag_args;
  std::string dag_out;
  auto* dags_cmd = app.add_subcommand("dags", "print the true and subjective DAG edge lists");
  add_scenario_options(*dags_cmd, dag_args);
  dags_cmd->add_option("-o,--out", dag_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_spec, sweep_out, sweep_unsafe);
    if (verify_cmd->parsed()) return run_verify(verify_draws, verify_seed.value_or(default_seed()));
    if (presets_cmd->parsed()) return run_presets();
    if (dags_cmd->parsed()) return run_dags(dag_args, dag_out);
  } catch (const rc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
