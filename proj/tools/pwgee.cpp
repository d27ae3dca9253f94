// pwgee: fit, cross-validate, simulate, summarize and benchmark penalized
// weighted GEE models from the command line.

#include "pwgee/bench.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/metrics.hpp"
#include "pwgee/result_io.hpp"
#include "pwgee/simgen.hpp"
#include "pwgee/solver.hpp"
#include "pwgee/tuning.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pwgee;

namespace {

struct DataArgs {
  std::string path;
  std::string response = "y";
  std::string cluster = "cluster";
  std::vector<std::string> covariates;
  bool standardize = false;
};

struct ModelArgs {
  std::string family = "gaussian";
  std::string corr = "indep";
  std::optional<double> rho;
  std::string penalty = "scad";
  double scad_a = 3.7;
  double mcp_gamma = 3.0;
  std::string weighting = "on";
  std::uint64_t seed = 0;
};

struct SolverArgs {
  double tol = 1e-15;
  int max_iter = 100;
  double zero_threshold = 1e-3;
  std::vector<std::string> exempt;
  std::string screen = "score";
  bool no_polish = false;
};

void add_data_options(CLI::App* app, DataArgs& d) {
  app->add_option("--data", d.path, "long-format CSV, one row per observation")->required();
  app->add_option("--response", d.response, "response column")->capture_default_str();
  app->add_option("--cluster", d.cluster, "cluster id column")->capture_default_str();
  app->add_option("--covariates", d.covariates, "covariate columns (default: all others)")->delimiter(',');
  app->add_flag("--standardize", d.standardize, "center and scale covariates (pooled sample sd)");
}

void add_model_options(CLI::App* app, ModelArgs& m) {
  app->add_option("--family", m.family, "gaussian|poisson|binomial")->capture_default_str();
  app->add_option("--corr", m.corr, "working correlation: indep|exch|ar1")->capture_default_str();
  app->add_option("--rho", m.rho, "fix the working correlation parameter (default: estimate)");
  app->add_option("--penalty", m.penalty, "scad|mcp|lasso")->capture_default_str();
  app->add_option("--scad-a", m.scad_a, "SCAD shape a > 2")->capture_default_str();
  app->add_option("--mcp-gamma", m.mcp_gamma, "MCP shape gamma > 1")->capture_default_str();
  app->add_option("--weighting", m.weighting, "cluster-size weighting: on|off")->capture_default_str();
  app->add_option("--seed", m.seed, "seed for the Rademacher weights")->capture_default_str();
}

void add_solver_options(CLI::App* app, SolverArgs& s) {
  app->add_option("--tol", s.tol, "l1 step-change tolerance")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "iteration cap")->capture_default_str();
  app->add_option("--zero-threshold", s.zero_threshold, "hard threshold for penalized coefficients")
      ->capture_default_str();
  app->add_option("--exempt", s.exempt, "covariates left unpenalized (e.g. an intercept)")->delimiter(',');
  app->add_option("--screen", s.screen, "screening statistic: score|cluster")->capture_default_str();
  app->add_flag("--no-polish", s.no_polish, "skip the Newton polish after hard thresholding");
}

LongitudinalDataset load_data(const DataArgs& d) {
  LongitudinalDataset data = load_long_csv(d.path, {d.response, d.cluster, d.covariates});
  if (d.standardize) data = standardize_covariates(data).data;
  return data;
}

ModelSpec make_model(const ModelArgs& m, double lambda) {
  ModelSpec model;
  model.family = parse_family(m.family);
  model.correlation = {parse_correlation(m.corr), m.rho};
  model.penalty = {parse_penalty(m.penalty), lambda, m.scad_a, m.mcp_gamma};
  model.weighting = parse_weighting(m.weighting);
  model.seed = m.seed;
  return model;
}

FitConfig make_config(const SolverArgs& s, const LongitudinalDataset& data) {
  FitConfig cfg;
  cfg.convergence_tol = s.tol;
  cfg.max_iter = s.max_iter;
  cfg.zero_threshold = s.zero_threshold;
  cfg.screen = parse_screen_rule(s.screen);
  cfg.polish = !s.no_polish;
  const auto& names = data.covariate_names();
  for (const auto& name : s.exempt) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("--exempt: no covariate named '" + name + "'");
    cfg.penalty_exempt.push_back(static_cast<Index>(it - names.begin()));
  }
  std::sort(cfg.penalty_exempt.begin(), cfg.penalty_exempt.end());
  return cfg;
}

// Writes to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

int run_fit(const DataArgs& d, const ModelArgs& m, const SolverArgs& s, double lambda,
            const std::string& out) {
  const LongitudinalDataset data = load_data(d);
  const ModelSpec model = make_model(m, lambda);
  const FitConfig cfg = make_config(s, data);
  const FitResult r = fit_pwgee(data, model, cfg);
  emit(out, fit_result_json(r, model, cfg, data.covariate_names()));
  if (!r.converged) std::cerr << "warning: not converged after " << r.iterations << " iterations\n";
  return 0;
}

struct CvArgs {
  std::vector<double> lambdas;
  int grid_size = 25;
  double grid_ratio = 0.01;
  std::string loss = "auto";
  std::string rule = "one_se_paired";
  std::uint64_t cv_seed = 0;
  int threads = 1;
  std::string curve_out;
  std::string out;
  std::string fit_out;
};

int run_cv(const DataArgs& d, const ModelArgs& m, const SolverArgs& s, const CvArgs& c) {
  const LongitudinalDataset data = load_data(d);
  ModelSpec model = make_model(m, 0.0);
  const FitConfig cfg = make_config(s, data);
  std::vector<double> grid = c.lambdas;
  if (grid.empty()) grid = default_lambda_grid(data, model, cfg, c.grid_size, c.grid_ratio);
  const CvResult cv =
      cv_select(data, model, grid, cfg, {c.cv_seed, c.threads, parse_cv_loss(c.loss), parse_cv_rule(c.rule)});
  std::ostringstream curve;
  write_cv_curve_csv(curve, cv);
  if (!c.curve_out.empty()) emit(c.curve_out, curve.str());
  emit(c.out, cv_selection_json(cv, model));
  if (!c.fit_out.empty()) {
    model.penalty.lambda = cv.lambda_star;
    const FitResult r = fit_pwgee(data, model, cfg);
    emit(c.fit_out, fit_result_json(r, model, cfg, data.covariate_names()));
  }
  if (cv.failed_fits > 0) std::cerr << "warning: " << cv.failed_fits << " training fits failed\n";
  return 0;
}

struct SimArgs {
  ScenarioSpec spec;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int run_simulate(const SimArgs& a) {
  if (a.reps < 1) throw Error("--reps must be >= 1");
  fs::create_directories(a.out);
  ScenarioSpec spec = a.spec;
  validate(spec);
  {
    std::ostringstream truth;
    truth << "{\n  \"example\": " << spec.example << ",\n  \"beta_star\": [";
    const Vector b = beta_star(spec);
    for (Index j = 0; j < b.size(); ++j) truth << (j ? ", " : "") << b(j);
    truth << "]\n}\n";
    emit((fs::path(a.out) / "truth.json").string(), truth.str());
  }
  int clamps = 0;
  for (int r = 0; r < a.reps; ++r) {
    spec.seed = replicate_seeds(a.seed, r).data;
    SimulationDiagnostics diag;
    const LongitudinalDataset data = generate(spec, &diag);
    clamps += diag.log_argument_clamps;
    char name[32];
    std::snprintf(name, sizeof name, "rep_%04d.csv", r + 1);
    std::ofstream out(fs::path(a.out) / name, std::ios::binary);
    if (!out) throw Error("cannot write into " + a.out);
    write_long_csv(out, data);
  }
  std::cerr << "wrote " << a.reps << " datasets to " << a.out;
  if (clamps > 0) std::cerr << " (" << clamps << " log-argument clamps)";
  std::cerr << '\n';
  return 0;
}

struct MetricsArgs {
  std::vector<std::string> fits;
  std::string truth;
  int example = 0;
  Index p = 0;
  std::string label = "fit";
  std::string csv;
};

int run_metrics(const MetricsArgs& a) {
  Vector truth_beta;
  if (!a.truth.empty()) {
    truth_beta = parse_beta_json(read_text_file(a.truth));
  } else if (a.example > 0 && a.p > 0) {
    ScenarioSpec spec;
    spec.example = a.example;
    spec.p = a.p;
    truth_beta = beta_star(spec);
  } else {
    throw Error("metrics needs --truth or both --example and --p");
  }
  const SelectionTruth truth = SelectionTruth::from_beta(truth_beta);
  ExperimentGrid grid;
  MethodSpec method;
  method.label = a.label;
  grid.methods.push_back(method);
  ExperimentResult result;
  int rep = 0;
  for (const auto& path : a.fits) {
    const StoredFit fit = load_fit_result(path);
    ReplicateRecord rec;
    rec.rep = rep++;
    rec.method = a.label;
    rec.selection = selection_metrics(fit.beta, truth);
    rec.squared_error = squared_error(fit.beta, truth.beta_star);
    rec.converged = fit.converged;
    rec.violation = fit.final_score_norm;
    result.records.push_back(std::move(rec));
  }
  result.summary = summarize(grid, result.records);
  write_table(std::cout, result);
  if (!a.csv.empty()) {
    std::ostringstream csv;
    write_summary_csv(csv, result);
    emit(a.csv, csv.str());
  }
  return 0;
}

struct BenchArgs {
  std::string config;
  int threads = 1;
  std::string out;
  bool quiet = false;
};

int run_bench(const BenchArgs& a) {
  const ExperimentGrid grid = load_grid(a.config);
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](int done, int total) { std::cerr << "\rreplicate " << done << "/" << total << std::flush; };
  }
  const ExperimentResult result = run_experiment(grid, a.threads, progress);
  if (!a.quiet) std::cerr << '\n';
  std::ostringstream summary, replicates, table;
  write_summary_csv(summary, result);
  write_replicates_csv(replicates, result);
  write_table(table, result);
  if (result.log_argument_clamps > 0) {
    table << "note: " << result.log_argument_clamps << " log-argument clamps in data generation\n";
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    emit((fs::path(a.out) / "summary.csv").string(), summary.str());
    emit((fs::path(a.out) / "replicates.csv").string(), replicates.str());
    emit((fs::path(a.out) / "table.txt").string(), table.str());
  }
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized weighted GEE for clustered data with informative cluster size"};
  app.require_subcommand(1);

  DataArgs data;
  ModelArgs model;
  SolverArgs solver;

  auto* fit = app.add_subcommand("fit", "fit at one lambda and write the result as JSON");
  double lambda = 0.0;
  std::string fit_out;
  add_data_options(fit, data);
  add_model_options(fit, model);
  add_solver_options(fit, solver);
  fit->add_option("--lambda", lambda, "tuning parameter (0 gives the unpenalized fit)")->required();
  fit->add_option("--out", fit_out, "output JSON (default stdout)");

  auto* cv = app.add_subcommand("cv", "fourfold cross-validation over a lambda grid");
  CvArgs cv_args;
  add_data_options(cv, data);
  add_model_options(cv, model);
  add_solver_options(cv, solver);
  cv->add_option("--lambdas", cv_args.lambdas, "explicit grid (default: log-spaced from lambda_max)")
      ->delimiter(',');
  cv->add_option("--grid-size", cv_args.grid_size, "points in the default grid")->capture_default_str();
  cv->add_option("--grid-ratio", cv_args.grid_ratio, "smallest/largest lambda of the default grid")
      ->capture_default_str();
  cv->add_option("--cv-loss", cv_args.loss, "held-out loss pooling: auto|observation|cluster")
      ->capture_default_str();
  cv->add_option("--cv-rule", cv_args.rule, "selection rule: one_se_paired|min_stationary|min|one_se")->capture_default_str();
  cv->add_option("--cv-seed", cv_args.cv_seed, "seed for folds and per-fit weights")->capture_default_str();
  cv->add_option("--threads", cv_args.threads, "worker threads")->capture_default_str();
  cv->add_option("--curve", cv_args.curve_out, "write the CV curve (lambda,fold,loss) here");
  cv->add_option("--out", cv_args.out, "selection JSON (default stdout)");
  cv->add_option("--fit-out", cv_args.fit_out, "refit at the selected lambda and write its JSON here");

  auto* sim = app.add_subcommand("simulate", "write simulated datasets as CSV");
  SimArgs sim_args;
  sim->add_option("--example", sim_args.spec.example, "design 1-4")->required();
  sim->add_option("--n", sim_args.spec.n, "clusters")->capture_default_str();
  sim->add_option("--p", sim_args.spec.p, "covariates")->capture_default_str();
  sim->add_option("--rho-gen", sim_args.spec.rho_gen, "within-cluster correlation of the errors")
      ->capture_default_str();
  sim->add_option("--reps", sim_args.reps, "number of datasets")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "master seed")->capture_default_str();
  sim->add_option("--out", sim_args.out, "output directory")->capture_default_str();

  auto* met = app.add_subcommand("metrics", "TP/FP/CR/MSE over a set of fit results");
  MetricsArgs met_args;
  met->add_option("fits", met_args.fits, "fit result JSON files")->required();
  met->add_option("--truth", met_args.truth, "JSON with beta_star");
  met->add_option("--example", met_args.example, "take beta_star from simulation design 1-4");
  met->add_option("--p", met_args.p, "dimension for --example");
  met->add_option("--label", met_args.label, "row label")->capture_default_str();
  met->add_option("--csv", met_args.csv, "also write the summary as CSV");

  auto* bench = app.add_subcommand("bench", "run a Monte-Carlo experiment grid");
  BenchArgs bench_args;
  bench->add_option("--config", bench_args.config, "grid JSON")->required();
  bench->add_option("--threads", bench_args.threads, "replicates run in parallel")->capture_default_str();
  bench->add_option("--out", bench_args.out, "directory for summary.csv, replicates.csv, table.txt");
  bench->add_flag("--quiet", bench_args.quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return run_fit(data, model, solver, lambda, fit_out);
    if (*cv) return run_cv(data, model, solver, cv_args);
    if (*sim) return run_simulate(sim_args);
    if (*met) return run_metrics(met_args);
    if (*bench) return run_bench(bench_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
