#include "pwgee/bench.hpp"

#include "pwgee/random.hpp"
#include "pwgee/result_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <mutex>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <set>

namespace pwgee {

namespace {

const char* corr_short(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::independence: return "indep";
    case CorrelationKind::exchangeable: return "exch";
    case CorrelationKind::ar1: return "ar1";
  }
  return "indep";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

ReplicateRecord run_method(const MethodSpec& method, const LongitudinalDataset& data,
                           const ScenarioSpec& scenario, const ExperimentGrid& grid,
                           const ReplicateSeeds& seeds, const SelectionTruth& truth) {
  ReplicateRecord rec;
  rec.method = method.label;
  ModelSpec model;
  model.family = FamilySpec{is_poisson(scenario) ? FamilyKind::poisson_log : FamilyKind::gaussian_identity};
  model.correlation = method.correlation;
  model.penalty = method.penalty;
  model.weighting = method.weighting;
  model.seed = seeds.weights;
  try {
    FitResult fit;
    if (method.oracle) {
      fit = fit_wgee_oracle(data, truth.true_support, model, grid.fit);
    } else {
      if (method.lambda) {
        model.penalty.lambda = *method.lambda;
      } else {
        const auto lambdas = default_lambda_grid(data, model, grid.fit, grid.grid_size, grid.grid_ratio);
        const CvResult cv = cv_select(data, model, lambdas, grid.fit, {seeds.cv, 1, grid.cv_loss, grid.cv_rule});
        model.penalty.lambda = cv.lambda_star;
      }
      fit = fit_pwgee(data, model, grid.fit);
    }
    if (!fit.beta.allFinite()) throw Error("non-finite coefficients");
    rec.lambda = model.penalty.lambda;
    rec.selection = selection_metrics(fit.beta, truth);
    rec.squared_error = squared_error(fit.beta, truth.beta_star);
    rec.converged = fit.converged;
    rec.violation = fit.final_score_norm;
    rec.iterations = fit.iterations;
    rec.rho_hat = fit.rho_hat;
    rec.beta = std::move(fit.beta);
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

std::string default_label(const MethodSpec& method) {
  const bool weighted = method.weighting == Weighting::on;
  std::string base = method.oracle ? (weighted ? "Oracle.WGEE" : "Oracle.GEE") : (weighted ? "PWGEE" : "PGEE");
  return base + "." + corr_short(method.correlation.kind);
}

void finalize(ExperimentGrid& grid) {
  if (grid.reps < 1) throw Error("experiment needs reps >= 1");
  if (grid.methods.empty()) throw Error("experiment grid has no methods");
  if (grid.grid_size < 1) throw Error("lambda grid size must be >= 1");
  validate(grid.scenario);
  validate(grid.fit, grid.scenario.p);
  std::set<std::string> seen;
  for (auto& m : grid.methods) {
    if (m.label.empty()) m.label = default_label(m);
    if (!seen.insert(m.label).second) throw Error("duplicate method label '" + m.label + "'");
    if (m.lambda) {
      PenaltySpec check = m.penalty;
      check.lambda = *m.lambda;
      validate(check);
    }
  }
}

ReplicateSeeds replicate_seeds(std::uint64_t master_seed, int rep) {
  const std::uint64_t base = derive_seed(master_seed, static_cast<std::uint64_t>(rep));
  return {base, derive_seed(base, 1), derive_seed(base, 2)};
}

std::vector<MethodSummary> summarize(const ExperimentGrid& grid,
                                     const std::vector<ReplicateRecord>& records) {
  std::vector<MethodSummary> out;
  for (const auto& m : grid.methods) {
    MethodSummary s;
    s.method = m.label;
    std::vector<double> tp, fp, cr, se;
    for (const auto& r : records) {
      if (r.method != m.label) continue;
      if (r.failed) {
        ++s.failed;
        continue;
      }
      ++s.completed;
      if (r.converged) ++s.converged;
      tp.push_back(r.selection.tp);
      fp.push_back(r.selection.fp);
      cr.push_back(r.selection.cr);
      se.push_back(r.squared_error);
    }
    s.tp = summarize(tp);
    s.fp = summarize(fp);
    s.cr = summarize(cr);
    s.mse = summarize(se);
    s.single_replicate = s.completed == 1;
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentGrid& input, int threads, const ProgressFn& progress) {
  ExperimentGrid grid = input;
  finalize(grid);
  const std::size_t n_methods = grid.methods.size();
  std::vector<ReplicateRecord> records(static_cast<std::size_t>(grid.reps) * n_methods);
  std::vector<int> clamps(static_cast<std::size_t>(grid.reps), 0);
  std::atomic<int> done{0};
  std::mutex progress_mutex;

  parallel_for(grid.reps, threads, [&](Index r) {
    const int rep = static_cast<int>(r);
    const ReplicateSeeds seeds = replicate_seeds(grid.master_seed, rep);
    ScenarioSpec scenario = grid.scenario;
    scenario.seed = seeds.data;
    SimulationDiagnostics diag;
    const LongitudinalDataset data = generate(scenario, &diag);
    clamps[static_cast<std::size_t>(rep)] = diag.log_argument_clamps;
    const SelectionTruth truth = SelectionTruth::from_beta(beta_star(scenario));
    const std::uint64_t hash = data.content_hash();
    for (std::size_t k = 0; k < n_methods; ++k) {
      ReplicateRecord rec = run_method(grid.methods[k], data, scenario, grid, seeds, truth);
      rec.rep = rep;
      rec.data_hash = hash;
      records[static_cast<std::size_t>(rep) * n_methods + k] = std::move(rec);
    }
    const int finished = ++done;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(finished, grid.reps);
    }
  });

  ExperimentResult result;
  result.summary = summarize(grid, records);
  result.records = std::move(records);
  for (int c : clamps) result.log_argument_clamps += c;
  return result;
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,completed,failed,converged,tp_mean,tp_sd,fp_mean,fp_sd,cr_mean,cr_sd,mse_mean,mse_sd,"
         "single_replicate\n";
  for (const auto& s : result.summary) {
    out << csv_field(s.method) << ',' << s.completed << ',' << s.failed << ',' << s.converged << ','
        << num(s.tp.mean) << ',' << num(s.tp.sd) << ',' << num(s.fp.mean) << ',' << num(s.fp.sd) << ','
        << num(s.cr.mean) << ',' << num(s.cr.sd) << ',' << num(s.mse.mean) << ',' << num(s.mse.sd) << ','
        << (s.single_replicate ? 1 : 0) << '\n';
  }
}

void write_replicates_csv(std::ostream& out, const ExperimentResult& result) {
  out << "rep,method,data_hash,failed,lambda,tp,fp,cr,squared_error,converged,violation,iterations,"
         "rho_hat,error\n";
  for (const auto& r : result.records) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.data_hash));
    out << r.rep << ',' << csv_field(r.method) << ',' << hash << ',' << (r.failed ? 1 : 0) << ','
        << num(r.lambda) << ',' << r.selection.tp << ',' << r.selection.fp << ',' << r.selection.cr << ','
        << num(r.squared_error) << ',' << (r.converged ? 1 : 0) << ',' << num(r.violation) << ','
        << r.iterations << ',' << (r.rho_hat ? num(*r.rho_hat) : std::string()) << ','
        << csv_field(r.error) << '\n';
  }
}

void write_table(std::ostream& out, const ExperimentResult& result) {
  auto cell = [](const MeanSd& m, int digits) {
    return fixed(m.mean, digits) + "(" + fixed(m.sd, digits) + ")";
  };
  std::vector<std::array<std::string, 6>> rows;
  rows.push_back({"Method", "TP", "FP", "CR", "MSE", "Failed"});
  for (const auto& s : result.summary) {
    rows.push_back({s.method, cell(s.tp, 2), cell(s.fp, 2), cell(s.cr, 2), cell(s.mse, 3),
                    std::to_string(s.failed)});
  }
  std::array<std::size_t, 6> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  }
  for (const auto& s : result.summary) {
    if (s.single_replicate) out << "note: " << s.method << " has a single replicate; sd reported as 0\n";
  }
}

ExperimentGrid parse_grid_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("grid config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentGrid g;
    const json& sc = j.at("scenario");
    g.scenario.example = sc.at("example").get<int>();
    g.scenario.n = sc.value("n", Index{200});
    g.scenario.p = sc.value("p", Index{500});
    g.scenario.rho_gen = sc.value("rho_gen", 0.5);
    g.reps = j.value("reps", 1);
    g.master_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("fit")) {
      const json& f = j["fit"];
      g.fit.max_iter = f.value("max_iter", g.fit.max_iter);
      g.fit.convergence_tol = f.value("tol", g.fit.convergence_tol);
      g.fit.zero_threshold = f.value("zero_threshold", g.fit.zero_threshold);
      g.fit.polish = f.value("polish", g.fit.polish);
      if (f.contains("screen")) g.fit.screen = parse_screen_rule(f["screen"].get<std::string>());
    }
    if (j.contains("cv")) {
      const json& c = j["cv"];
      g.grid_size = c.value("grid_size", g.grid_size);
      g.grid_ratio = c.value("ratio", g.grid_ratio);
      if (c.contains("loss")) g.cv_loss = parse_cv_loss(c["loss"].get<std::string>());
      if (c.contains("rule")) g.cv_rule = parse_cv_rule(c["rule"].get<std::string>());
    }
    for (const json& m : j.at("methods")) {
      MethodSpec ms;
      ms.label = m.value("label", std::string());
      ms.weighting = parse_weighting(m.value("weighting", std::string("on")));
      ms.correlation.kind = parse_correlation(m.value("corr", std::string("indep")));
      if (m.contains("rho") && !m["rho"].is_null()) ms.correlation.rho = m["rho"].get<double>();
      ms.oracle = m.value("oracle", false);
      ms.penalty.kind = parse_penalty(m.value("penalty", std::string("scad")));
      ms.penalty.scad_a = m.value("scad_a", ms.penalty.scad_a);
      ms.penalty.mcp_gamma = m.value("mcp_gamma", ms.penalty.mcp_gamma);
      if (m.contains("lambda") && !m["lambda"].is_null()) ms.lambda = m["lambda"].get<double>();
      g.methods.push_back(std::move(ms));
    }
    finalize(g);
    return g;
  } catch (const json::exception& e) {
    throw Error(std::string("grid config: ") + e.what());
  }
}

ExperimentGrid load_grid(const std::string& path) { return parse_grid_json(read_text_file(path)); }

}  // namespace pwgee
