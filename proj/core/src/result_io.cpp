#include "pwgee/result_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pwgee {

using nlohmann::json;

namespace {

json model_json(const ModelSpec& model) {
  json m;
  m["family"] = to_string(model.family);
  m["corr"] = to_string(model.correlation.kind);
  m["rho"] = model.correlation.rho ? json(*model.correlation.rho) : json(nullptr);
  m["penalty"] = to_string(model.penalty.kind);
  m["lambda"] = model.penalty.lambda;
  m["scad_a"] = model.penalty.scad_a;
  m["mcp_gamma"] = model.penalty.mcp_gamma;
  m["weighting"] = to_string(model.weighting);
  m["seed"] = model.seed;
  return m;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fit_result_json(const FitResult& result, const ModelSpec& model, const FitConfig& config,
                            const std::vector<std::string>& covariate_names) {
  json j;
  j["p"] = result.beta.size();
  json beta = json::array();
  for (Index k = 0; k < result.beta.size(); ++k) {
    if (result.beta(k) == 0.0) continue;
    json e;
    e["index"] = k;
    if (static_cast<std::size_t>(k) < covariate_names.size()) e["name"] = covariate_names[static_cast<std::size_t>(k)];
    e["value"] = result.beta(k);
    beta.push_back(e);
  }
  j["beta"] = beta;
  j["active_set"] = result.active_set;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["final_score_norm"] = result.final_score_norm;
  j["rho_hat"] = result.rho_hat ? json(*result.rho_hat) : json(nullptr);
  j["diagnostics"] = {{"variance_floor_hits", result.diagnostics.variance_floor_hits},
                      {"step_halvings", result.diagnostics.step_halvings},
                      {"ridge_jitters", result.diagnostics.ridge_jitters},
                      {"polish_iterations", result.diagnostics.polish_iterations},
                      {"entry_steps", result.diagnostics.entry_steps}};
  j["model"] = model_json(model);
  j["config"] = {{"max_iter", config.max_iter},
                 {"tol", config.convergence_tol},
                 {"zero_threshold", config.zero_threshold},
                 {"ridge_c", config.ridge_c},
                 {"penalty_exempt", config.penalty_exempt},
                 {"screen", to_string(config.screen)},
                 {"polish", config.polish}};
  return j.dump(2) + "\n";
}

StoredFit parse_fit_result_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    StoredFit s;
    s.beta = Vector::Zero(j.at("p").get<Index>());
    for (const json& e : j.at("beta")) {
      const auto k = e.at("index").get<Index>();
      if (k < 0 || k >= s.beta.size()) throw Error("fit result: beta index out of range");
      s.beta(k) = e.at("value").get<double>();
    }
    s.active_set = j.value("active_set", IndexSet{});
    s.converged = j.value("converged", false);
    s.final_score_norm = j.value("final_score_norm", 0.0);
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("fit result JSON: ") + e.what());
  }
}

StoredFit load_fit_result(const std::string& path) { return parse_fit_result_json(read_text_file(path)); }

void write_cv_curve_csv(std::ostream& out, const CvResult& cv) {
  out << "lambda,fold,loss\n";
  for (const auto& pt : cv.curve) out << num(pt.lambda) << ',' << pt.fold << ',' << num(pt.loss) << '\n';
  for (std::size_t l = 0; l < cv.lambda_grid.size(); ++l) {
    out << num(cv.lambda_grid[l]) << ",all," << num(cv.total_loss[l]) << '\n';
  }
}

std::string cv_selection_json(const CvResult& cv, const ModelSpec& model) {
  json j;
  j["lambda_star"] = cv.lambda_star;
  j["lambda_index"] = cv.lambda_index;
  j["lambda_grid"] = cv.lambda_grid;
  json totals = json::array();
  for (double t : cv.total_loss) totals.push_back(std::isfinite(t) ? json(t) : json(nullptr));
  j["total_loss"] = totals;
  j["failed_fits"] = cv.failed_fits;
  j["model"] = model_json(model);
  return j.dump(2) + "\n";
}

Vector parse_beta_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const json& arr = j.is_array() ? j : j.at("beta_star");
    const auto v = arr.get<std::vector<double>>();
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Index>(k)) = v[k];
    return out;
  } catch (const json::exception& e) {
    throw Error(std::string("truth JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pwgee
