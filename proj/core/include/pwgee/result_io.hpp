#pragma once

#include "pwgee/common.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/solver.hpp"
#include "pwgee/tuning.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pwgee {

// JSON document for one fit: sparse beta (index, name, value), active set,
// diagnostics and an echo of the model and configuration.
std::string fit_result_json(const FitResult& result, const ModelSpec& model, const FitConfig& config,
                            const std::vector<std::string>& covariate_names);

struct StoredFit {
  Vector beta;  // dense, length p
  IndexSet active_set;
  bool converged = false;
  double final_score_norm = 0.0;
};

// Reads back what fit_result_json wrote.
StoredFit parse_fit_result_json(const std::string& text);
StoredFit load_fit_result(const std::string& path);

// lambda,fold,loss rows (fold "all" carries the summed loss).
void write_cv_curve_csv(std::ostream& out, const CvResult& cv);
std::string cv_selection_json(const CvResult& cv, const ModelSpec& model);

// Reads a beta vector from JSON: either {"beta_star": [..]} or a plain array.
Vector parse_beta_json(const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace pwgee
