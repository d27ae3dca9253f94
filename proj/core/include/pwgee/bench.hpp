#pragma once

#include "pwgee/common.hpp"
#include "pwgee/metrics.hpp"
#include "pwgee/simgen.hpp"
#include "pwgee/solver.hpp"
#include "pwgee/tuning.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pwgee {

struct MethodSpec {
  std::string label;  // generated from the other fields when empty
  Weighting weighting = Weighting::on;
  WorkingCorrelationSpec correlation;
  // Oracle methods fit the true support without a penalty.
  bool oracle = false;
  PenaltySpec penalty{PenaltyKind::scad, 0.0};
  // Fixed lambda; cross-validated over the default grid when absent.
  std::optional<double> lambda;
};

// "PWGEE.indep", "PGEE.exch", "Oracle.WGEE.ar1", ...
std::string default_label(const MethodSpec& method);

struct ExperimentGrid {
  ScenarioSpec scenario;  // scenario.seed is replaced per replicate
  std::vector<MethodSpec> methods;
  int reps = 1;
  std::uint64_t master_seed = 0;
  FitConfig fit;
  int grid_size = 25;
  double grid_ratio = 0.01;
  CvLossWeighting cv_loss = CvLossWeighting::follow_fit;
  CvRule cv_rule = CvRule::one_se_paired;
};

// Fills empty labels, then checks reps >= 1, unique labels, valid scenario.
void finalize(ExperimentGrid& grid);

// Seeds used inside replicate r; every method of the replicate shares them.
struct ReplicateSeeds {
  std::uint64_t data;     // ScenarioSpec::seed
  std::uint64_t weights;  // ModelSpec::seed of the final fit
  std::uint64_t cv;       // CvOptions::seed
};
ReplicateSeeds replicate_seeds(std::uint64_t master_seed, int rep);

struct ReplicateRecord {
  int rep = 0;
  std::string method;
  std::uint64_t data_hash = 0;
  bool failed = false;
  std::string error;
  double lambda = 0.0;
  SelectionMetrics selection;
  double squared_error = 0.0;
  bool converged = false;
  double violation = 0.0;
  int iterations = 0;
  std::optional<double> rho_hat;
  Vector beta;
};

struct MethodSummary {
  std::string method;
  int completed = 0;
  int failed = 0;
  int converged = 0;
  MeanSd tp, fp, cr, mse;  // mse: mean and sd of the per-replicate squared error
  bool single_replicate = false;
};

struct ExperimentResult {
  std::vector<ReplicateRecord> records;  // ordered by (rep, method)
  std::vector<MethodSummary> summary;    // ordered as in the grid
  int log_argument_clamps = 0;
};

// Progress callback receives the number of finished replicates.
using ProgressFn = std::function<void(int done, int total)>;

ExperimentResult run_experiment(const ExperimentGrid& grid, int threads = 1,
                                const ProgressFn& progress = {});

std::vector<MethodSummary> summarize(const ExperimentGrid& grid,
                                     const std::vector<ReplicateRecord>& records);

// One row per method.
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
// One row per (replicate, method).
void write_replicates_csv(std::ostream& out, const ExperimentResult& result);
// Aligned text table with "mean(sd)" cells.
void write_table(std::ostream& out, const ExperimentResult& result);

ExperimentGrid parse_grid_json(const std::string& text);
ExperimentGrid load_grid(const std::string& path);

}  // namespace pwgee
