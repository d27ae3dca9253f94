#pragma once

#include "pwgee/common.hpp"
#include "pwgee/correlation.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/equations.hpp"
#include "pwgee/family.hpp"
#include "pwgee/penalty.hpp"
#include "pwgee/weighting.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace pwgee {

// Statistic compared against lambda * rho_bar(0+) when re-screening the
// active set after every update.
enum class ScreenRule {
  // |Q_n(beta)_j|: the coordinate violates the zero-subgradient condition.
  abs_mean_score,
  // n^{-1} sum_i |eta~_ij(beta)|: per-cluster absolute scores averaged.
  mean_abs_cluster_score,
};

struct ModelSpec {
  FamilySpec family;
  WorkingCorrelationSpec correlation;
  PenaltySpec penalty;
  Weighting weighting = Weighting::on;
  std::uint64_t seed = 0;
};

struct FitConfig {
  int max_iter = 100;
  // Stop when sum_j |beta_j^(k) - beta_j^(k-1)| falls to this value.
  double convergence_tol = 1e-15;
  // Penalized coefficients below this magnitude are reported as zero.
  double zero_threshold = 1e-3;
  // c in the ridge term rate(|b|) / (c + |b|).
  double ridge_c = 1e-6;
  // Coordinates never penalized or screened out (e.g. an intercept column).
  IndexSet penalty_exempt;
  // Starting value; zeros when empty.
  std::optional<Vector> init;
  ScreenRule screen = ScreenRule::abs_mean_score;
  // Extra Newton steps on the surviving support after the final hard
  // threshold, so the returned beta satisfies the stationarity conditions.
  bool polish = true;
};

struct FitDiagnostics {
  int variance_floor_hits = 0;
  int step_halvings = 0;
  int ridge_jitters = 0;
  int polish_iterations = 0;
  int entry_steps = 0;
};

struct FitResult {
  Vector beta;
  IndexSet active_set;
  int iterations = 0;
  bool converged = false;
  // max_j |Q_n(beta)_j - v_j| with v the best admissible penalty subgradient.
  double final_score_norm = 0.0;
  std::optional<double> rho_hat;
  FitDiagnostics diagnostics;
};

void validate(const FitConfig& config, Index p);

// Quasi-Newton-Raphson fit of the penalized (weighted) estimating equations.
FitResult fit_pwgee(const LongitudinalDataset& data, const ModelSpec& model,
                    const FitConfig& config = {});

// Unpenalized fit on the columns in `support`; the returned beta has full
// length p with zeros elsewhere.
FitResult fit_wgee_oracle(const LongitudinalDataset& data, std::span<const Index> support,
                          const ModelSpec& model, const FitConfig& config = {});

// Largest violation of the approximate-solution conditions at beta:
//   beta_j != 0: |Q_j - rate(|beta_j|) sgn(beta_j)|
//   beta_j == 0 (penalized): (|Q_j| - lambda rho_bar(0+))_+
// Exempt coordinates must satisfy Q_j = 0.
double stationarity_violation(const Vector& score, const Vector& beta, const PenaltySpec& penalty,
                              std::span<const Index> exempt = {});

// Equation context for a model at a fixed rho; what fit_pwgee builds per iteration.
EquationContext make_context(const LongitudinalDataset& data, const ModelSpec& model, double rho);

std::string to_string(ScreenRule rule);
ScreenRule parse_screen_rule(std::string_view name);

}  // namespace pwgee
