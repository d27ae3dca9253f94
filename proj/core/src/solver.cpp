#include "pwgee/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pwgee {

namespace {

constexpr int kMaxHalvings = 30;

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

bool all_finite(const Vector& v) { return v.allFinite(); }

struct Problem {
  const LongitudinalDataset& data;
  const ModelSpec& model;
  const FitConfig& config;
  std::vector<bool> exempt;
  bool free_rho;
  double rho;
};

// Solves (H + D) step = rhs, adding a small ridge once if the system is
// singular or not positive definite.
Vector solve_system(Matrix a, const Vector& rhs, double h_trace, FitDiagnostics& diag) {
  {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) {
      Vector x = llt.solve(rhs);
      if (all_finite(x)) return x;
    }
  }
  const auto s = static_cast<double>(a.rows());
  double jitter = 1e-8 * h_trace / s;
  if (!(jitter > 0.0) || !std::isfinite(jitter)) jitter = 1e-8;
  a.diagonal().array() += jitter;
  ++diag.ridge_jitters;
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector x = ldlt.solve(rhs);
    if (all_finite(x)) return x;
  }
  throw Error("singular H_n + D_n system on active set of size " + std::to_string(a.rows()));
}

IndexSet screen(const Problem& pb, const EquationContext::Evaluation& ev, const Vector& beta,
                double threshold) {
  const Index p = beta.size();
  IndexSet s;
  const bool screening = pb.model.penalty.lambda > 0.0;
  const Vector& stat =
      pb.config.screen == ScreenRule::abs_mean_score ? ev.score : ev.mean_abs_score;
  for (Index j = 0; j < p; ++j) {
    if (!screening || pb.exempt[static_cast<std::size_t>(j)] || std::abs(stat(j)) > threshold ||
        std::abs(beta(j)) > pb.config.zero_threshold) {
      s.push_back(j);
    }
  }
  return s;
}

// One quasi-Newton step on `active` from beta. Returns the new beta (zero
// off `active`).
Vector newton_step(const Problem& pb, const EquationContext& ctx, const Vector& beta,
                   const EquationContext::Evaluation& ev, const IndexSet& active,
                   FitDiagnostics& diag) {
  Vector next = Vector::Zero(beta.size());
  if (active.empty()) return next;
  const auto s = static_cast<Index>(active.size());
  Matrix h = ctx.fisher(ev, active);
  const double h_trace = h.trace();
  Vector d = penalty_ridge(beta, active, pb.model.penalty, pb.config.ridge_c);
  Vector rhs(s);
  for (Index k = 0; k < s; ++k) {
    const Index j = active[static_cast<std::size_t>(k)];
    if (pb.exempt[static_cast<std::size_t>(j)]) {
      d(k) = 0.0;
      rhs(k) = ev.score(j);
    } else {
      rhs(k) = ev.score(j) - rate(pb.model.penalty, std::abs(beta(j))) * sgn(beta(j));
    }
  }
  h.diagonal() += d;
  const Vector step = solve_system(std::move(h), rhs, h_trace, diag);
  for (Index k = 0; k < s; ++k) {
    const Index j = active[static_cast<std::size_t>(k)];
    next(j) = beta(j) + step(k);
  }
  return next;
}

// Under the quadratic approximation a penalized coordinate near zero grows by
// a factor of about |Q_j| / (lambda rho_bar(0+)) - 1 per step, which stalls
// when the score barely exceeds the threshold. The coordinate with the
// largest excess is moved straight to its one-dimensional soft-threshold
// value instead. Returns -1 when no coordinate qualifies.
Index entering_coordinate(const Problem& pb, const EquationContext::Evaluation& ev, const Vector& beta,
                          const IndexSet& active, double threshold) {
  Index best = -1;
  double excess = 0.0;
  for (Index j : active) {
    if (pb.exempt[static_cast<std::size_t>(j)]) continue;
    if (std::abs(beta(j)) > pb.config.zero_threshold) continue;
    const double e = std::abs(ev.score(j)) - threshold;
    if (e > excess) {
      excess = e;
      best = j;
    }
  }
  return best;
}

double entry_step(const EquationContext& ctx, const EquationContext::Evaluation& ev, Index j,
                  double threshold) {
  const Index one[] = {j};
  const double h = ctx.fisher(ev, one)(0, 0);
  if (!(h > 0.0) || !std::isfinite(h)) return 0.0;
  return sgn(ev.score(j)) * (std::abs(ev.score(j)) - threshold) / h;
}

// Evaluates Q_n at beta; on non-finite values retreats along the last step
// by halving. `beta` is updated in place.
EquationContext::Evaluation evaluate_with_halving(const Problem& pb, const EquationContext& ctx,
                                                  const Vector& prev, Vector& beta,
                                                  bool can_halve, FitDiagnostics& diag) {
  const bool want_abs = pb.config.screen == ScreenRule::mean_abs_cluster_score;
  auto ev = ctx.evaluate(beta, want_abs);
  int halvings = 0;
  while (!all_finite(ev.score)) {
    if (!can_halve || halvings >= kMaxHalvings) {
      throw Error("non-finite estimating equations after " + std::to_string(halvings) +
                  " step halvings");
    }
    beta = prev + 0.5 * (beta - prev);
    ++halvings;
    ++diag.step_halvings;
    ev = ctx.evaluate(beta, want_abs);
  }
  return ev;
}

Index count_nonzero(const Vector& v) { return (v.array() != 0.0).count(); }

}  // namespace

EquationContext make_context(const LongitudinalDataset& data, const ModelSpec& model, double rho) {
  RademacherStream stream(model.seed);
  return EquationContext(data, model.family,
                         build_cluster_inverses(data, model.correlation.kind, rho,
                                                model.weighting, stream));
}

void validate(const FitConfig& config, Index p) {
  if (config.max_iter < 1) throw Error("max_iter must be at least 1");
  if (!(config.convergence_tol > 0.0)) throw Error("convergence tolerance must be positive");
  if (!(config.zero_threshold > 0.0)) throw Error("zero threshold must be positive");
  if (!(config.ridge_c > 0.0)) throw Error("ridge constant c must be positive");
  for (Index j : config.penalty_exempt) {
    if (j < 0 || j >= p) throw Error("penalty-exempt index out of range");
  }
  if (config.init && config.init->size() != p) throw Error("initial value has wrong dimension");
}

double stationarity_violation(const Vector& score, const Vector& beta, const PenaltySpec& penalty,
                              std::span<const Index> exempt) {
  std::vector<bool> is_exempt(static_cast<std::size_t>(beta.size()), false);
  for (Index j : exempt) is_exempt[static_cast<std::size_t>(j)] = true;
  const double bound = penalty.lambda > 0.0 ? penalty.lambda * rate_at_zero_plus(penalty) : 0.0;
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    double v;
    if (is_exempt[static_cast<std::size_t>(j)]) {
      v = std::abs(score(j));
    } else if (beta(j) != 0.0) {
      v = std::abs(score(j) - rate(penalty, std::abs(beta(j))) * sgn(beta(j)));
    } else {
      v = std::max(std::abs(score(j)) - bound, 0.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

FitResult fit_pwgee(const LongitudinalDataset& data, const ModelSpec& model,
                    const FitConfig& config) {
  const Index p = data.p();
  validate(model.penalty);
  validate(config, p);

  Problem pb{data, model, config, std::vector<bool>(static_cast<std::size_t>(p), false),
             false, 0.0};
  for (Index j : config.penalty_exempt) pb.exempt[static_cast<std::size_t>(j)] = true;

  const CorrelationKind kind = model.correlation.kind;
  if (kind != CorrelationKind::independence) {
    if (model.correlation.rho) {
      pb.rho = *model.correlation.rho;
      check_rho(kind, pb.rho, data.max_cluster_size());
    } else {
      pb.free_rho = true;
    }
  }
  const double threshold =
      model.penalty.lambda > 0.0 ? model.penalty.lambda * rate_at_zero_plus(model.penalty) : 0.0;

  FitResult result;
  Vector beta = config.init ? *config.init : Vector::Zero(p);
  Vector prev = beta;
  IndexSet active(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = j;

  // With a fixed working correlation the context never changes; with a
  // free rho it is rebuilt from the current residuals every iteration.
  std::optional<EquationContext> ctx_store;
  auto context_at = [&](const Vector& b) -> const EquationContext& {
    if (pb.free_rho) {
      pb.rho = estimate_rho(data, b, model.family, kind, count_nonzero(b));
      ctx_store.emplace(make_context(data, model, pb.rho));
    } else if (!ctx_store) {
      ctx_store.emplace(make_context(data, model, pb.rho));
    }
    return *ctx_store;
  };

  const bool screening = model.penalty.lambda > 0.0;
  int k = 0;
  bool entered = false;
  for (;;) {
    const EquationContext& ctx = context_at(beta);
    auto ev = evaluate_with_halving(pb, ctx, prev, beta, k > 0, result.diagnostics);
    result.diagnostics.variance_floor_hits += ev.variance_floor_hits;
    if (k > 0) active = screen(pb, ev, beta, threshold);
    if (k > 0 && !entered && (beta - prev).lpNorm<1>() <= config.convergence_tol) {
      result.converged = true;
      break;
    }
    if (k >= config.max_iter) break;
    prev = beta;
    const Index j = screening ? entering_coordinate(pb, ev, beta, active, threshold) : -1;
    entered = j >= 0;
    if (entered) {
      beta(j) += entry_step(ctx, ev, j, threshold);
      ++result.diagnostics.entry_steps;
    } else {
      beta = newton_step(pb, ctx, beta, ev, active, result.diagnostics);
    }
    ++k;
  }
  result.iterations = k;

  // With lambda == 0 nothing is penalized, so nothing is thresholded.
  auto hard_threshold = [&](Vector& b) {
    bool changed = false;
    if (!(model.penalty.lambda > 0.0)) return changed;
    for (Index j = 0; j < p; ++j) {
      if (!pb.exempt[static_cast<std::size_t>(j)] && b(j) != 0.0 &&
          std::abs(b(j)) < config.zero_threshold) {
        b(j) = 0.0;
        changed = true;
      }
    }
    return changed;
  };

  // Coordinates screened out in the last pass still carry their value.
  for (Index j = 0; j < p; ++j) {
    if (!std::binary_search(active.begin(), active.end(), j)) beta(j) = 0.0;
  }
  if (hard_threshold(beta) && config.polish) {
    IndexSet support;
    for (Index j = 0; j < p; ++j) {
      if (beta(j) != 0.0 || pb.exempt[static_cast<std::size_t>(j)]) support.push_back(j);
    }
    bool polished = false;
    for (int it = 0; it < config.max_iter && !support.empty(); ++it) {
      const EquationContext& ctx = context_at(beta);
      prev = beta;
      const auto ev = ctx.evaluate(beta);
      if (!all_finite(ev.score)) break;
      beta = newton_step(pb, ctx, beta, ev, support, result.diagnostics);
      ++result.diagnostics.polish_iterations;
      if (!all_finite(beta)) {
        beta = prev;
        break;
      }
      if ((beta - prev).lpNorm<1>() <= config.convergence_tol) {
        polished = true;
        break;
      }
    }
    hard_threshold(beta);
    result.converged = result.converged && polished;
  }

  const EquationContext& final_ctx = context_at(beta);
  const Vector q = final_ctx.score(beta);
  result.final_score_norm = stationarity_violation(q, beta, model.penalty, config.penalty_exempt);
  if (kind != CorrelationKind::independence) result.rho_hat = pb.rho;
  for (Index j = 0; j < p; ++j) {
    if (beta(j) != 0.0 || pb.exempt[static_cast<std::size_t>(j)]) result.active_set.push_back(j);
  }
  result.beta = std::move(beta);
  return result;
}

FitResult fit_wgee_oracle(const LongitudinalDataset& data, std::span<const Index> support,
                          const ModelSpec& model, const FitConfig& config) {
  if (support.empty()) throw Error("oracle fit needs a nonempty support");
  IndexSet cols(support.begin(), support.end());
  std::sort(cols.begin(), cols.end());
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
    throw Error("oracle support has duplicate indices");
  }
  const LongitudinalDataset restricted = data.select_columns(cols);

  ModelSpec unpenalized = model;
  unpenalized.penalty.lambda = 0.0;
  FitConfig cfg = config;
  cfg.penalty_exempt.clear();
  if (config.init) {
    Vector init(static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) init(static_cast<Index>(k)) = (*config.init)(cols[k]);
    cfg.init = init;
  }
  FitResult r = fit_pwgee(restricted, unpenalized, cfg);

  FitResult full = r;
  full.beta = Vector::Zero(data.p());
  full.active_set.clear();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    full.beta(cols[k]) = r.beta(static_cast<Index>(k));
    full.active_set.push_back(cols[k]);
  }
  return full;
}

std::string to_string(ScreenRule rule) {
  return rule == ScreenRule::abs_mean_score ? "abs_mean_score" : "mean_abs_cluster_score";
}

ScreenRule parse_screen_rule(std::string_view name) {
  if (name == "abs_mean_score" || name == "score") return ScreenRule::abs_mean_score;
  if (name == "mean_abs_cluster_score" || name == "cluster") return ScreenRule::mean_abs_cluster_score;
  throw Error("unknown screen rule '" + std::string(name) + "'");
}

}  // namespace pwgee
