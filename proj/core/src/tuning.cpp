#include "pwgee/tuning.hpp"

#include "pwgee/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

namespace pwgee {

Folds make_folds(Index n, std::uint64_t seed) {
  if (n < kCvFolds) throw Error("cross-validation needs at least 4 clusters, got " + std::to_string(n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Fisher-Yates with the library's own generator so folds match across platforms.
  CounterRng rng(seed, 0x666f6c6473ULL);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  Folds folds;
  for (std::size_t k = 0; k < order.size(); ++k) folds[k % kCvFolds].push_back(order[k]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<double> held_out_cluster_losses(const LongitudinalDataset& data, FamilySpec family,
                                            const Vector& beta, CvLossWeighting pooling) {
  if (beta.size() != data.p()) throw Error("held_out_loss: beta has wrong dimension");
  if (pooling == CvLossWeighting::follow_fit) throw Error("held_out_loss: pooling must be resolved");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(data.n()));
  for (const auto& c : data.clusters()) {
    const Vector eta = c.x * beta;
    double part = 0.0;
    for (Index j = 0; j < c.size(); ++j) {
      const double mu = mean(family, eta(j));
      if (family.kind == FamilyKind::gaussian_identity) {
        part += (c.y(j) - mu) * (c.y(j) - mu);
      } else {
        part += -2.0 * log_likelihood(family, c.y(j), mu);
      }
    }
    if (pooling == CvLossWeighting::cluster) part /= static_cast<double>(c.size());
    out.push_back(std::isnan(part) ? std::numeric_limits<double>::infinity() : part);
  }
  return out;
}

double held_out_loss(const LongitudinalDataset& data, FamilySpec family, const Vector& beta,
                     CvLossWeighting pooling) {
  const auto parts = held_out_cluster_losses(data, family, beta, pooling);
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

double lambda_max(const LongitudinalDataset& data, const ModelSpec& model, const FitConfig& config) {
  validate(config, data.p());
  double rho = 0.0;
  if (model.correlation.kind != CorrelationKind::independence) {
    rho = model.correlation.rho ? *model.correlation.rho
                                : estimate_rho(data, Vector::Zero(data.p()), model.family,
                                               model.correlation.kind, 0);
  }
  const EquationContext ctx = make_context(data, model, rho);
  const Vector q = ctx.score(Vector::Zero(data.p()));
  std::vector<bool> exempt(static_cast<std::size_t>(data.p()), false);
  for (Index j : config.penalty_exempt) exempt[static_cast<std::size_t>(j)] = true;
  double best = 0.0;
  for (Index j = 0; j < data.p(); ++j) {
    if (!exempt[static_cast<std::size_t>(j)]) best = std::max(best, std::abs(q(j)));
  }
  PenaltySpec unit = model.penalty;
  unit.lambda = 1.0;
  return best / rate_at_zero_plus(unit);
}

std::vector<double> default_lambda_grid(const LongitudinalDataset& data, const ModelSpec& model,
                                        const FitConfig& config, int count, double ratio) {
  if (count < 1) throw Error("lambda grid needs at least one point");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("lambda grid ratio must lie in (0, 1)");
  const double top = lambda_max(data, model, config);
  if (!(top > 0.0) || !std::isfinite(top)) throw Error("lambda_max is not positive; score at zero vanishes");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int l = 0; l < count; ++l) grid[static_cast<std::size_t>(l)] = top * std::exp(step * l);
  return grid;
}

void parallel_for(Index jobs, int threads, const std::function<void(Index)>& fn) {
  if (jobs <= 0) return;
  const int workers = static_cast<int>(std::min<Index>(std::max(threads, 1), jobs));
  if (workers == 1) {
    for (Index i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CvResult cv_select(const LongitudinalDataset& data, const ModelSpec& model,
                   const std::vector<double>& grid, const FitConfig& config,
                   const CvOptions& options) {
  if (grid.empty()) throw Error("lambda grid is empty");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error("lambda grid values must be positive and finite");
  }
  validate(config, data.p());
  const Folds folds = make_folds(data.n(), options.seed);

  std::array<LongitudinalDataset, kCvFolds> train, test;
  for (int f = 0; f < kCvFolds; ++f) {
    IndexSet rest;
    for (int g = 0; g < kCvFolds; ++g) {
      if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(rest.begin(), rest.end());
    train[f] = data.subset(rest);
    test[f] = data.subset(folds[f]);
  }

  CvLossWeighting pooling = options.loss;
  if (pooling == CvLossWeighting::follow_fit) {
    pooling = model.weighting == Weighting::on ? CvLossWeighting::cluster : CvLossWeighting::observation;
  }

  CvResult out;
  out.lambda_grid = grid;
  const auto n_grid = static_cast<Index>(grid.size());
  out.curve.resize(static_cast<std::size_t>(n_grid * kCvFolds));
  // Held-out loss of every cluster at every grid point, clusters in data order.
  std::vector<std::vector<double>> cluster_loss(static_cast<std::size_t>(n_grid),
                                                std::vector<double>(static_cast<std::size_t>(data.n())));
  parallel_for(n_grid * kCvFolds, options.threads, [&](Index job) {
    const Index l = job / kCvFolds;
    const int f = static_cast<int>(job % kCvFolds);
    CvPoint& pt = out.curve[static_cast<std::size_t>(job)];
    pt.lambda_index = l;
    pt.lambda = grid[static_cast<std::size_t>(l)];
    pt.fold = f;
    ModelSpec m = model;
    m.penalty.lambda = pt.lambda;
    m.seed = derive_seed(options.seed, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(l));
    try {
      const FitResult r = fit_pwgee(train[f], m, config);
      if (!r.beta.allFinite()) throw Error("non-finite coefficients");
      pt.converged = r.converged;
      pt.violation = r.final_score_norm;
      pt.stationary = r.final_score_norm <= kStationarityTol;
      const auto parts = held_out_cluster_losses(test[f], model.family, r.beta, pooling);
      pt.loss = std::accumulate(parts.begin(), parts.end(), 0.0);
      pt.failed = !std::isfinite(pt.loss);
      auto& row = cluster_loss[static_cast<std::size_t>(l)];
      for (std::size_t k = 0; k < parts.size(); ++k) row[static_cast<std::size_t>(folds[f][k])] = parts[k];
    } catch (const Error&) {
      pt.failed = true;
      pt.loss = std::numeric_limits<double>::infinity();
      auto& row = cluster_loss[static_cast<std::size_t>(l)];
      for (Index i : folds[f]) row[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    }
  });

  out.total_loss.assign(static_cast<std::size_t>(n_grid), 0.0);
  out.all_stationary.assign(static_cast<std::size_t>(n_grid), true);
  for (const auto& pt : out.curve) {
    out.total_loss[static_cast<std::size_t>(pt.lambda_index)] += pt.loss;
    if (pt.failed) ++out.failed_fits;
    if (pt.failed || !pt.stationary) out.all_stationary[static_cast<std::size_t>(pt.lambda_index)] = false;
  }
  const bool any_stationary =
      std::find(out.all_stationary.begin(), out.all_stationary.end(), true) != out.all_stationary.end();
  const bool stationary_only = options.rule == CvRule::min_stationary && any_stationary;
  std::optional<Index> best_opt;
  for (Index l = 0; l < n_grid; ++l) {
    if (stationary_only && !out.all_stationary[static_cast<std::size_t>(l)]) continue;
    if (!best_opt) {
      best_opt = l;
      continue;
    }
    const double a = out.total_loss[static_cast<std::size_t>(l)];
    const double b = out.total_loss[static_cast<std::size_t>(*best_opt)];
    if (a < b || (a == b && grid[static_cast<std::size_t>(l)] > grid[static_cast<std::size_t>(*best_opt)])) {
      best_opt = l;
    }
  }
  const Index best = *best_opt;
  out.min_index = best;

  std::array<double, kCvFolds> fold_loss{};
  for (const auto& pt : out.curve) {
    if (pt.lambda_index == best) fold_loss[static_cast<std::size_t>(pt.fold)] = pt.loss;
  }
  double fold_mean = 0.0;
  for (double v : fold_loss) fold_mean += v / kCvFolds;
  double ss = 0.0;
  for (double v : fold_loss) ss += (v - fold_mean) * (v - fold_mean);
  out.standard_error = std::sqrt(ss / (kCvFolds - 1)) * std::sqrt(static_cast<double>(kCvFolds));

  // Paired comparison with the minimizer: sum and standard error of the
  // per-cluster loss differences.
  out.paired_standard_error.assign(static_cast<std::size_t>(n_grid), 0.0);
  const auto nd = static_cast<double>(data.n());
  const auto& base = cluster_loss[static_cast<std::size_t>(best)];
  for (Index l = 0; l < n_grid; ++l) {
    const auto& row = cluster_loss[static_cast<std::size_t>(l)];
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double d = row[i] - base[i];
      sum += d;
      sum2 += d * d;
    }
    const double var = nd > 1 ? std::max(sum2 - sum * sum / nd, 0.0) / (nd - 1) : 0.0;
    out.paired_standard_error[static_cast<std::size_t>(l)] =
        std::isfinite(var) ? std::sqrt(var * nd) : std::numeric_limits<double>::infinity();
  }

  Index chosen = best;
  auto consider = [&](Index l, double bound) {
    if (out.total_loss[static_cast<std::size_t>(l)] <= bound &&
        grid[static_cast<std::size_t>(l)] > grid[static_cast<std::size_t>(chosen)]) {
      chosen = l;
    }
  };
  if (options.rule == CvRule::one_se && std::isfinite(out.standard_error)) {
    for (Index l = 0; l < n_grid; ++l) consider(l, out.total_loss[static_cast<std::size_t>(best)] + out.standard_error);
  } else if (options.rule == CvRule::one_se_paired) {
    for (Index l = 0; l < n_grid; ++l) {
      const double se = out.paired_standard_error[static_cast<std::size_t>(l)];
      if (std::isfinite(se)) consider(l, out.total_loss[static_cast<std::size_t>(best)] + se);
    }
  }
  out.lambda_index = chosen;
  out.lambda_star = grid[static_cast<std::size_t>(chosen)];
  return out;
}

std::string to_string(CvLossWeighting w) {
  switch (w) {
    case CvLossWeighting::observation: return "observation";
    case CvLossWeighting::cluster: return "cluster";
    case CvLossWeighting::follow_fit: return "auto";
  }
  return "auto";
}

std::string to_string(CvRule rule) {
  switch (rule) {
    case CvRule::min: return "min";
    case CvRule::min_stationary: return "min_stationary";
    case CvRule::one_se: return "one_se";
    case CvRule::one_se_paired: return "one_se_paired";
  }
  return "min_stationary";
}

CvRule parse_cv_rule(std::string_view name) {
  if (name == "min") return CvRule::min;
  if (name == "min_stationary") return CvRule::min_stationary;
  if (name == "one_se" || name == "1se") return CvRule::one_se;
  if (name == "one_se_paired") return CvRule::one_se_paired;
  throw Error("unknown cv rule '" + std::string(name) + "' (expected one_se_paired|min_stationary|min|one_se)");
}

CvLossWeighting parse_cv_loss(std::string_view name) {
  if (name == "observation") return CvLossWeighting::observation;
  if (name == "cluster") return CvLossWeighting::cluster;
  if (name == "auto") return CvLossWeighting::follow_fit;
  throw Error("unknown cv loss pooling '" + std::string(name) + "' (expected observation|cluster|auto)");
}

}  // namespace pwgee
