#include "pwgee/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pwgee {

namespace {

constexpr double kLogArgumentFloor = 1e-8;
constexpr double kLargeClusterProb = 1.0 / 16.0;

double large_indicator_centered(Index m) { return (m > 4 ? 1.0 : 0.0) - kLargeClusterProb; }

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.example < 1 || spec.example > 4) throw Error("example must be 1, 2, 3 or 4");
  if (spec.n < 1) throw Error("scenario needs at least one cluster");
  if (spec.p < 4) throw Error("scenario needs p >= 4 (true support has four coordinates)");
  if (!(spec.rho_gen > 0.0 && spec.rho_gen < 1.0) && spec.rho_gen != 0.0) {
    throw Error("generating correlation must lie in [0, 1)");
  }
}

bool is_poisson(const ScenarioSpec& spec) { return spec.example == 2 || spec.example == 4; }

Vector beta_star(const ScenarioSpec& spec) {
  Vector b = Vector::Zero(spec.p);
  if (is_poisson(spec)) {
    b.head(4) << 1.0, -0.8, 0.9, -1.0;
  } else {
    b.head(4) << 2.0, -1.0, 1.0, -1.5;
  }
  return b;
}

IndexSet true_support(const ScenarioSpec&) { return {0, 1, 2, 3}; }

Index gen_cluster_size(CounterRng& rng) {
  const double u = rng.uniform();
  if (u < 9.0 / 16.0) return 2;
  if (u < 15.0 / 16.0) return 4;
  return 15;
}

Matrix gen_covariates(CounterRng& rng, Index m, Index p, double corr) {
  const double shared = std::sqrt(corr);
  const double own = std::sqrt(1.0 - corr);
  Matrix x(m, p);
  for (Index k = 0; k < m; ++k) {
    const double z0 = rng.normal();
    for (Index j = 0; j < p; ++j) x(k, j) = shared * z0 + own * rng.normal();
  }
  return x;
}

Vector gen_exchangeable_normals(CounterRng& rng, Index m, double rho) {
  const double z0 = rng.normal();
  const double shared = std::sqrt(rho);
  const double own = std::sqrt(1.0 - rho);
  Vector e(m);
  for (Index k = 0; k < m; ++k) e(k) = shared * z0 + own * rng.normal();
  return e;
}

double linear_ics_multiplier(Index m) { return 1.0 - 1.5 * large_indicator_centered(m); }

double poisson_ics_factor(Index m, double xb) {
  return 1.0 + 1.5 * std::abs(xb) * large_indicator_centered(m);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Index poisson_quantile(double u, double mean) {
  if (!(mean > 0.0)) return 0;
  u = std::clamp(u, 0.0, 1.0);
  // Start at the mode and walk; pmf ratios avoid underflow of exp(-mean).
  const auto mode = static_cast<Index>(std::floor(mean));
  auto md = static_cast<double>(mode);
  const double pmf_mode = std::exp(md * std::log(mean) - mean - std::lgamma(md + 1.0));

  double cdf = pmf_mode;
  double term = pmf_mode;
  for (Index k = mode; k > 0; --k) {
    term *= static_cast<double>(k) / mean;
    cdf += term;
    if (term < 1e-300 || term < 1e-18 * cdf) break;
  }

  Index y = mode;
  if (u <= cdf) {
    double pmf = pmf_mode;
    while (y > 0 && cdf - pmf >= u) {
      cdf -= pmf;
      pmf *= static_cast<double>(y) / mean;
      --y;
    }
    return y;
  }
  double pmf = pmf_mode;
  const double cap = mean + 60.0 * std::sqrt(mean) + 100.0;
  while (cdf < u && static_cast<double>(y) < cap) {
    pmf *= mean / static_cast<double>(y + 1);
    ++y;
    cdf += pmf;
    if (pmf == 0.0) break;
  }
  return y;
}

LongitudinalDataset generate(const ScenarioSpec& spec, SimulationDiagnostics* diagnostics) {
  validate(spec);
  const Vector beta = beta_star(spec);
  const bool informative = spec.example == 1 || spec.example == 2;
  std::vector<ClusterData> clusters;
  clusters.reserve(static_cast<std::size_t>(spec.n));
  int clamps = 0;

  for (Index i = 0; i < spec.n; ++i) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(i));
    const Index m = gen_cluster_size(rng);
    ClusterData c{std::to_string(i + 1), Vector(m), gen_covariates(rng, m, spec.p, 0.5)};
    const Vector xb = c.x.leftCols(4) * beta.head(4);
    const Vector z = gen_exchangeable_normals(rng, m, spec.rho_gen);
    if (!is_poisson(spec)) {
      const double mult = informative ? linear_ics_multiplier(m) : 1.0;
      c.y = mult * xb + z;
    } else {
      for (Index k = 0; k < m; ++k) {
        double factor = 1.0;
        if (informative) {
          factor = poisson_ics_factor(m, xb(k));
          if (factor < kLogArgumentFloor) {
            factor = kLogArgumentFloor;
            ++clamps;
          }
        }
        const double mu = std::exp(xb(k)) * factor;
        c.y(k) = static_cast<double>(poisson_quantile(normal_cdf(z(k)), mu));
      }
    }
    clusters.push_back(std::move(c));
  }
  if (diagnostics) diagnostics->log_argument_clamps = clamps;
  return LongitudinalDataset(std::move(clusters));
}

}  // namespace pwgee
