#pragma once

#include "pwgee/common.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/random.hpp"

#include <cstdint>

namespace pwgee {

// Simulation designs:
//   1  gaussian, informative cluster size
//   2  poisson,  informative cluster size
//   3  gaussian, no cluster-size effect
//   4  poisson,  no cluster-size effect
struct ScenarioSpec {
  int example = 1;
  Index n = 200;
  Index p = 500;
  double rho_gen = 0.5;
  std::uint64_t seed = 0;
};

void validate(const ScenarioSpec& spec);

// (2, -1, 1, -1.5, 0, ...) for examples 1/3, (1, -0.8, 0.9, -1, 0, ...) for 2/4.
Vector beta_star(const ScenarioSpec& spec);
IndexSet true_support(const ScenarioSpec& spec);
bool is_poisson(const ScenarioSpec& spec);

// P(2) = 9/16, P(4) = 3/8, P(15) = 1/16.
Index gen_cluster_size(CounterRng& rng);

// m independent rows, each N(0, (1 - corr) I + corr J).
Matrix gen_covariates(CounterRng& rng, Index m, Index p, double corr = 0.5);

// m jointly normal values, unit variance, exchangeable correlation rho.
Vector gen_exchangeable_normals(CounterRng& rng, Index m, double rho);

// Multiplier on x'beta in the gaussian informative design:
// 1 - 1.5 (1(m > 4) - 1/16).
double linear_ics_multiplier(Index m);

// exp(U) in the poisson informative design, before clamping:
// 1 + 1.5 |x'beta| (1(m > 4) - 1/16).
double poisson_ics_factor(Index m, double xb);

// Smallest y with P(Y <= y) >= u for Y ~ Poisson(mean).
Index poisson_quantile(double u, double mean);

double normal_cdf(double z);

struct SimulationDiagnostics {
  // Example 2 log-argument clamps at 1e-8.
  int log_argument_clamps = 0;
};

// Pure function of the spec (including its seed). Cluster i draws from the
// Philox stream (seed, i).
LongitudinalDataset generate(const ScenarioSpec& spec, SimulationDiagnostics* diagnostics = nullptr);

}  // namespace pwgee
