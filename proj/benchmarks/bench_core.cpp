#include "pwgee/simgen.hpp"
#include "pwgee/solver.hpp"
#include "pwgee/tuning.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace pwgee;

namespace {

LongitudinalDataset example_data(int example, Index p) { return generate({example, 200, p, 0.5, 1}); }

ModelSpec model_for(int example, CorrelationKind kind, double lambda) {
  ModelSpec m;
  m.family = {example == 2 || example == 4 ? FamilyKind::poisson_log : FamilyKind::gaussian_identity};
  m.correlation = {kind, kind == CorrelationKind::independence ? std::nullopt : std::optional<double>(0.3)};
  m.penalty = {PenaltyKind::scad, lambda};
  m.seed = 7;
  return m;
}

void BM_Score(benchmark::State& state) {
  const auto d = example_data(1, state.range(0));
  const auto ctx = make_context(d, model_for(1, static_cast<CorrelationKind>(state.range(1)), 0.0),
                                state.range(1) == 0 ? 0.0 : 0.3);
  const Vector beta = beta_star({1, 200, state.range(0), 0.5, 0});
  for (auto _ : state) benchmark::DoNotOptimize(ctx.score(beta));
}
BENCHMARK(BM_Score)->Args({100, 0})->Args({100, 1})->Args({500, 0})->Args({500, 1});

void BM_Fisher(benchmark::State& state) {
  const auto d = example_data(1, 500);
  const auto ctx = make_context(d, model_for(1, static_cast<CorrelationKind>(state.range(1)), 0.0), 0.3);
  const Vector beta = beta_star({1, 200, 500, 0.5, 0});
  std::vector<Index> active(static_cast<std::size_t>(state.range(0)));
  std::iota(active.begin(), active.end(), Index{0});
  const auto ev = ctx.evaluate(beta);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.fisher(ev, active));
}
BENCHMARK(BM_Fisher)->Args({10, 0})->Args({10, 1})->Args({100, 0})->Args({100, 1});

void BM_Fit(benchmark::State& state) {
  const int example = static_cast<int>(state.range(0));
  const auto d = example_data(example, state.range(1));
  const auto model = model_for(example, CorrelationKind::independence, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pwgee(d, model).beta);
}
BENCHMARK(BM_Fit)->Args({1, 100})->Args({1, 500})->Args({2, 100})->Unit(benchmark::kMillisecond);

void BM_CrossValidation(benchmark::State& state) {
  const auto d = example_data(1, 100);
  const auto model = model_for(1, CorrelationKind::independence, 0.0);
  const auto grid = default_lambda_grid(d, model, {}, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cv_select(d, model, grid, {}, {3, 1}).lambda_star);
}
BENCHMARK(BM_CrossValidation)->Arg(10)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
