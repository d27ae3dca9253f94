#include "pwgee/bench.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace pwgee;

namespace {

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.scenario = {1, 40, 8, 0.5, 0};
  g.reps = 3;
  g.master_seed = 17;
  MethodSpec w;
  w.lambda = 0.2;
  MethodSpec u = w;
  u.weighting = Weighting::off;
  MethodSpec oracle;
  oracle.oracle = true;
  g.methods = {w, u, oracle};
  g.grid_size = 5;
  return g;
}

}  // namespace

TEST_CASE("labels and validation") {
  auto g = small_grid();
  finalize(g);
  CHECK(g.methods[0].label == "PWGEE.indep");
  CHECK(g.methods[1].label == "PGEE.indep");
  CHECK(g.methods[2].label == "Oracle.WGEE.indep");
  MethodSpec ar;
  ar.correlation.kind = CorrelationKind::ar1;
  ar.weighting = Weighting::off;
  ar.oracle = true;
  CHECK(default_label(ar) == "Oracle.GEE.ar1");

  auto dup = small_grid();
  dup.methods.push_back(dup.methods[0]);
  CHECK_THROWS_AS(finalize(dup), Error);
  auto none = small_grid();
  none.reps = 0;
  CHECK_THROWS_AS(finalize(none), Error);
}

TEST_CASE("replicate seeds differ across replicates and roles") {
  std::set<std::uint64_t> seen;
  for (int r = 0; r < 20; ++r) {
    const auto s = replicate_seeds(5, r);
    seen.insert({s.data, s.weights, s.cv});
  }
  CHECK(seen.size() == 60);
  CHECK(replicate_seeds(5, 3).data == replicate_seeds(5, 3).data);
}

TEST_CASE("methods within a replicate share the dataset") {
  const auto res = run_experiment(small_grid());
  REQUIRE(res.records.size() == 9);
  for (int r = 0; r < 3; ++r) {
    const auto h = res.records[static_cast<std::size_t>(3 * r)].data_hash;
    CHECK(res.records[static_cast<std::size_t>(3 * r + 1)].data_hash == h);
    CHECK(res.records[static_cast<std::size_t>(3 * r + 2)].data_hash == h);
    if (r > 0) CHECK(h != res.records[0].data_hash);
  }
  for (const auto& s : res.summary) {
    CHECK(s.completed == 3);
    CHECK(s.failed == 0);
    CHECK_FALSE(s.single_replicate);
  }
  // Oracle support is the truth.
  CHECK(res.summary[2].tp.mean == 4.0);
  CHECK(res.summary[2].fp.mean == 0.0);
}

TEST_CASE("output is independent of the thread count") {
  const auto a = run_experiment(small_grid(), 1);
  const auto b = run_experiment(small_grid(), 3);
  std::ostringstream sa, sb, ra, rb;
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  write_replicates_csv(ra, a);
  write_replicates_csv(rb, b);
  CHECK(sa.str() == sb.str());
  CHECK(ra.str() == rb.str());
  for (std::size_t k = 0; k < a.records.size(); ++k) CHECK(a.records[k].beta == b.records[k].beta);
}

TEST_CASE("a single replicate is flagged and failures are counted") {
  auto g = small_grid();
  g.reps = 1;
  g.scenario.n = 60;
  MethodSpec bad;
  bad.label = "bad";
  bad.correlation = {CorrelationKind::exchangeable, -0.5};  // not PD for clusters of 3 or more
  bad.lambda = 0.2;
  g.methods.push_back(bad);
  const auto res = run_experiment(g);
  CHECK(res.summary[0].single_replicate);
  CHECK(res.summary[3].failed == 1);
  CHECK(res.summary[3].completed == 0);
  CHECK_FALSE(res.records[3].error.empty());
  std::ostringstream table;
  write_table(table, res);
  CHECK(table.str().find("single replicate") != std::string::npos);
  CHECK(table.str().find("bad") != std::string::npos);
}

TEST_CASE("cross-validated methods run") {
  auto g = small_grid();
  g.reps = 1;
  g.methods.resize(1);
  g.methods[0].lambda.reset();
  const auto res = run_experiment(g);
  CHECK(res.summary[0].completed == 1);
  CHECK(res.records[0].lambda > 0.0);
}

TEST_CASE("grid JSON") {
  const auto g = parse_grid_json(R"({
    "scenario": {"example": 2, "n": 30, "p": 12},
    "reps": 4, "seed": 9,
    "fit": {"max_iter": 50, "screen": "cluster"},
    "cv": {"grid_size": 7, "ratio": 0.05, "loss": "observation"},
    "methods": [
      {"weighting": "on", "corr": "exch"},
      {"weighting": "off", "corr": "ar1", "rho": 0.3, "penalty": "mcp", "lambda": 0.1},
      {"oracle": true, "label": "truth"}
    ]})");
  CHECK(g.scenario.example == 2);
  CHECK(g.scenario.n == 30);
  CHECK(g.scenario.rho_gen == 0.5);
  CHECK(g.reps == 4);
  CHECK(g.master_seed == 9);
  CHECK(g.fit.max_iter == 50);
  CHECK(g.fit.screen == ScreenRule::mean_abs_cluster_score);
  CHECK(g.grid_size == 7);
  CHECK(g.cv_loss == CvLossWeighting::observation);
  REQUIRE(g.methods.size() == 3);
  CHECK(g.methods[0].label == "PWGEE.exch");
  CHECK_FALSE(g.methods[0].lambda.has_value());
  CHECK(g.methods[1].label == "PGEE.ar1");
  CHECK(*g.methods[1].correlation.rho == 0.3);
  CHECK(g.methods[1].penalty.kind == PenaltyKind::mcp);
  CHECK(*g.methods[1].lambda == 0.1);
  CHECK(g.methods[2].label == "truth");

  CHECK_THROWS_AS(parse_grid_json("{"), Error);
  CHECK_THROWS_AS(parse_grid_json(R"({"methods": []})"), Error);
  CHECK_THROWS_AS(parse_grid_json(R"({"scenario": {"example": 1}, "methods": [{}, {}]})"), Error);
  CHECK_THROWS_AS(parse_grid_json(R"({"scenario": {"example": 1}, "methods": [{"corr": "toeplitz"}]})"), Error);
}
