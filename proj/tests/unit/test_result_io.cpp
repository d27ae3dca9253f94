#include "pwgee/result_io.hpp"

#include "pwgee/simgen.hpp"

#include <doctest.h>

#include <sstream>

using namespace pwgee;

TEST_CASE("fit result JSON round trip") {
  const auto d = generate({1, 60, 10, 0.5, 4});
  ModelSpec model;
  model.penalty = {PenaltyKind::scad, 0.2};
  model.seed = 12;
  const FitConfig cfg;
  const auto fit = fit_pwgee(d, model, cfg);
  std::vector<std::string> names;
  for (int k = 0; k < 10; ++k) names.push_back("x" + std::to_string(k + 1));
  const std::string text = fit_result_json(fit, model, cfg, names);
  CHECK(text.find("\"x1\"") != std::string::npos);
  const auto back = parse_fit_result_json(text);
  CHECK(back.beta == fit.beta);
  CHECK(back.active_set == fit.active_set);
  CHECK(back.converged == fit.converged);
  CHECK(back.final_score_norm == fit.final_score_norm);
  CHECK_THROWS_AS(parse_fit_result_json("[1,"), Error);
  CHECK_THROWS_AS(parse_fit_result_json(R"({"p": 2, "beta": [{"index": 5, "value": 1}]})"), Error);
}

TEST_CASE("cv curve CSV") {
  CvResult cv;
  cv.lambda_grid = {0.5, 0.25};
  cv.total_loss = {10.0, 8.0};
  for (int l = 0; l < 2; ++l) {
    for (int f = 0; f < kCvFolds; ++f) cv.curve.push_back({l, cv.lambda_grid[static_cast<std::size_t>(l)], f, 2.0 + l, false, true});
  }
  std::ostringstream out;
  write_cv_curve_csv(out, cv);
  const std::string s = out.str();
  CHECK(s.rfind("lambda,fold,loss\n", 0) == 0);
  CHECK(s.find("0.25,all,8\n") != std::string::npos);
  CHECK(s.find("0.5,3,2\n") != std::string::npos);
  int lines = 0;
  for (char c : s) lines += c == '\n';
  CHECK(lines == 1 + 8 + 2);
}

TEST_CASE("truth vectors") {
  const Vector a = parse_beta_json("[1, 0, -2.5]");
  const Vector b = parse_beta_json(R"({"beta_star": [1, 0, -2.5]})");
  CHECK(a == b);
  CHECK(a(2) == -2.5);
  CHECK_THROWS_AS(parse_beta_json(R"({"beta": [1]})"), Error);
  CHECK_THROWS_AS(read_text_file("/nonexistent/file.json"), Error);
}
