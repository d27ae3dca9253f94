#include "pwgee/penalty.hpp"

#include "pwgee/common.hpp"

#include <algorithm>
#include <cmath>

namespace pwgee {

void validate(const PenaltySpec& penalty) {
  if (!(penalty.lambda >= 0.0) || !std::isfinite(penalty.lambda)) {
    throw Error("lambda must be finite and nonnegative");
  }
  if (penalty.kind == PenaltyKind::scad && !(penalty.scad_a > 2.0)) {
    throw Error("SCAD parameter a must exceed 2");
  }
  if (penalty.kind == PenaltyKind::mcp && !(penalty.mcp_gamma > 1.0)) {
    throw Error("MCP parameter gamma must exceed 1");
  }
}

double rate(const PenaltySpec& penalty, double t) {
  const double lambda = penalty.lambda;
  if (lambda <= 0.0) return 0.0;
  switch (penalty.kind) {
    case PenaltyKind::scad: {
      if (t <= lambda) return lambda;
      const double a = penalty.scad_a;
      return std::max(a * lambda - t, 0.0) / (a - 1.0);
    }
    case PenaltyKind::mcp: return std::max(lambda - t / penalty.mcp_gamma, 0.0);
    case PenaltyKind::lasso: return lambda;
  }
  return 0.0;
}

double rate_at_zero_plus(const PenaltySpec& penalty) {
  if (!(penalty.lambda > 0.0)) throw Error("rate_at_zero_plus: lambda must be positive");
  // All supported rates satisfy rate(0+) = lambda.
  return 1.0;
}

PenaltyKind parse_penalty(std::string_view name) {
  if (name == "scad") return PenaltyKind::scad;
  if (name == "mcp") return PenaltyKind::mcp;
  if (name == "lasso") return PenaltyKind::lasso;
  throw Error("unknown penalty '" + std::string(name) + "'");
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::scad: return "scad";
    case PenaltyKind::mcp: return "mcp";
    case PenaltyKind::lasso: return "lasso";
  }
  return "scad";
}

}  // namespace pwgee
