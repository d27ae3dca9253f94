#pragma once

#include "pwgee/common.hpp"

#include <string>
#include <string_view>

namespace pwgee {

enum class PenaltyKind { scad, mcp, lasso };

// Penalty rate rho_lambda(t): the derivative of the folded-concave penalty,
// which is what enters the penalized estimating equation.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::scad;
  double lambda = 0.0;
  double scad_a = 3.7;
  double mcp_gamma = 3.0;
};

void validate(const PenaltySpec& penalty);

//   scad  lambda * [1(t <= lambda) + (a lambda - t)_+ / ((a - 1) lambda) 1(t > lambda)]
//   mcp   (lambda - t / gamma)_+
//   lasso lambda
double rate(const PenaltySpec& penalty, double t);

// lim_{t -> 0+} rate(t) / lambda; throws when lambda == 0.
double rate_at_zero_plus(const PenaltySpec& penalty);

PenaltyKind parse_penalty(std::string_view name);
std::string to_string(PenaltyKind kind);

}  // namespace pwgee
