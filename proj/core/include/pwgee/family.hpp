#pragma once

#include "pwgee/common.hpp"

#include <string>
#include <string_view>

namespace pwgee {

enum class FamilyKind { gaussian_identity, poisson_log, binomial_logit };

// Marginal mean/variance pair. Dispersion is fixed at 1; the working variance
// is allowed to be misspecified.
struct FamilySpec {
  FamilyKind kind = FamilyKind::gaussian_identity;
};

inline constexpr double kBinomialVarianceFloor = 1e-12;

double mean(FamilySpec family, double eta);
double mean_deriv(FamilySpec family, double eta);
double variance(FamilySpec family, double eta);

// True when variance() returned the floor instead of mu(1 - mu).
bool variance_floored(FamilySpec family, double eta);

struct Moments {
  double mu;
  double dmu;
  double var;
  bool floored;
};

// All three quantities from one exp() evaluation.
Moments moments(FamilySpec family, double eta);

// Independence log-likelihood contribution of one observation (up to terms
// not depending on mu for the gaussian case: -(y - mu)^2 / 2).
double log_likelihood(FamilySpec family, double y, double mu);

FamilySpec parse_family(std::string_view name);
std::string to_string(FamilySpec family);

}  // namespace pwgee
