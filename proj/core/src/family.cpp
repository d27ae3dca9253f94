#include "pwgee/family.hpp"

#include "pwgee/common.hpp"

#include <algorithm>
#include <cmath>

namespace pwgee {

namespace {

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

double mean(FamilySpec family, double eta) {
  switch (family.kind) {
    case FamilyKind::gaussian_identity: return eta;
    case FamilyKind::poisson_log: return std::exp(eta);
    case FamilyKind::binomial_logit: return logistic(eta);
  }
  return eta;
}

double mean_deriv(FamilySpec family, double eta) {
  switch (family.kind) {
    case FamilyKind::gaussian_identity: return 1.0;
    case FamilyKind::poisson_log: return std::exp(eta);
    case FamilyKind::binomial_logit: {
      const double mu = logistic(eta);
      return mu * (1.0 - mu);
    }
  }
  return 1.0;
}

double variance(FamilySpec family, double eta) { return moments(family, eta).var; }

bool variance_floored(FamilySpec family, double eta) { return moments(family, eta).floored; }

Moments moments(FamilySpec family, double eta) {
  switch (family.kind) {
    case FamilyKind::gaussian_identity: return {eta, 1.0, 1.0, false};
    case FamilyKind::poisson_log: {
      const double mu = std::exp(eta);
      return {mu, mu, mu, false};
    }
    case FamilyKind::binomial_logit: {
      const double mu = logistic(eta);
      const double v = mu * (1.0 - mu);
      if (v < kBinomialVarianceFloor) return {mu, v, kBinomialVarianceFloor, true};
      return {mu, v, v, false};
    }
  }
  return {eta, 1.0, 1.0, false};
}

double log_likelihood(FamilySpec family, double y, double mu) {
  switch (family.kind) {
    case FamilyKind::gaussian_identity: return -0.5 * (y - mu) * (y - mu);
    case FamilyKind::poisson_log: {
      const double m = std::max(mu, 1e-300);
      return y * std::log(m) - mu - std::lgamma(y + 1.0);
    }
    case FamilyKind::binomial_logit: {
      const double m = std::clamp(mu, 1e-15, 1.0 - 1e-15);
      return y * std::log(m) + (1.0 - y) * std::log1p(-m);
    }
  }
  return 0.0;
}

FamilySpec parse_family(std::string_view name) {
  if (name == "gaussian" || name == "gaussian_identity") return {FamilyKind::gaussian_identity};
  if (name == "poisson" || name == "poisson_log") return {FamilyKind::poisson_log};
  if (name == "binomial" || name == "binomial_logit") return {FamilyKind::binomial_logit};
  throw Error("unknown family '" + std::string(name) + "'");
}

std::string to_string(FamilySpec family) {
  switch (family.kind) {
    case FamilyKind::gaussian_identity: return "gaussian";
    case FamilyKind::poisson_log: return "poisson";
    case FamilyKind::binomial_logit: return "binomial";
  }
  return "gaussian";
}

}  // namespace pwgee
