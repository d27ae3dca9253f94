#include "pwgee/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pwgee {

namespace {

constexpr double kBoundShrink = 1e-6;

}  // namespace

void check_rho(CorrelationKind kind, double rho, Index m) {
  if (!std::isfinite(rho)) throw Error("correlation parameter must be finite");
  switch (kind) {
    case CorrelationKind::independence: return;
    case CorrelationKind::exchangeable:
      if (m >= 2 && !(rho < 1.0 && rho > -1.0 / static_cast<double>(m - 1))) {
        std::ostringstream os;
        os << "exchangeable rho=" << rho << " is not positive definite for cluster size " << m;
        throw Error(os.str());
      }
      return;
    case CorrelationKind::ar1:
      if (m >= 2 && !(std::abs(rho) < 1.0)) {
        std::ostringstream os;
        os << "ar1 rho=" << rho << " must satisfy |rho| < 1";
        throw Error(os.str());
      }
      return;
  }
}

Matrix build_correlation(CorrelationKind kind, double rho, Index m) {
  if (m < 1) throw Error("correlation size must be positive");
  check_rho(kind, rho, m);
  switch (kind) {
    case CorrelationKind::independence: return Matrix::Identity(m, m);
    case CorrelationKind::exchangeable: {
      Matrix g = Matrix::Constant(m, m, rho);
      g.diagonal().setOnes();
      return g;
    }
    case CorrelationKind::ar1: {
      Matrix g(m, m);
      for (Index k = 0; k < m; ++k) {
        for (Index l = 0; l < m; ++l) g(k, l) = std::pow(rho, static_cast<double>(std::abs(k - l)));
      }
      return g;
    }
  }
  return Matrix::Identity(m, m);
}

Matrix invert_correlation(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error("correlation matrix must be square");
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "correlation matrix is not positive definite (smallest eigenvalue "
       << eig.eigenvalues().minCoeff() << ")";
    throw Error(os.str());
  }
  return llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

Matrix correlation_inverse(CorrelationKind kind, double rho, Index m) {
  if (m < 1) throw Error("correlation size must be positive");
  check_rho(kind, rho, m);
  switch (kind) {
    case CorrelationKind::independence: return Matrix::Identity(m, m);
    case CorrelationKind::exchangeable: {
      // (1/(1-rho)) (I - rho/(1+(m-1)rho) J)
      const double a = 1.0 / (1.0 - rho);
      const double b = rho / (1.0 + static_cast<double>(m - 1) * rho);
      Matrix inv = Matrix::Constant(m, m, -a * b);
      inv.diagonal().array() += a;
      return inv;
    }
    case CorrelationKind::ar1: {
      if (m == 1) return Matrix::Ones(1, 1);
      const double s = 1.0 / (1.0 - rho * rho);
      Matrix inv = Matrix::Zero(m, m);
      for (Index k = 0; k < m; ++k) {
        inv(k, k) = (k == 0 || k == m - 1) ? s : s * (1.0 + rho * rho);
        if (k + 1 < m) inv(k, k + 1) = inv(k + 1, k) = -rho * s;
      }
      return inv;
    }
  }
  return Matrix::Identity(m, m);
}

std::pair<double, double> rho_bounds(CorrelationKind kind, Index max_m) {
  switch (kind) {
    case CorrelationKind::independence: return {0.0, 0.0};
    case CorrelationKind::exchangeable: {
      const double lo = max_m >= 2 ? -1.0 / static_cast<double>(max_m - 1) : -1.0;
      return {lo + kBoundShrink, 1.0 - kBoundShrink};
    }
    case CorrelationKind::ar1: return {-1.0 + kBoundShrink, 1.0 - kBoundShrink};
  }
  return {0.0, 0.0};
}

double estimate_rho(const LongitudinalDataset& data, const Vector& beta, FamilySpec family,
                    CorrelationKind kind, Index n_params) {
  if (kind == CorrelationKind::independence) return 0.0;
  if (beta.size() != data.p()) throw Error("estimate_rho: beta dimension mismatch");

  // Fixed cluster order keeps the sums reproducible.
  double cross = 0.0;
  double sq = 0.0;
  double pairs = 0.0;
  for (const auto& c : data.clusters()) {
    const Vector eta = c.x * beta;
    Vector r(c.size());
    for (Index k = 0; k < c.size(); ++k) {
      const Moments mo = moments(family, eta(k));
      r(k) = (c.y(k) - mo.mu) / std::sqrt(mo.var);
    }
    sq += r.squaredNorm();
    const Index m = c.size();
    if (kind == CorrelationKind::exchangeable) {
      for (Index k = 0; k < m; ++k) {
        for (Index l = k + 1; l < m; ++l) cross += r(k) * r(l);
      }
      pairs += static_cast<double>(m * (m - 1) / 2);
    } else {
      for (Index k = 0; k + 1 < m; ++k) cross += r(k) * r(k + 1);
      pairs += static_cast<double>(m - 1);
    }
  }
  if (pairs <= 0.0) {
    throw Error("no within-cluster pairs to estimate rho; use the independence structure");
  }
  const auto np = static_cast<double>(n_params);
  const auto total = static_cast<double>(data.total_observations());
  const double pair_den = pairs - np > 0.0 ? pairs - np : pairs;
  const double scale_den = total - np > 0.0 ? total - np : total;
  const double scale = sq / scale_den;

  double rho = 0.0;
  if (scale > 0.0 && std::isfinite(scale)) rho = (cross / pair_den) / scale;
  if (!std::isfinite(rho)) rho = 0.0;
  const auto [lo, hi] = rho_bounds(kind, data.max_cluster_size());
  return std::clamp(rho, lo, hi);
}

CorrelationKind parse_correlation(std::string_view name) {
  if (name == "indep" || name == "independence") return CorrelationKind::independence;
  if (name == "exch" || name == "exchangeable") return CorrelationKind::exchangeable;
  if (name == "ar1") return CorrelationKind::ar1;
  throw Error("unknown correlation structure '" + std::string(name) + "'");
}

std::string to_string(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::independence: return "indep";
    case CorrelationKind::exchangeable: return "exch";
    case CorrelationKind::ar1: return "ar1";
  }
  return "indep";
}

}  // namespace pwgee
