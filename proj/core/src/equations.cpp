#include "pwgee/equations.hpp"

#include <cmath>

namespace pwgee {

EquationContext::EquationContext(LongitudinalDataset data, FamilySpec family,
                                 std::vector<Matrix> cluster_inverses)
    : data_(std::move(data)), family_(family), inverses_(std::move(cluster_inverses)) {
  if (static_cast<Index>(inverses_.size()) != data_.n()) {
    throw Error("EquationContext: one inverse correlation block per cluster required");
  }
  const Index total = data_.total_observations();
  x_.resize(total, data_.p());
  y_.resize(total);
  diag_.resize(total);
  start_.reserve(static_cast<std::size_t>(data_.n()));
  Index row = 0;
  for (Index i = 0; i < data_.n(); ++i) {
    const ClusterData& c = data_.cluster(i);
    const Matrix& g = inverses_[static_cast<std::size_t>(i)];
    if (g.rows() != c.size() || g.cols() != g.rows()) {
      throw Error("EquationContext: inverse correlation block size does not match cluster size");
    }
    start_.push_back(row);
    x_.middleRows(row, c.size()) = c.x;
    y_.segment(row, c.size()) = c.y;
    diag_.segment(row, c.size()) = g.diagonal();
    if (diagonal_) {
      Matrix off = g;
      off.diagonal().setZero();
      diagonal_ = (off.array() == 0.0).all();
    }
    row += c.size();
  }
}

void EquationContext::apply_blocks(const Matrix& in, Matrix& out) const {
  if (diagonal_) {
    out.noalias() = diag_.asDiagonal() * in;
    return;
  }
  out.resize(in.rows(), in.cols());
  for (Index i = 0; i < data_.n(); ++i) {
    const Index m = data_.cluster(i).size();
    const Index r = start_[static_cast<std::size_t>(i)];
    out.middleRows(r, m).noalias() = cluster_inverse(i) * in.middleRows(r, m);
  }
}

void EquationContext::apply_blocks(const Vector& in, Vector& out) const {
  if (diagonal_) {
    out = diag_.cwiseProduct(in);
    return;
  }
  out.resize(in.size());
  for (Index i = 0; i < data_.n(); ++i) {
    const Index m = data_.cluster(i).size();
    const Index r = start_[static_cast<std::size_t>(i)];
    out.segment(r, m).noalias() = cluster_inverse(i) * in.segment(r, m);
  }
}

Vector EquationContext::cluster_score(Index i, const Vector& beta) const {
  if (beta.size() != data_.p()) throw Error("beta dimension does not match covariates");
  const ClusterData& c = data_.cluster(i);
  const Vector eta = c.x * beta;
  Vector d(c.size());
  Vector scaled(c.size());
  for (Index k = 0; k < c.size(); ++k) {
    const Moments mo = moments(family_, eta(k));
    const double inv_sd = 1.0 / std::sqrt(mo.var);
    d(k) = mo.dmu * inv_sd;
    scaled(k) = (c.y(k) - mo.mu) * inv_sd;
  }
  return c.x.transpose() * d.cwiseProduct(cluster_inverse(i) * scaled);
}

EquationContext::Evaluation EquationContext::evaluate(const Vector& beta, bool want_mean_abs) const {
  if (beta.size() != data_.p()) throw Error("beta dimension does not match covariates");
  const Index total = x_.rows();

  // Only nonzero coordinates contribute to the linear predictor.
  std::vector<Index> nz;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) nz.push_back(j);
  }
  Vector eta;
  if (2 * static_cast<Index>(nz.size()) > beta.size()) {
    eta.noalias() = x_ * beta;
  } else {
    eta = Vector::Zero(total);
    for (Index j : nz) eta.noalias() += beta(j) * x_.col(j);
  }

  Evaluation ev{Vector(), Vector(), Vector(total), 0};
  Vector scaled(total);
  for (Index k = 0; k < total; ++k) {
    const Moments mo = moments(family_, eta(k));
    if (mo.floored) ++ev.variance_floor_hits;
    const double inv_sd = 1.0 / std::sqrt(mo.var);
    ev.scale(k) = mo.dmu * inv_sd;
    scaled(k) = (y_(k) - mo.mu) * inv_sd;
  }
  Vector weighted;
  apply_blocks(scaled, weighted);
  const Vector u = ev.scale.cwiseProduct(weighted);

  const double inv_n = 1.0 / static_cast<double>(data_.n());
  ev.score.noalias() = x_.transpose() * u;
  ev.score *= inv_n;
  if (want_mean_abs) {
    ev.mean_abs_score = Vector::Zero(data_.p());
    for (Index i = 0; i < data_.n(); ++i) {
      const Index m = data_.cluster(i).size();
      const Index r = start_[static_cast<std::size_t>(i)];
      ev.mean_abs_score += (x_.middleRows(r, m).transpose() * u.segment(r, m)).cwiseAbs();
    }
    ev.mean_abs_score *= inv_n;
  }
  return ev;
}

Matrix EquationContext::fisher(const Evaluation& ev, std::span<const Index> active) const {
  const auto s = static_cast<Index>(active.size());
  if (s == 0) return Matrix(0, 0);
  const std::vector<Index> cols(active.begin(), active.end());
  const Matrix a = ev.scale.asDiagonal() * x_(Eigen::all, cols);
  Matrix b;
  apply_blocks(a, b);
  Matrix h(s, s);
  h.noalias() = a.transpose() * b;
  h *= 1.0 / static_cast<double>(data_.n());
  // Exact symmetry regardless of rounding in the triple product.
  return 0.5 * (h + h.transpose());
}

Matrix EquationContext::fisher(const Vector& beta, std::span<const Index> active) const {
  return fisher(evaluate(beta), active);
}

Vector penalty_ridge(const Vector& beta, std::span<const Index> active, const PenaltySpec& penalty,
                     double c) {
  if (!(c > 0.0)) throw Error("penalty_ridge: c must be positive");
  Vector d(static_cast<Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const double t = std::abs(beta(active[k]));
    d(static_cast<Index>(k)) = rate(penalty, t) / (c + t);
  }
  return d;
}

}  // namespace pwgee
