#pragma once

#include "pwgee/common.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/family.hpp"
#include "pwgee/penalty.hpp"

#include <span>
#include <vector>

namespace pwgee {

// Everything the weighted estimating function needs that stays fixed while
// beta moves: the data, the family and the per-cluster (weighted) inverse
// correlation blocks. Clusters are stacked into one N x p design so that
// Q_n and H_n are a handful of dense products.
class EquationContext {
 public:
  EquationContext(LongitudinalDataset data, FamilySpec family, std::vector<Matrix> cluster_inverses);

  const LongitudinalDataset& data() const { return data_; }
  FamilySpec family() const { return family_; }
  const Matrix& cluster_inverse(Index i) const { return inverses_[static_cast<std::size_t>(i)]; }

  // X_i^T F_i G~_i^{-1} Phi_i^{-1/2} (y_i - mu_i), F_i = mu'_i Phi_i^{-1/2}.
  Vector cluster_score(Index i, const Vector& beta) const;

  struct Evaluation {
    Vector score;           // Q_n, length p
    Vector mean_abs_score;  // n^{-1} sum_i |cluster score_i|; empty unless requested
    Vector scale;           // mu' / sqrt(phi) per stacked observation
    int variance_floor_hits = 0;
  };

  // Q_n at beta (plus the per-cluster absolute score average on request).
  Evaluation evaluate(const Vector& beta, bool want_mean_abs = false) const;

  Vector score(const Vector& beta) const { return evaluate(beta).score; }

  // H_n over `active`, reusing the per-observation scale of an evaluation.
  Matrix fisher(const Evaluation& ev, std::span<const Index> active) const;
  Matrix fisher(const Vector& beta, std::span<const Index> active) const;

 private:
  // out = blockdiag(G~_i^{-1}) in, applied to each column.
  void apply_blocks(const Matrix& in, Matrix& out) const;
  void apply_blocks(const Vector& in, Vector& out) const;

  LongitudinalDataset data_;
  FamilySpec family_;
  std::vector<Matrix> inverses_;
  Matrix x_;                  // stacked covariates
  Vector y_;                  // stacked responses
  std::vector<Index> start_;  // first stacked row of each cluster
  bool diagonal_ = true;      // every block diagonal
  Vector diag_;               // stacked block diagonals (used when diagonal_)
};

// Diagonal of D_n: rate(|beta_j|) / (c + |beta_j|) for j in S.
Vector penalty_ridge(const Vector& beta, std::span<const Index> active, const PenaltySpec& penalty,
                     double c);

}  // namespace pwgee
