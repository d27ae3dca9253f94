#pragma once

#include "pwgee/common.hpp"
#include "pwgee/correlation.hpp"
#include "pwgee/dataset.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pwgee {

// Symmetric Rademacher signs B_{i,kl}, drawn as a pure function of
// (seed, cluster, min(k,l), max(k,l)).
class RademacherStream {
 public:
  explicit RademacherStream(std::uint64_t seed) : seed_(seed) {}

  int draw(std::uint64_t cluster, Index k, Index l) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

enum class Weighting { on, off };

// Cluster-size weight matrix for one cluster with working inverse `ginv`:
//   diagonal      1 / sum_k g_kk
//   off-diagonal  B_kl / sum_{k != l} g_kl   (0 when that sum vanishes)
Matrix build_weight_matrix(const Matrix& ginv, const RademacherStream& stream,
                           std::uint64_t cluster_index);

// Entrywise product ginv o w.
Matrix weighted_inverse(const Matrix& ginv, const Matrix& w);

// Plain GEE: the working inverse itself.
Matrix unweighted_mode(const Matrix& ginv);

// Per-cluster matrices fed into the estimating equations. For independence
// with weighting on, every block is exactly (1/M_i) I.
std::vector<Matrix> build_cluster_inverses(const LongitudinalDataset& data, CorrelationKind kind,
                                           double rho, Weighting weighting,
                                           const RademacherStream& stream);

Weighting parse_weighting(std::string_view name);
std::string to_string(Weighting w);

}  // namespace pwgee
