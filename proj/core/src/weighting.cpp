#include "pwgee/weighting.hpp"

#include "pwgee/random.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace pwgee {

namespace {

constexpr double kZeroOffDiagonal = 1e-12;

}  // namespace

int RademacherStream::draw(std::uint64_t cluster, Index k, Index l) const {
  const auto a = static_cast<std::uint64_t>(std::min(k, l));
  const auto b = static_cast<std::uint64_t>(std::max(k, l));
  const auto block = philox4x32(
      {static_cast<std::uint32_t>(cluster), static_cast<std::uint32_t>(cluster >> 32),
       static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  return (block[0] >> 31) ? 1 : -1;
}

Matrix build_weight_matrix(const Matrix& ginv, const RademacherStream& stream,
                           std::uint64_t cluster_index) {
  const Index m = ginv.rows();
  if (m < 1 || ginv.cols() != m) throw Error("build_weight_matrix: ginv must be square");
  const double diag_sum = ginv.diagonal().sum();
  assert(diag_sum > 0.0);
  if (!(diag_sum > 0.0)) throw Error("build_weight_matrix: nonpositive diagonal sum");
  const double off_sum = ginv.sum() - diag_sum;

  Matrix w = Matrix::Zero(m, m);
  w.diagonal().setConstant(1.0 / diag_sum);
  if (std::abs(off_sum) >= kZeroOffDiagonal) {
    for (Index k = 0; k < m; ++k) {
      for (Index l = k + 1; l < m; ++l) {
        w(k, l) = w(l, k) = static_cast<double>(stream.draw(cluster_index, k, l)) / off_sum;
      }
    }
  }
  return w;
}

Matrix weighted_inverse(const Matrix& ginv, const Matrix& w) {
  if (ginv.rows() != w.rows() || ginv.cols() != w.cols()) {
    throw Error("weighted_inverse: dimension mismatch");
  }
  return ginv.cwiseProduct(w);
}

Matrix unweighted_mode(const Matrix& ginv) { return ginv; }

std::vector<Matrix> build_cluster_inverses(const LongitudinalDataset& data, CorrelationKind kind,
                                           double rho, Weighting weighting,
                                           const RademacherStream& stream) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) {
    const Index m = data.cluster(i).size();
    Matrix ginv = correlation_inverse(kind, rho, m);
    if (weighting == Weighting::on) {
      out.push_back(weighted_inverse(ginv, build_weight_matrix(ginv, stream, static_cast<std::uint64_t>(i))));
    } else {
      out.push_back(unweighted_mode(ginv));
    }
  }
  return out;
}

Weighting parse_weighting(std::string_view name) {
  if (name == "on" || name == "true" || name == "1") return Weighting::on;
  if (name == "off" || name == "false" || name == "0") return Weighting::off;
  throw Error("weighting must be 'on' or 'off'");
}

std::string to_string(Weighting w) { return w == Weighting::on ? "on" : "off"; }

}  // namespace pwgee
