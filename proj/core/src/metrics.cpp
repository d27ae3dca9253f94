#include "pwgee/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pwgee {

SelectionTruth SelectionTruth::from_beta(Vector beta_star) {
  SelectionTruth t{std::move(beta_star), {}};
  for (Index j = 0; j < t.beta_star.size(); ++j) {
    if (t.beta_star(j) != 0.0) t.true_support.push_back(j);
  }
  return t;
}

SelectionMetrics selection_metrics(const Vector& beta_hat, const SelectionTruth& truth) {
  if (beta_hat.size() != truth.beta_star.size()) throw Error("selection_metrics: dimension mismatch");
  SelectionMetrics m;
  for (Index j = 0; j < beta_hat.size(); ++j) {
    if (beta_hat(j) == 0.0) continue;
    if (std::binary_search(truth.true_support.begin(), truth.true_support.end(), j)) {
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.cr = m.tp == static_cast<int>(truth.true_support.size()) ? 1 : 0;
  return m;
}

double squared_error(const Vector& beta_hat, const Vector& beta_star) {
  if (beta_hat.size() != beta_star.size()) throw Error("squared_error: dimension mismatch");
  return (beta_hat - beta_star).squaredNorm();
}

double mse(std::span<const Vector> beta_hats, const Vector& beta_star) {
  if (beta_hats.empty()) throw Error("mse: no replicates");
  double total = 0.0;
  for (const auto& b : beta_hats) total += squared_error(b, beta_star);
  return total / static_cast<double>(beta_hats.size());
}

double classification_error(std::span<const double> fitted_probs, std::span<const double> labels,
                            double cutoff) {
  if (fitted_probs.empty()) throw Error("classification_error: empty input");
  if (fitted_probs.size() != labels.size()) throw Error("classification_error: length mismatch");
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < fitted_probs.size(); ++k) {
    const double predicted = fitted_probs[k] >= cutoff ? 1.0 : 0.0;
    if (predicted != labels[k]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(fitted_probs.size());
}

MeanSd summarize(std::span<const double> values) {
  MeanSd s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace pwgee
