#pragma once

#include "pwgee/common.hpp"

#include <span>
#include <vector>

namespace pwgee {

struct SelectionTruth {
  Vector beta_star;
  IndexSet true_support;  // {j : beta_star[j] != 0}

  static SelectionTruth from_beta(Vector beta_star);
};

struct SelectionMetrics {
  int tp = 0;
  int fp = 0;
  int cr = 0;  // 1 when the true support is contained in the selected one
};

// Selected set is {j : beta_hat[j] != 0}; beta_hat is expected to be
// hard-thresholded already.
SelectionMetrics selection_metrics(const Vector& beta_hat, const SelectionTruth& truth);

double squared_error(const Vector& beta_hat, const Vector& beta_star);

// Mean over replicates of ||beta_hat - beta_star||^2.
double mse(std::span<const Vector> beta_hats, const Vector& beta_star);

// Fraction of observations with 1(p >= cutoff) != label.
double classification_error(std::span<const double> fitted_probs, std::span<const double> labels,
                            double cutoff = 0.5);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n - 1); 0 for a single value
  int count = 0;
};

MeanSd summarize(std::span<const double> values);

}  // namespace pwgee
