#pragma once

#include "pwgee/common.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/family.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace pwgee {

enum class CorrelationKind { independence, exchangeable, ar1 };

// Working correlation structure. An empty rho for exchangeable/ar1 means the
// parameter is moment-estimated during the fit.
struct WorkingCorrelationSpec {
  CorrelationKind kind = CorrelationKind::independence;
  std::optional<double> rho;
};

// Throws if rho does not give a positive definite m x m matrix.
void check_rho(CorrelationKind kind, double rho, Index m);

Matrix build_correlation(CorrelationKind kind, double rho, Index m);

// Generic symmetric positive definite inverse (Cholesky). A non-PD input
// throws with its smallest eigenvalue in the message.
Matrix invert_correlation(const Matrix& g);

// Closed-form inverse of build_correlation(kind, rho, m).
Matrix correlation_inverse(CorrelationKind kind, double rho, Index m);

// Moment estimate of rho from Pearson residuals at beta, scaled by the
// pooled Pearson variance. `n_params` is the degrees-of-freedom correction;
// it is dropped whenever it would make a denominator nonpositive. The result
// is clamped into the positive-definite range shrunk by 1e-6.
double estimate_rho(const LongitudinalDataset& data, const Vector& beta, FamilySpec family,
                    CorrelationKind kind, Index n_params = 0);

// Open interval of valid rho for clusters up to size max_m, shrunk by 1e-6.
std::pair<double, double> rho_bounds(CorrelationKind kind, Index max_m);

CorrelationKind parse_correlation(std::string_view name);
std::string to_string(CorrelationKind kind);

}  // namespace pwgee
