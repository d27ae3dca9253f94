#pragma once

#include "pwgee/common.hpp"
#include "pwgee/dataset.hpp"
#include "pwgee/solver.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pwgee {

inline constexpr int kCvFolds = 4;

using Folds = std::array<IndexSet, kCvFolds>;

// Seeded shuffle of 0..n-1, dealt round-robin into four folds. Each fold is
// returned sorted. Requires n >= 4.
Folds make_folds(Index n, std::uint64_t seed);

// How held-out observations are pooled into one loss.
enum class CvLossWeighting {
  // Every observation counts once.
  observation,
  // Cluster i's observations are scaled by 1 / M_i, so every cluster counts once.
  cluster,
  // cluster when the fit is weighted, observation otherwise.
  follow_fit,
};

// Held-out loss under the independence likelihood: (y - mu)^2 for the
// gaussian family, -2 log-likelihood otherwise, summed as `pooling` says.
double held_out_loss(const LongitudinalDataset& data, FamilySpec family, const Vector& beta,
                     CvLossWeighting pooling = CvLossWeighting::observation);
// The same loss split by cluster, in data order.
std::vector<double> held_out_cluster_losses(const LongitudinalDataset& data, FamilySpec family,
                                            const Vector& beta,
                                            CvLossWeighting pooling = CvLossWeighting::observation);

// max_j |Q_n(0)_j| / rho_bar(0+) over penalized coordinates: the smallest
// lambda that screens out every penalized coordinate at beta = 0.
double lambda_max(const LongitudinalDataset& data, const ModelSpec& model,
                  const FitConfig& config = {});

// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda_grid(const LongitudinalDataset& data, const ModelSpec& model,
                                        const FitConfig& config = {}, int count = 25,
                                        double ratio = 0.01);

// A training fit counts as an approximate solution when its stationarity
// violation is at most this.
inline constexpr double kStationarityTol = 1e-6;

struct CvPoint {
  Index lambda_index = 0;
  double lambda = 0.0;
  int fold = 0;
  double loss = 0.0;  // +inf when the training fit failed
  bool failed = false;
  bool converged = false;
  double violation = 0.0;  // stationarity_violation of the training fit
  bool stationary = false; // violation <= kStationarityTol
};

struct CvResult {
  double lambda_star = 0.0;
  Index lambda_index = 0;
  Index min_index = 0;          // argmin of total_loss
  double standard_error = 0.0;  // of the total loss at min_index
  std::vector<double> lambda_grid;
  std::vector<double> total_loss;  // summed over folds, per grid point
  std::vector<CvPoint> curve;      // ordered by (lambda index, fold)
  int failed_fits = 0;
  std::vector<bool> all_stationary;  // per grid point
  // Per grid point: sqrt(n) times the sd of the per-cluster loss
  // differences against min_index.
  std::vector<double> paired_standard_error;
};

// How lambda* is read off the summed CV curve.
enum class CvRule {
  // argmin of the summed loss.
  min,
  // argmin over grid points whose four training fits are all stationary;
  // falls back to min when no grid point qualifies.
  min_stationary,
  // largest lambda whose summed loss is within one standard error of the
  // minimum; the standard error is sqrt(K) times the sd of the K fold
  // losses at the minimizing lambda.
  one_se,
  // largest lambda whose summed loss exceeds the minimum by at most one
  // standard error of the paired per-cluster loss differences.
  one_se_paired,
};

struct CvOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  CvLossWeighting loss = CvLossWeighting::follow_fit;
  CvRule rule = CvRule::one_se_paired;
};

// Fourfold cross-validation over `grid`. The training fit for (fold f,
// grid point l) uses weight seed derive_seed(seed, f, l); model.seed is
// ignored. Ties in the summed loss go to the larger lambda.
CvResult cv_select(const LongitudinalDataset& data, const ModelSpec& model,
                   const std::vector<double>& grid, const FitConfig& config,
                   const CvOptions& options);

// Runs `jobs` calls of fn(index) on up to `threads` worker threads. Results
// must be written by index; the call order is unspecified.
std::string to_string(CvLossWeighting w);
CvLossWeighting parse_cv_loss(std::string_view name);
std::string to_string(CvRule rule);
CvRule parse_cv_rule(std::string_view name);

void parallel_for(Index jobs, int threads, const std::function<void(Index)>& fn);

}  // namespace pwgee
