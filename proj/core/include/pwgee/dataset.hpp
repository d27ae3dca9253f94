#pragma once

#include "pwgee/common.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pwgee {

// One cluster (subject): M_i observations of a response and p covariates.
// Row order is meaningful (AR(1) working correlation uses it).
struct ClusterData {
  std::string id;
  Vector y;
  Matrix x;

  Index size() const { return y.size(); }
};

// Immutable collection of clusters sharing the same covariate dimension.
// Copies share the underlying storage, so passing by value is cheap and
// concurrent read-only access is safe.
class LongitudinalDataset {
 public:
  LongitudinalDataset() = default;
  explicit LongitudinalDataset(std::vector<ClusterData> clusters,
                               std::vector<std::string> covariate_names = {});

  Index n() const { return clusters_ ? static_cast<Index>(clusters_->size()) : 0; }
  Index p() const { return p_; }
  Index total_observations() const { return total_obs_; }
  Index max_cluster_size() const { return max_size_; }

  const ClusterData& cluster(Index i) const { return (*clusters_)[static_cast<std::size_t>(i)]; }
  std::span<const ClusterData> clusters() const;
  const std::vector<std::string>& covariate_names() const { return names_; }

  // Clusters at the given positions, in the given order.
  LongitudinalDataset subset(std::span<const Index> cluster_indices) const;
  // Same clusters, covariate matrix restricted to the given columns.
  LongitudinalDataset select_columns(std::span<const Index> columns) const;

  // FNV-1a over ids, shapes and the raw bytes of every value.
  std::uint64_t content_hash() const;

 private:
  std::shared_ptr<const std::vector<ClusterData>> clusters_;
  std::vector<std::string> names_;
  Index p_ = 0;
  Index total_obs_ = 0;
  Index max_size_ = 0;
};

struct CsvColumns {
  std::string response;
  std::string cluster;
  // Empty means every column other than response and cluster.
  std::vector<std::string> covariates;
};

LongitudinalDataset read_long_csv(std::istream& in, const CsvColumns& columns);
LongitudinalDataset load_long_csv(const std::string& path, const CsvColumns& columns);

// Writes cluster,response,covariates... with 17 significant digits so that
// reloading reproduces every double exactly.
void write_long_csv(std::ostream& out, const LongitudinalDataset& data,
                    const std::string& response_name = "y",
                    const std::string& cluster_name = "cluster");

struct Standardized {
  LongitudinalDataset data;
  Vector means;
  Vector sds;
};

// Pooled (over all observations) centering and scaling with the sample sd
// (denominator N - 1). Columns listed in `keep` are passed through untouched
// and reported with mean 0, sd 1; use it for an intercept column.
Standardized standardize_covariates(const LongitudinalDataset& data,
                                    std::span<const Index> keep = {});

}  // namespace pwgee
