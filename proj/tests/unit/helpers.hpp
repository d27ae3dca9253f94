#pragma once

#include "pwgee/dataset.hpp"
#include "pwgee/random.hpp"

#include <string>
#include <vector>

namespace testutil {

// Random clustered gaussian data: sizes drawn from 1..max_m, standard normal
// covariates, response = x'beta + noise.
inline pwgee::LongitudinalDataset random_data(std::uint64_t seed, pwgee::Index n, pwgee::Index max_m,
                                              pwgee::Index p, const pwgee::Vector* beta = nullptr,
                                              double noise = 1.0) {
  pwgee::CounterRng rng(seed, 17);
  std::vector<pwgee::ClusterData> clusters;
  for (pwgee::Index i = 0; i < n; ++i) {
    const auto m = static_cast<pwgee::Index>(1 + rng.below(static_cast<std::uint64_t>(max_m)));
    pwgee::ClusterData c;
    c.id = "c" + std::to_string(i);
    c.x.resize(m, p);
    c.y.resize(m);
    for (pwgee::Index r = 0; r < m; ++r) {
      for (pwgee::Index j = 0; j < p; ++j) c.x(r, j) = rng.normal();
      c.y(r) = noise * rng.normal();
    }
    if (beta) c.y += c.x * *beta;
    clusters.push_back(std::move(c));
  }
  return pwgee::LongitudinalDataset(std::move(clusters));
}

}  // namespace testutil
