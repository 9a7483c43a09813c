#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/types.hpp"

namespace mcc {

// Block parameter tables for one view; rows are feature clusters, columns are
// object clusters.
struct ViewSpec {
  int n_object_clusters = 0;
  int n_feature_clusters = 0;
  Matrix gaussian_mean;   // G x K
  double gaussian_sd = 1.0;
  Matrix poisson_rate;    // G x K
  Matrix binary_success;  // G x K, probability that the binary feature is 1
};

struct Scenario {
  Index n_objects = 0;
  Index features_per_view_per_family = 0;
  std::vector<ViewSpec> views;
  double missing_ratio = 0.0;
  std::uint64_t seed = 0;
};

// The three-view benchmark with object-cluster counts (2, 3, 4), two feature
// clusters per view, and fixed Gaussian/Poisson/binary block tables.
Scenario benchmark_scenario(Index n_objects, Index features_per_view_per_family,
                            double missing_ratio, std::uint64_t seed);

// Samples a dataset and its ground-truth assignments: features are split
// evenly across views (per family), cluster memberships are uniform, and each
// cell is drawn from its block's distribution. Deterministic given the seed.
std::pair<Dataset, Assignments> generate(const Scenario& scenario);

// Masks floor(ratio * observed_cells) uniformly chosen observed cells,
// skipping any draw that would leave a feature fully unobserved. Cell values
// are preserved; only the mask changes.
Dataset apply_missing(Dataset dataset, double ratio, std::uint64_t seed);

}  // namespace mcc
