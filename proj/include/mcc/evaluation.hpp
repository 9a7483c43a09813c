#pragma once

#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/types.hpp"

namespace mcc {

struct Partition {
  std::vector<int> labels;
};

// Hubert-Arabie adjusted Rand index. When the chance-corrected denominator is
// zero (both partitions trivial), returns 1 for identical partitions and 0
// otherwise.
double adjusted_rand_index(const Partition& a, const Partition& b);

// Rows are clusters of `a`, columns clusters of `b`, both ordered by label.
IntMatrix contingency_table(const Partition& a, const Partition& b);

// For each true partition, the maximum ARI over all yielded partitions; the
// same yielded partition may match several true ones.
struct ViewMatch {
  std::vector<double> per_true_max;
  double mean = 0.0;
};
ViewMatch match_views(const std::vector<Partition>& true_partitions,
                      const std::vector<Partition>& yielded_partitions);

// ARI between the two feature-to-view memberships, flattened across families.
double view_membership_ari(const Assignments& truth, const Assignments& yielded);

}  // namespace mcc
