#include "mcc/evaluation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace mcc {
namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

std::map<int, int> label_index(const std::vector<int>& labels) {
  std::map<int, int> index;
  for (int label : labels) index.emplace(label, 0);
  int next = 0;
  for (auto& [label, idx] : index) idx = next++;
  return index;
}

bool identical_partitions(const Partition& a, const Partition& b) {
  // Equal up to relabeling: first occurrences induce the same canonical form.
  std::map<int, int> map_a, map_b;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const int ca = static_cast<int>(map_a.size());
    const int cb = static_cast<int>(map_b.size());
    const int la = map_a.emplace(a.labels[i], ca).first->second;
    const int lb = map_b.emplace(b.labels[i], cb).first->second;
    if (la != lb) return false;
  }
  return true;
}

}  // namespace

IntMatrix contingency_table(const Partition& a, const Partition& b) {
  if (a.labels.size() != b.labels.size())
    throw std::invalid_argument("contingency_table: partitions have different lengths");
  const std::map<int, int> rows = label_index(a.labels);
  const std::map<int, int> cols = label_index(b.labels);
  IntMatrix table = IntMatrix::Zero(static_cast<Index>(rows.size()),
                                    static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    ++table(rows.at(a.labels[i]), cols.at(b.labels[i]));
  return table;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.labels.size() != b.labels.size())
    throw std::invalid_argument("adjusted_rand_index: partitions have different lengths");
  if (a.labels.size() < 2)
    throw std::invalid_argument("adjusted_rand_index: need at least 2 items");

  const IntMatrix table = contingency_table(a, b);
  const double n = static_cast<double>(a.labels.size());
  double pairs_both = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j)
      pairs_both += choose2(static_cast<double>(table(i, j)));
  double pairs_a = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    pairs_a += choose2(static_cast<double>(table.row(i).sum()));
  double pairs_b = 0.0;
  for (Index j = 0; j < table.cols(); ++j)
    pairs_b += choose2(static_cast<double>(table.col(j).sum()));

  const double expected = pairs_a * pairs_b / choose2(n);
  const double denominator = 0.5 * (pairs_a + pairs_b) - expected;
  if (denominator == 0.0) return identical_partitions(a, b) ? 1.0 : 0.0;
  return (pairs_both - expected) / denominator;
}

ViewMatch match_views(const std::vector<Partition>& true_partitions,
                      const std::vector<Partition>& yielded_partitions) {
  if (true_partitions.empty() || yielded_partitions.empty())
    throw std::invalid_argument("match_views: empty partition list");
  ViewMatch result;
  result.per_true_max.reserve(true_partitions.size());
  for (const Partition& truth : true_partitions) {
    double best = -2.0;
    for (const Partition& yielded : yielded_partitions)
      best = std::max(best, adjusted_rand_index(truth, yielded));
    result.per_true_max.push_back(best);
    result.mean += best;
  }
  result.mean /= static_cast<double>(result.per_true_max.size());
  return result;
}

double view_membership_ari(const Assignments& truth, const Assignments& yielded) {
  if (truth.features.size() != yielded.features.size())
    throw std::invalid_argument("view_membership_ari: family count mismatch");
  Partition a, b;
  for (std::size_t m = 0; m < truth.features.size(); ++m) {
    if (truth.features[m].size() != yielded.features[m].size())
      throw std::invalid_argument("view_membership_ari: feature count mismatch");
    for (std::size_t j = 0; j < truth.features[m].size(); ++j) {
      a.labels.push_back(truth.features[m][j].view);
      b.labels.push_back(yielded.features[m][j].view);
    }
  }
  return adjusted_rand_index(a, b);
}

}  // namespace mcc
