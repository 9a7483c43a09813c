#include "mcc/dataset.hpp"

#include <cmath>
#include <string>

namespace mcc {
namespace {

bool is_nonneg_integer(double x) {
  return std::isfinite(x) && x >= 0.0 && std::floor(x) == x;
}

void check_family(const Dataset& dataset, int m, std::vector<Violation>& out) {
  const FamilyData& fam = dataset.families[m];
  const Index n = dataset.n_objects();
  const Index d = fam.cols();
  const bool multinomial = fam.family.kind == FamilyKind::Multinomial;

  if (static_cast<Index>(fam.feature_names.size()) != fam.observed.cols()) {
    out.push_back({m, -1, -1, "feature name count does not match column count"});
    return;
  }
  if (fam.observed.rows() != n) {
    out.push_back({m, -1, -1, "observation mask row count does not match object count"});
    return;
  }
  if (!multinomial && (fam.values.rows() != n || fam.values.cols() != d)) {
    out.push_back({m, -1, -1, "value matrix shape does not match mask"});
    return;
  }
  if ((fam.family.kind == FamilyKind::Categorical || multinomial) &&
      fam.family.num_categories < 2) {
    out.push_back({m, -1, -1, "categorical family needs at least 2 categories"});
    return;
  }
  if (multinomial) {
    if (static_cast<int>(fam.counts.size()) != fam.family.num_categories) {
      out.push_back({m, -1, -1, "count matrix list does not match category count"});
      return;
    }
    for (const Matrix& c : fam.counts) {
      if (c.rows() != n || c.cols() != d) {
        out.push_back({m, -1, -1, "count matrix shape does not match mask"});
        return;
      }
    }
  }

  for (Index j = 0; j < d; ++j) {
    Index n_observed = 0;
    for (Index i = 0; i < n; ++i) {
      const double flag = fam.observed(i, j);
      if (flag != 0.0 && flag != 1.0) {
        out.push_back({m, j, i, "mask entry is not 0 or 1"});
        continue;
      }
      if (flag == 0.0) continue;
      ++n_observed;
      switch (fam.family.kind) {
        case FamilyKind::Gaussian:
          if (!std::isfinite(fam.values(i, j)))
            out.push_back({m, j, i, "gaussian value is not finite"});
          break;
        case FamilyKind::Poisson:
          if (!is_nonneg_integer(fam.values(i, j)))
            out.push_back({m, j, i, "poisson value is not a nonnegative integer"});
          break;
        case FamilyKind::Categorical: {
          const double x = fam.values(i, j);
          if (!is_nonneg_integer(x) || x >= fam.family.num_categories)
            out.push_back({m, j, i, "categorical value is outside 0..H-1"});
          break;
        }
        case FamilyKind::Multinomial:
          for (const Matrix& c : fam.counts) {
            if (!is_nonneg_integer(c(i, j))) {
              out.push_back({m, j, i, "multinomial count is not a nonnegative integer"});
              break;
            }
          }
          break;
      }
    }
    if (n_observed == 0)
      out.push_back({m, j, -1, "feature has no observed values"});
  }
}

}  // namespace

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Categorical: return "categorical";
    case FamilyKind::Multinomial: return "multinomial";
  }
  return "unknown";
}

Index Dataset::n_features() const {
  Index total = 0;
  for (const FamilyData& fam : families) total += fam.cols();
  return total;
}

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  if (dataset.object_ids.empty())
    out.push_back({-1, -1, -1, "dataset has no objects"});
  if (dataset.n_features() == 0)
    out.push_back({-1, -1, -1, "dataset has no features"});
  for (int m = 0; m < static_cast<int>(dataset.families.size()); ++m)
    check_family(dataset, m, out);
  return out;
}

Dataset standardize_gaussian(Dataset dataset) {
  for (FamilyData& fam : dataset.families) {
    if (fam.family.kind != FamilyKind::Gaussian) continue;
    for (Index j = 0; j < fam.cols(); ++j) {
      double sum = 0.0, count = 0.0;
      double lo = 0.0, hi = 0.0;
      bool first = true;
      for (Index i = 0; i < fam.rows(); ++i) {
        if (!fam.is_observed(i, j)) continue;
        const double x = fam.values(i, j);
        sum += x;
        count += 1.0;
        lo = first ? x : std::min(lo, x);
        hi = first ? x : std::max(hi, x);
        first = false;
      }
      if (count == 0.0) continue;
      if (lo == hi) {
        fam.values.col(j).setZero();
        continue;
      }
      const double mean = sum / count;
      double ss = 0.0;
      for (Index i = 0; i < fam.rows(); ++i) {
        if (!fam.is_observed(i, j)) continue;
        const double c = fam.values(i, j) - mean;
        ss += c * c;
      }
      const double sd = std::sqrt(ss / count);
      for (Index i = 0; i < fam.rows(); ++i) {
        if (fam.is_observed(i, j))
          fam.values(i, j) = (fam.values(i, j) - mean) / sd;
      }
    }
  }
  return dataset;
}

}  // namespace mcc
