#include "mcc/synthgen.hpp"

#include <cstdio>
#include <stdexcept>

#include "mcc/rng.hpp"

namespace mcc {
namespace {

Matrix table(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Matrix out(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

std::string padded_name(const char* prefix, Index j) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%s_%04ld", prefix, static_cast<long>(j));
  return buffer;
}

}  // namespace

Scenario benchmark_scenario(Index n_objects, Index features_per_view_per_family,
                            double missing_ratio, std::uint64_t seed) {
  Scenario scenario;
  scenario.n_objects = n_objects;
  scenario.features_per_view_per_family = features_per_view_per_family;
  scenario.missing_ratio = missing_ratio;
  scenario.seed = seed;
  scenario.views.resize(3);

  scenario.views[0].n_object_clusters = 2;
  scenario.views[0].gaussian_mean = table({{0, 1}, {4, 3}});
  scenario.views[0].poisson_rate = table({{1, 2}, {2, 1}});
  scenario.views[0].binary_success = table({{0.1, 0.1}, {0.9, 0.9}});

  scenario.views[1].n_object_clusters = 3;
  scenario.views[1].gaussian_mean = table({{0, 1, 2}, {5, 4, 3}});
  scenario.views[1].poisson_rate = table({{1, 2, 3}, {3, 2, 1}});
  scenario.views[1].binary_success = table({{0.1, 0.5, 0.9}, {0.9, 0.5, 0.1}});

  scenario.views[2].n_object_clusters = 4;
  scenario.views[2].gaussian_mean = table({{0, 1, 2, 3}, {6, 5, 4, 3}});
  scenario.views[2].poisson_rate = table({{1, 2, 3, 4}, {4, 3, 2, 1}});
  scenario.views[2].binary_success = table({{0.1, 0.4, 0.6, 0.9}, {0.9, 0.6, 0.4, 0.1}});

  for (ViewSpec& view : scenario.views) {
    view.n_feature_clusters = 2;
    view.gaussian_sd = 1.0;
  }
  return scenario;
}

std::pair<Dataset, Assignments> generate(const Scenario& scenario) {
  const Index n = scenario.n_objects;
  const Index fpv = scenario.features_per_view_per_family;
  const int V = static_cast<int>(scenario.views.size());
  const Index d = fpv * V;
  Rng rng(scenario.seed);

  Assignments truth;
  truth.objects.resize(V);
  for (int v = 0; v < V; ++v) {
    truth.objects[v].resize(n);
    for (Index i = 0; i < n; ++i)
      truth.objects[v][i] =
          static_cast<int>(rng.bounded(scenario.views[v].n_object_clusters));
  }

  Dataset dataset;
  dataset.object_ids.reserve(n);
  for (Index i = 0; i < n; ++i) dataset.object_ids.push_back(padded_name("obj", i));

  const char* prefixes[3] = {"gaussian", "poisson", "categorical"};
  truth.features.resize(3);
  for (int m = 0; m < 3; ++m) {
    FamilyData fam;
    fam.family.kind = m == 0   ? FamilyKind::Gaussian
                      : m == 1 ? FamilyKind::Poisson
                               : FamilyKind::Categorical;
    if (m == 2) fam.family.num_categories = 2;
    fam.values = Matrix::Zero(n, d);
    fam.observed = Matrix::Ones(n, d);
    fam.feature_names.reserve(d);
    truth.features[m].resize(d);

    for (Index j = 0; j < d; ++j) {
      fam.feature_names.push_back(padded_name(prefixes[m], j));
      const int v = static_cast<int>(j / fpv);
      const ViewSpec& view = scenario.views[v];
      const int g = static_cast<int>(rng.bounded(view.n_feature_clusters));
      truth.features[m][j] = {v, g};
      for (Index i = 0; i < n; ++i) {
        const int k = truth.objects[v][i];
        switch (fam.family.kind) {
          case FamilyKind::Gaussian:
            fam.values(i, j) = view.gaussian_mean(g, k) + view.gaussian_sd * rng.normal();
            break;
          case FamilyKind::Poisson:
            fam.values(i, j) = static_cast<double>(rng.poisson(view.poisson_rate(g, k)));
            break;
          default:
            fam.values(i, j) = rng.uniform01() < view.binary_success(g, k) ? 1.0 : 0.0;
            break;
        }
      }
    }
    dataset.families.push_back(std::move(fam));
  }

  if (scenario.missing_ratio > 0.0) {
    const std::uint64_t mask_seed =
        scenario.seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL;
    dataset = apply_missing(std::move(dataset), scenario.missing_ratio, mask_seed);
  }
  return {std::move(dataset), std::move(truth)};
}

Dataset apply_missing(Dataset dataset, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio >= 1.0)
    throw std::invalid_argument("apply_missing: ratio must be in [0, 1)");

  struct Cell {
    int family;
    Index i, j;
  };
  std::vector<Cell> observed;
  Index total_features = 0;
  for (int m = 0; m < static_cast<int>(dataset.families.size()); ++m) {
    const FamilyData& fam = dataset.families[m];
    total_features += fam.cols();
    for (Index j = 0; j < fam.cols(); ++j)
      for (Index i = 0; i < fam.rows(); ++i)
        if (fam.is_observed(i, j)) observed.push_back({m, i, j});
  }

  const auto target = static_cast<std::size_t>(ratio * static_cast<double>(observed.size()));
  if (target == 0) return dataset;
  if (target > observed.size() - static_cast<std::size_t>(total_features))
    throw std::invalid_argument(
        "apply_missing: ratio would leave a feature fully unobserved");

  Rng rng(seed);
  for (std::size_t i = observed.size() - 1; i > 0; --i)
    std::swap(observed[i], observed[rng.bounded(i + 1)]);

  // Per-feature observed counts; a draw that would empty a feature is skipped,
  // which is equivalent to rejecting and redrawing it.
  std::vector<std::vector<Index>> remaining(dataset.families.size());
  for (std::size_t m = 0; m < dataset.families.size(); ++m) {
    const FamilyData& fam = dataset.families[m];
    remaining[m].resize(fam.cols());
    for (Index j = 0; j < fam.cols(); ++j)
      remaining[m][j] = static_cast<Index>(fam.observed.col(j).sum());
  }

  std::size_t masked = 0;
  for (const Cell& cell : observed) {
    if (masked == target) break;
    if (remaining[cell.family][cell.j] < 2) continue;
    dataset.families[cell.family].observed(cell.i, cell.j) = 0.0;
    --remaining[cell.family][cell.j];
    ++masked;
  }
  if (masked != target)
    throw std::invalid_argument("apply_missing: could not place the requested masks");
  return dataset;
}

}  // namespace mcc
