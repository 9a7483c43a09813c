#pragma once

#include <string>
#include <vector>

#include "mcc/types.hpp"

namespace mcc {

enum class FamilyKind { Gaussian, Poisson, Categorical, Multinomial };

const char* family_name(FamilyKind kind);

struct FeatureFamily {
  FamilyKind kind = FamilyKind::Gaussian;
  int num_categories = 0;  // H, used by Categorical and Multinomial only

  bool operator==(const FeatureFamily&) const = default;
};

// One homogeneous block of columns. Cell (i, j) is observed iff
// observed(i, j) == 1. Multinomial cells are count vectors of length H,
// stored as one n x d matrix per category; `values` is unused for them.
struct FamilyData {
  FeatureFamily family;
  Matrix values;               // n x d
  std::vector<Matrix> counts;  // Multinomial only: H matrices, each n x d
  Matrix observed;             // n x d, entries 0 or 1
  std::vector<std::string> feature_names;

  Index rows() const { return observed.rows(); }
  Index cols() const { return observed.cols(); }
  bool is_observed(Index i, Index j) const { return observed(i, j) == 1.0; }
};

struct Dataset {
  std::vector<FamilyData> families;
  std::vector<std::string> object_ids;

  Index n_objects() const { return static_cast<Index>(object_ids.size()); }
  Index n_features() const;
};

struct GaussianPrior {
  double mu0 = 0.0;
  double lambda0 = 1e-4;
  double gamma0 = 1.0;
  double sigma0_sq = 1e4;
};

struct PoissonPrior {
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

// Truncation levels and hyperparameters of the variational family.
struct TruncationConfig {
  int views = 10;             // V
  int feature_clusters = 10;  // G
  int object_clusters = 10;   // K
  double alpha1 = 1.0;        // view stick concentration
  double alpha2 = 1.0;        // feature stick concentration
  double beta = 1.0;          // object stick concentration
  GaussianPrior gaussian_prior;
  PoissonPrior poisson_prior;
  double dirichlet_prior_mass = 1.0;  // symmetric Dirichlet pseudo-count
};

struct FeatureAssignment {
  int view = 0;
  int cluster = 0;
  bool operator==(const FeatureAssignment&) const = default;
};

// Hard co-clustering: a (view, feature cluster) per feature and, for every
// view, an object cluster per object.
struct Assignments {
  std::vector<std::vector<FeatureAssignment>> features;  // [family][column]
  std::vector<std::vector<int>> objects;                 // [view][object]
};

struct Violation {
  int family = -1;  // index into Dataset::families, -1 for dataset-level issues
  Index feature = -1;
  Index row = -1;
  std::string reason;
};

// Structural and value checks; an empty result means the dataset is valid.
std::vector<Violation> validate(const Dataset& dataset);

// Centers and scales every observed Gaussian column to mean 0, variance 1
// (population variance). Columns whose observed values are all equal are set
// to zero. Other families and masks are returned unchanged.
Dataset standardize_gaussian(Dataset dataset);

}  // namespace mcc
