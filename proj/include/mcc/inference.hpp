#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/observation.hpp"
#include "mcc/types.hpp"

namespace mcc {

enum class ModelMode { Full, CoClustering, Restricted };

ModelMode model_mode(const TruncationConfig& config);
const char* mode_name(ModelMode mode);

// Per-family matrices precomputed for the matrix-product form of the update
// equations. Unobserved cells are zeroed so they drop out of every product;
// the mask carries the indicator.
struct PreparedFamily {
  FeatureFamily family;
  std::vector<std::string> feature_names;
  Matrix mask;              // n x d, 1 observed / 0 masked
  Matrix x;                 // masked values (Gaussian, Poisson)
  Matrix xsq;               // masked squared values (Gaussian)
  Matrix logfact;           // masked log(x!) (Poisson)
  std::vector<Matrix> cat;  // masked per-category counts (Categorical, Multinomial)
  Matrix cat_total;         // masked per-cell totals: the mask for Categorical,
                            // summed counts for Multinomial
  Matrix logcoef;           // masked log multinomial coefficients (Multinomial)

  Index cols() const { return mask.cols(); }
};

struct PreparedData {
  explicit PreparedData(const Dataset& dataset);

  std::vector<PreparedFamily> families;
  std::vector<std::string> object_ids;
  Index n = 0;
  Index total_features = 0;
};

// Beta(a_t, b_t) parameters of a stick collection.
struct StickSet {
  Array a, b;
};

// Block posteriors stored per view as G x K arrays, one per hyperparameter.
struct GaussianBlocks {
  std::vector<ArrayXX> mu, lambda, gamma, sigma_sq;  // [view]
};
struct PoissonBlocks {
  std::vector<ArrayXX> alpha, beta;  // [view]
};
struct DirichletBlocks {
  std::vector<std::vector<ArrayXX>> rho;  // [view][category]
};
using FamilyBlocks = std::variant<GaussianBlocks, PoissonBlocks, DirichletBlocks>;

struct VariationalState {
  // Feature responsibilities per family: d x (V*G), column v*G + g.
  std::vector<Matrix> tau;
  // Object responsibilities per view: n x K.
  std::vector<Matrix> eta;
  StickSet view_sticks;                                    // V entries
  std::vector<ArrayXX> feature_stick_a, feature_stick_b;  // [family], G x V
  ArrayXX object_stick_a, object_stick_b;                 // K x V
  std::vector<FamilyBlocks> blocks;                       // [family]

  int num_views() const { return static_cast<int>(view_sticks.a.size()); }
  int num_feature_clusters() const {
    return feature_stick_a.empty() ? 0 : static_cast<int>(feature_stick_a[0].rows());
  }
  int num_object_clusters() const { return static_cast<int>(object_stick_a.rows()); }
};

VariationalState init_state(const PreparedData& data, const TruncationConfig& config,
                            std::uint64_t seed);

void update_block_posteriors(VariationalState& state, const PreparedData& data,
                             const TruncationConfig& config);
void update_view_sticks(VariationalState& state, const TruncationConfig& config);
void update_feature_sticks(VariationalState& state, const TruncationConfig& config);
void update_object_sticks(VariationalState& state, const TruncationConfig& config);
void update_feature_responsibilities(VariationalState& state, const PreparedData& data);
void update_object_responsibilities(VariationalState& state, const PreparedData& data);

// Additive decomposition of the variational lower bound.
struct ElboTerms {
  double data = 0;
  double feature_prior = 0;   // E[log p(Y | w, w')]
  double feature_entropy = 0; // -E[log q(Y)]
  double object_prior = 0;    // E[log p(Z | u)]
  double object_entropy = 0;  // -E[log q(Z)]
  double kl_view_sticks = 0;
  double kl_feature_sticks = 0;
  double kl_object_sticks = 0;
  double kl_blocks = 0;

  double total() const {
    return data + feature_prior + feature_entropy + object_prior + object_entropy -
           kl_view_sticks - kl_feature_sticks - kl_object_sticks - kl_blocks;
  }
};

ElboTerms elbo_terms(const VariationalState& state, const PreparedData& data,
                     const TruncationConfig& config);
double compute_elbo(const VariationalState& state, const PreparedData& data,
                    const TruncationConfig& config);

struct FitOptions {
  double tol = 1e-6;
  int max_iters = 500;
  int restarts = 100;
  std::uint64_t base_seed = 0;
  int threads = 1;
};

struct ClusteringResult {
  Assignments assignments;
  double elbo = 0.0;
  std::vector<double> elbo_trace;
  int active_views = 0;
  std::vector<int> active_object_clusters;  // per view, counted over MAP labels
  std::uint64_t seed = 0;
  int iterations = 0;
};

// Responsibilities became non-finite; the restart is abandoned.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(int iteration, std::uint64_t seed);
  int iteration() const { return iteration_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int iteration_;
  std::uint64_t seed_;
};

// Every restart of a fit aborted; carries the per-seed diagnostics.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& message) : std::runtime_error(message) {}
};

Assignments map_assignments(const VariationalState& state);

ClusteringResult fit_single(const PreparedData& data, const TruncationConfig& config,
                            std::uint64_t seed, const FitOptions& options = {});
ClusteringResult fit_single(const Dataset& dataset, const TruncationConfig& config,
                            std::uint64_t seed, const FitOptions& options = {});

// Best-ELBO selection over options.restarts runs with seeds
// base_seed .. base_seed + restarts - 1; deterministic for any thread count.
ClusteringResult fit(const Dataset& dataset, const TruncationConfig& config,
                     const FitOptions& options);

}  // namespace mcc
