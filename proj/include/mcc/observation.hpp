#pragma once

#include "mcc/dataset.hpp"
#include "mcc/types.hpp"

namespace mcc {

// Responsibility-weighted sufficient statistics of one block, accumulated
// over observed cells only.
struct WeightedSuffStats {
  double weight_sum = 0.0;
  double weighted_sum = 0.0;
  double weighted_sq_sum = 0.0;  // Gaussian
  Vector weighted_counts;        // Categorical / Multinomial, length H

  void add(double weight, double value) {
    weight_sum += weight;
    weighted_sum += weight * value;
    weighted_sq_sum += weight * value * value;
  }
};

// Normal-gamma posterior over a Gaussian block's (mean, precision):
// s ~ Gamma(gamma/2, gamma*sigma_sq/2), mean | s ~ Normal(mu, 1/(lambda*s)).
struct NormalGamma {
  double mu = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double sigma_sq = 0.0;
};

// Gamma posterior (shape/rate) over a Poisson block's rate.
struct GammaPosterior {
  double alpha = 0.0;
  double beta = 0.0;
};

struct DirichletPosterior {
  Vector rho;
};

NormalGamma gaussian_update(const WeightedSuffStats& stats, const GaussianPrior& prior);
GammaPosterior poisson_update(const WeightedSuffStats& stats, const PoissonPrior& prior);
DirichletPosterior categorical_update(const WeightedSuffStats& stats, double prior_mass,
                                      int num_categories);

// E[log p(x | parameters)] under the block posterior.
double gaussian_expected_loglik(double x, const NormalGamma& post);
double poisson_expected_loglik(double x, const GammaPosterior& post);
double categorical_expected_loglik(int category, const DirichletPosterior& post);
double multinomial_expected_loglik(const Vector& counts, const DirichletPosterior& post);

double kl_normal_gamma(const NormalGamma& post, const GaussianPrior& prior);
double kl_gamma(const GammaPosterior& post, const PoissonPrior& prior);
double kl_dirichlet(const DirichletPosterior& post, double prior_mass);

}  // namespace mcc
