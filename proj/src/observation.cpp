#include "mcc/observation.hpp"

#include <cmath>
#include <stdexcept>

#include "mcc/special.hpp"

namespace mcc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

NormalGamma gaussian_update(const WeightedSuffStats& stats, const GaussianPrior& prior) {
  if (stats.weight_sum == 0.0)
    return {prior.mu0, prior.lambda0, prior.gamma0, prior.sigma0_sq};
  NormalGamma post;
  post.lambda = prior.lambda0 + stats.weight_sum;
  post.mu = (prior.lambda0 * prior.mu0 + stats.weighted_sum) / post.lambda;
  post.gamma = prior.gamma0 + stats.weight_sum;
  post.sigma_sq = (prior.gamma0 * prior.sigma0_sq + prior.lambda0 * prior.mu0 * prior.mu0 +
                   stats.weighted_sq_sum - post.lambda * post.mu * post.mu) /
                  post.gamma;
  if (post.sigma_sq <= 0.0) {
    // Cancellation can leave a tiny negative variance; anything beyond that
    // signals degenerate inputs.
    if (post.sigma_sq <= -1e-9)
      throw std::domain_error("gaussian_update: posterior variance is negative");
    post.sigma_sq = 1e-12;
  }
  return post;
}

GammaPosterior poisson_update(const WeightedSuffStats& stats, const PoissonPrior& prior) {
  return {prior.alpha0 + stats.weighted_sum, prior.beta0 + stats.weight_sum};
}

DirichletPosterior categorical_update(const WeightedSuffStats& stats, double prior_mass,
                                      int num_categories) {
  DirichletPosterior post;
  post.rho = Vector::Constant(num_categories, prior_mass);
  if (stats.weighted_counts.size() > 0) post.rho += stats.weighted_counts;
  return post;
}

double gaussian_expected_loglik(double x, const NormalGamma& post) {
  const double dx = x - post.mu;
  return -0.5 * (dx * dx / post.sigma_sq + 1.0 / post.lambda + std::log(post.sigma_sq) +
                 std::log(0.5 * post.gamma) - digamma(0.5 * post.gamma) + kLog2Pi);
}

double poisson_expected_loglik(double x, const GammaPosterior& post) {
  return x * (digamma(post.alpha) - std::log(post.beta)) - post.alpha / post.beta -
         log_factorial(x);
}

double categorical_expected_loglik(int category, const DirichletPosterior& post) {
  return digamma(post.rho[category]) - digamma(post.rho.sum());
}

double multinomial_expected_loglik(const Vector& counts, const DirichletPosterior& post) {
  double result = log_multinomial_coef(counts);
  const double psi_sum = digamma(post.rho.sum());
  for (Index h = 0; h < counts.size(); ++h)
    result += counts[h] * (digamma(post.rho[h]) - psi_sum);
  return result;
}

double kl_normal_gamma(const NormalGamma& post, const GaussianPrior& prior) {
  return kl_normal_gamma(post.mu, post.lambda, post.gamma, post.sigma_sq,
                         prior.mu0, prior.lambda0, prior.gamma0, prior.sigma0_sq);
}

double kl_gamma(const GammaPosterior& post, const PoissonPrior& prior) {
  return kl_gamma(post.alpha, post.beta, prior.alpha0, prior.beta0);
}

double kl_dirichlet(const DirichletPosterior& post, double prior_mass) {
  return kl_dirichlet(post.rho, Vector::Constant(post.rho.size(), prior_mass));
}

}  // namespace mcc
