#pragma once

#include "mcc/types.hpp"

namespace mcc {

// Digamma function, accurate to better than 1e-10 over [1e-4, 1e6].
double digamma(double x);

Array digamma(const Array& x);
ArrayXX digamma(const ArrayXX& x);

double log_beta(double a, double b);
double log_factorial(double n);
double log_multinomial_coef(const Vector& counts);

// KL(Beta(a1,b1) || Beta(a0,b0))
double kl_beta(double a1, double b1, double a0, double b0);

// KL(Gamma(a1,b1) || Gamma(a0,b0)), shape/rate parameterization
double kl_gamma(double a1, double b1, double a0, double b0);

// KL(Dir(rho1) || Dir(rho0))
double kl_dirichlet(const Vector& rho1, const Vector& rho0);

// KL between normal-gamma distributions over (mean, precision), parameterized
// by (mu, lambda, gamma, sigma_sq): precision s ~ Gamma(gamma/2, gamma*sigma_sq/2)
// and mean | s ~ Normal(mu, 1/(lambda*s)).
double kl_normal_gamma(double mu1, double lambda1, double gamma1, double sigma_sq1,
                       double mu0, double lambda0, double gamma0, double sigma_sq0);

}  // namespace mcc
