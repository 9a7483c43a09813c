#include "mcc/special.hpp"

#include <cmath>
#include <stdexcept>

namespace mcc {

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  // Shift the argument above 10 with psi(x) = psi(x+1) - 1/x, then apply the
  // asymptotic series psi(x) = ln x - 1/(2x) - sum_k B_2k / (2k x^2k).
  long double shift = 0.0L;
  long double y = x;
  while (y < 10.0L) {
    shift -= 1.0L / y;
    y += 1.0L;
  }
  const long double inv = 1.0L / y;
  const long double z = inv * inv;
  const long double series =
      z * (1.0L / 12 -
           z * (1.0L / 120 -
                z * (1.0L / 252 -
                     z * (1.0L / 240 -
                          z * (1.0L / 132 -
                               z * (691.0L / 32760 - z * (1.0L / 12)))))));
  return static_cast<double>(shift + std::log(y) - 0.5L * inv - series);
}

Array digamma(const Array& x) {
  return x.unaryExpr([](double v) { return digamma(v); });
}

ArrayXX digamma(const ArrayXX& x) {
  return x.unaryExpr([](double v) { return digamma(v); });
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_factorial(double n) { return std::lgamma(n + 1.0); }

double log_multinomial_coef(const Vector& counts) {
  double total = counts.sum();
  double result = log_factorial(total);
  for (Index h = 0; h < counts.size(); ++h) result -= log_factorial(counts[h]);
  return result;
}

double kl_beta(double a1, double b1, double a0, double b0) {
  return log_beta(a0, b0) - log_beta(a1, b1) + (a1 - a0) * digamma(a1) +
         (b1 - b0) * digamma(b1) + (a0 - a1 + b0 - b1) * digamma(a1 + b1);
}

double kl_gamma(double a1, double b1, double a0, double b0) {
  return (a1 - a0) * digamma(a1) - std::lgamma(a1) + std::lgamma(a0) +
         a0 * (std::log(b1) - std::log(b0)) + a1 * (b0 - b1) / b1;
}

double kl_dirichlet(const Vector& rho1, const Vector& rho0) {
  if (rho1.size() != rho0.size())
    throw std::invalid_argument("kl_dirichlet: dimension mismatch");
  const double sum1 = rho1.sum();
  const double psi_sum1 = digamma(sum1);
  double result = std::lgamma(sum1) - std::lgamma(rho0.sum());
  for (Index h = 0; h < rho1.size(); ++h) {
    result += std::lgamma(rho0[h]) - std::lgamma(rho1[h]) +
              (rho1[h] - rho0[h]) * (digamma(rho1[h]) - psi_sum1);
  }
  return result;
}

double kl_normal_gamma(double mu1, double lambda1, double gamma1, double sigma_sq1,
                       double mu0, double lambda0, double gamma0, double sigma_sq0) {
  // Precision part plus the conditional normal part, with the expectations
  // E[s] = 1/sigma_sq1 and E[log s] absorbed by cancellation.
  const double kl_precision = kl_gamma(0.5 * gamma1, 0.5 * gamma1 * sigma_sq1,
                                       0.5 * gamma0, 0.5 * gamma0 * sigma_sq0);
  const double dm = mu1 - mu0;
  return kl_precision + 0.5 * std::log(lambda1 / lambda0) - 0.5 +
         0.5 * lambda0 * (dm * dm / sigma_sq1 + 1.0 / lambda1);
}

}  // namespace mcc
