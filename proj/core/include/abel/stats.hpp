#pragma once

#include <Eigen/Core>

#include "abel/errors.hpp"
#include "abel/rng.hpp"

namespace abel {

// Regularized lower incomplete gamma P(a, x); absolute error below 1e-12.
double gamma_p(double a, double x);

// Chi-square CDF with df degrees of freedom: P(df/2, x/2).
// Throws DomainError for x < 0 or df < 1.
double chi2_cdf(int df, double x);

// Inverse chi-square CDF by bracketed bisection refined until
// |chi2_cdf(df, result) - p| <= 1e-10. Throws DomainError for p outside
// (0, 1) or df < 1.
double chi2_quantile(int df, double p);

// Stationary AR(1) sample: x_{i+1} = rho * x_i + eps_{i+1} with iid
// standard normal innovations per component and x_1 drawn from the
// stationary law N(0, 1/(1 - rho^2)). Rows are time, columns components;
// generation order is row-major so output is reproducible for a fixed
// generator state. Throws DomainError when |rho| >= 1.
Eigen::MatrixXd ar1_simulate(std::size_t n, std::size_t d, double rho, Philox& rng);

} // namespace abel
