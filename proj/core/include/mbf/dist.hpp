#pragma once

#include "mbf/errors.hpp"

namespace mbf {

// Degrees of freedom of an F distribution; both must be > 0 (fractional
// values are allowed, the approximate-df tests produce them).
struct FParams {
  double d1;
  double d2;
};

double normal_pdf(double x);
double normal_cdf(double x);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

double chisq_cdf(double t, double k);
double f_cdf(double x, FParams fp);
double f_pdf(double x, FParams fp);
// Inverse of f_cdf for 0 < q < 1, bracketed bisection + Newton polish.
double f_quantile(double q, FParams fp);

}  // namespace mbf
