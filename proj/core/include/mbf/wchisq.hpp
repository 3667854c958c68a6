#pragma once

#include "mbf/matrix.hpp"

namespace mbf {

// Positive weights theta of the distribution sum_i Z_i^2 / theta_i,
// Z_i iid standard normal.
class WeightVector {
 public:
  explicit WeightVector(Vec theta);
  const Vec& theta() const { return theta_; }
  int dim() const { return static_cast<int>(theta_.size()); }

 private:
  Vec theta_;
};

// Distribution function of sum_i Z_i^2 / theta_i at t, by numerical
// inversion of the characteristic function (Imhof). Absolute accuracy
// abs_tol.
double wchisq_cdf(double t, const WeightVector& w, double abs_tol = 1e-9);

// Two-component case through the direct bivariate integral; independent
// of the characteristic-function path.
double wchisq_cdf_p2(double t, double theta1, double theta2, double abs_tol = 1e-10);

// Partial derivatives of the CDF in theta_i, central differences with
// one Richardson step (relative steps 1e-4 and 1e-3).
double wchisq_cdf_dtheta(double t, const WeightVector& w, int i);
double wchisq_cdf_d2theta(double t, const WeightVector& w, int i);

// Closed-form derivative integrals for the two-component case.
double wchisq_cdf_p2_dtheta1(double t, double theta1, double theta2, double abs_tol = 1e-12);
double wchisq_cdf_p2_d2theta1(double t, double theta1, double theta2, double abs_tol = 1e-12);

// Convex path between two SPD matrices with a fixed threshold t.
class LambdaPath {
 public:
  LambdaPath(SpdMatrix m1, SpdMatrix m2, double t);
  const SpdMatrix& m1() const { return m1_; }
  const SpdMatrix& m2() const { return m2_; }
  double t() const { return t_; }
  int dim() const { return m1_.dim(); }

 private:
  SpdMatrix m1_;
  SpdMatrix m2_;
  double t_;
};

// P(Z^T M(lambda)^{-1} Z <= t) with M(lambda) = lambda m1 + (1-lambda) m2:
// eigendecompose M(lambda) and evaluate the weighted chi-square CDF at
// its eigenvalues.
double blend_cdf(double lambda, const LambdaPath& path, double abs_tol = 1e-9);

// Cumulative sums of the descending eigenvalues of M(lambda), taken from
// the bottom: out[i] = d_{i+1} + ... + d_p (0-based i). out[0] is the
// trace, out[p-1] the smallest eigenvalue.
Vec eigen_cumsum(const LambdaPath& path, double lambda);

}  // namespace mbf
