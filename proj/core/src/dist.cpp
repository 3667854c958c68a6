#include "mbf/dist.hpp"

#include <cmath>
#include <limits>

namespace mbf {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Series expansion of P(a,x), valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw ConvergenceFailure("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(a,x), for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int n = 1; n <= 10000; ++n) {
    const double an = -n * (n - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw ConvergenceFailure("incomplete gamma continued fraction did not converge");
}

// Lentz continued fraction for the incomplete beta; tolerance 1e-14.
// The 300-iteration cap assumes the caller picked the convergent branch
// (x below the (a+1)/(a+b+2) crossover).
double incbeta_cf(double x, double a, double b) {
  const double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    // even step
    double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    // odd step
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-14) return h;
  }
  throw ConvergenceFailure("incomplete beta continued fraction did not converge");
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma_p: a must be > 0");
  if (x < 0.0) throw DomainError("regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta: a, b must be > 0");
  if (x < 0.0 || x > 1.0) throw DomainError("incomplete beta: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * incbeta_cf(x, a, b) / a;
  return 1.0 - front * incbeta_cf(1.0 - x, b, a) / b;
}

double chisq_cdf(double t, double k) {
  if (!(k > 0.0)) throw DomainError("chisq_cdf: df must be > 0");
  if (t < 0.0) throw DomainError("chisq_cdf: t must be >= 0");
  return regularized_gamma_p(0.5 * k, 0.5 * t);
}

double f_cdf(double x, FParams fp) {
  if (!(fp.d1 > 0.0) || !(fp.d2 > 0.0)) throw DomainError("f_cdf: degrees of freedom must be > 0");
  if (x < 0.0) throw DomainError("f_cdf: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double y = fp.d1 * x / (fp.d1 * x + fp.d2);
  return regularized_incomplete_beta(y, 0.5 * fp.d1, 0.5 * fp.d2);
}

double f_pdf(double x, FParams fp) {
  if (!(fp.d1 > 0.0) || !(fp.d2 > 0.0)) throw DomainError("f_pdf: degrees of freedom must be > 0");
  if (x < 0.0) throw DomainError("f_pdf: x must be >= 0");
  if (x == 0.0) return fp.d1 < 2.0   ? std::numeric_limits<double>::infinity()
                : fp.d1 == 2.0 ? 1.0
                               : 0.0;
  const double a = 0.5 * fp.d1;
  const double b = 0.5 * fp.d2;
  const double log_pdf = a * std::log(fp.d1 / fp.d2) + (a - 1.0) * std::log(x) -
                         (a + b) * std::log1p(fp.d1 * x / fp.d2) - log_beta(a, b);
  return std::exp(log_pdf);
}

double f_quantile(double q, FParams fp) {
  if (!(q > 0.0) || !(q < 1.0)) throw DomainError("f_quantile: q must be in (0, 1)");

  double lo = 0.0;
  double hi = 1.0;
  while (f_cdf(hi, fp) < q) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceFailure("f_quantile: bracket expansion failed");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_cdf(mid, fp) < q)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 6; ++it) {
    const double err = f_cdf(x, fp) - q;
    const double dens = f_pdf(x, fp);
    if (!(dens > 0.0) || !std::isfinite(dens)) break;
    const double step = err / dens;
    const double next = x - step;
    if (!(next > lo) || !(next < hi)) break;
    x = next;
    if (std::fabs(step) < 1e-13 * std::max(1.0, x)) break;
  }
  return x;
}

}  // namespace mbf
