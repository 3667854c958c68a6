#include "mbf/wchisq.hpp"

#include <algorithm>
#include <cmath>

#include "mbf/dist.hpp"
#include "quad.hpp"

namespace mbf {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kHalfPi = 1.5707963267948966192313216916398;

// Imhof's inversion integrand for a positively weighted sum of
// independent one-degree chi-squares: coefficients lam (scaled so that
// max(lam) == 1), threshold x on the same scale.
//
//   F(x) = 1/2 - (1/pi) * Int_0^inf sin(phase(u)) * envelope(u) du
//   phase(u)    = 0.5 * sum_i atan(lam_i u) - 0.5 * x u
//   envelope(u) = 1 / (u * prod_i (1 + lam_i^2 u^2)^{1/4})
struct ImhofIntegrand {
  Vec lam;
  double x = 0.0;
  double sum_lam = 0.0;
  double min_lam = 1.0;

  double phase(double u) const {
    double s = 0.0;
    for (double l : lam) s += std::atan(l * u);
    return 0.5 * s - 0.5 * x * u;
  }

  double envelope(double u) const {
    double log_rho = 0.0;
    for (double l : lam) log_rho += std::log1p(l * l * u * u);
    return 1.0 / (u * std::exp(0.25 * log_rho));
  }

  double value(double u) const {
    if (u == 0.0) return 0.5 * (sum_lam - x);
    return std::sin(phase(u)) * envelope(u);
  }

  double dphase(double u) const {
    double s = 0.0;
    for (double l : lam) s += l / (1.0 + l * l * u * u);
    return 0.5 * s - 0.5 * x;
  }

  double d2phase(double u) const {
    double s = 0.0;
    for (double l : lam) {
      const double q = 1.0 + l * l * u * u;
      s += l * l * l * u / (q * q);
    }
    return -s;
  }

  // d/du of envelope = -envelope * (1/u + rho'/rho)
  double denvelope(double u) const {
    double rr = 0.0;
    for (double l : lam) rr += l * l * u / (1.0 + l * l * u * u);
    return -envelope(u) * (1.0 / u + 0.5 * rr);
  }
};

// Asymptotic treatment of the oscillatory tail by repeated integration
// by parts. With r0 = A/phi', g1 = r0', r1 = g1/phi', g2 = r1',
// r2 = g2/phi':
//   Int_U^inf A sin(phi) du = r0 cos(phi) - r1 sin(phi) - r2 cos(phi) - r
// evaluated at U, with |r| below |r2| once the phase derivative has
// settled. r0 is analytic; the two higher coefficients come from a
// five-point stencil on r0.
struct TailTerms {
  double correction;
  double residual_bound;
};

TailTerms tail_terms(const ImhofIntegrand& g, double u) {
  const double h = 0.005 * u;
  double r0[5];
  for (int j = -2; j <= 2; ++j) {
    const double uj = u + j * h;
    r0[j + 2] = g.envelope(uj) / g.dphase(uj);
  }
  double r1[3];
  for (int j = -1; j <= 1; ++j) {
    const double g1 = (r0[j + 3] - r0[j + 1]) / (2.0 * h);
    r1[j + 1] = g1 / g.dphase(u + j * h);
  }
  const double g2 = (r1[2] - r1[0]) / (2.0 * h);
  const double r2 = g2 / g.dphase(u);
  const double phi = g.phase(u);
  const double correction = (r0[2] - r2) * std::cos(phi) - r1[1] * std::sin(phi);
  return {correction, std::fabs(r2)};
}

double imhof_cdf(Vec lam, double t, double abs_tol, int p) {
  // normalize the scale so the largest coefficient is 1
  const double s = *std::max_element(lam.begin(), lam.end());
  for (double& l : lam) l /= s;
  ImhofIntegrand g;
  g.x = t / s;
  g.sum_lam = 0.0;
  g.min_lam = lam[0];
  for (double l : lam) {
    g.sum_lam += l;
    g.min_lam = std::min(g.min_lam, l);
  }
  g.lam = std::move(lam);

  // cheap sandwich from lam_min * chisq_p <= T <= chisq_p
  const double lower_bd = chisq_cdf(g.x, p);
  const double upper_bd = chisq_cdf(g.x / g.min_lam, p);
  if (upper_bd <= abs_tol) return 0.5 * upper_bd;
  if (lower_bd >= 1.0 - abs_tol) return 0.5 * (1.0 + lower_bd);

  const double resid_tol = 0.3 * kPi * abs_tol;

  // truncation point: past the stationary phase region, coefficients
  // mature, and the post-correction residual bound under resid_tol
  double sum_inv = 0.0;
  for (double l : g.lam) sum_inv += 1.0 / l;
  double u_max = std::max(std::sqrt(3.0 * sum_inv / g.x), 10.0 / g.min_lam);
  while (tail_terms(g, u_max).residual_bound > resid_tol && g.envelope(u_max) > 1e-12)
    u_max *= 1.4;

  // Composite Gauss panels sized to at most a half period of the
  // fastest oscillation and kept inside the integrand's analyticity
  // radius; panel error is then negligible against the truncation
  // budget.
  const double panel = std::min(2.0 * kPi / (g.x + g.sum_lam), 1.5);
  const long n_panels = static_cast<long>(std::ceil(u_max / panel));
  if (n_panels > 4000000)
    throw ConvergenceFailure("wchisq_cdf: inversion integral needs too many panels");

  static constexpr double kGlNodes[6] = {0.1252334085114689, 0.3678314989981802,
                                         0.5873179542866175, 0.7699026741943047,
                                         0.9041172563704749, 0.9815606342467192};
  static constexpr double kGlWeights[6] = {0.2491470458134028, 0.2334925365383548,
                                           0.2031674267230659, 0.1600783285433462,
                                           0.1069393259953184, 0.0471753363865118};

  double integral = 0.0;
  for (long i = 0; i < n_panels; ++i) {
    const double a = u_max * static_cast<double>(i) / static_cast<double>(n_panels);
    const double b = u_max * static_cast<double>(i + 1) / static_cast<double>(n_panels);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int j = 0; j < 6; ++j)
      acc += kGlWeights[j] * (g.value(mid - half * kGlNodes[j]) + g.value(mid + half * kGlNodes[j]));
    integral += acc * half;
  }
  integral += tail_terms(g, u_max).correction;

  const double cdf = 0.5 - integral / kPi;
  return std::min(1.0, std::max(0.0, cdf));
}

void check_theta_index(const WeightVector& w, int i) {
  if (i < 0 || i >= w.dim()) throw InvalidArgument("weight index out of range");
}

}  // namespace

WeightVector::WeightVector(Vec theta) : theta_(std::move(theta)) {
  if (theta_.empty()) throw InvalidArgument("WeightVector: needs at least one weight");
  for (double v : theta_)
    if (!(v > 0.0)) throw NonPositiveWeight("WeightVector: weights must be > 0");
}

double wchisq_cdf(double t, const WeightVector& w, double abs_tol) {
  if (t <= 0.0) return 0.0;
  Vec lam(w.theta().size());
  for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = 1.0 / w.theta()[i];
  return imhof_cdf(std::move(lam), t, abs_tol, w.dim());
}

double wchisq_cdf_p2(double t, double theta1, double theta2, double abs_tol) {
  if (!(theta1 > 0.0) || !(theta2 > 0.0)) throw NonPositiveWeight("wchisq_cdf_p2: weights must be > 0");
  if (t <= 0.0) return 0.0;
  // F(t) = 4 Int_0^{sqrt(th2 t)} Phi(sqrt(th1 (t - s^2/th2))) phi(s) ds
  //        - 2 Phi(sqrt(th2 t)) + 1,
  // evaluated after s = sqrt(th2 t) sin(rho), which removes the
  // square-root endpoint.
  const double r1 = std::sqrt(theta1 * t);
  const double r2 = std::sqrt(theta2 * t);
  const auto integrand = [&](double rho) {
    const double c = std::cos(rho);
    return normal_cdf(r1 * c) * normal_pdf(r2 * std::sin(rho)) * r2 * c;
  };
  const double integral = detail::adaptive_simpson(integrand, 0.0, kHalfPi, 0.25 * abs_tol, 40);
  const double cdf = 4.0 * integral - 2.0 * normal_cdf(r2) + 1.0;
  return std::min(1.0, std::max(0.0, cdf));
}

double wchisq_cdf_dtheta(double t, const WeightVector& w, int i) {
  check_theta_index(w, i);
  if (!(t > 0.0)) throw DomainError("wchisq_cdf_dtheta: t must be > 0");
  const double theta_i = w.theta()[i];
  const double h = 1e-4 * theta_i;
  if (theta_i + h == theta_i || theta_i - h <= 0.0)
    throw StepUnderflow("wchisq_cdf_dtheta: finite-difference step degenerated");
  const auto cdf_at = [&](double th) {
    Vec v = w.theta();
    v[i] = th;
    return wchisq_cdf(t, WeightVector(std::move(v)), 1e-12);
  };
  const auto central = [&](double step) {
    return (cdf_at(theta_i + step) - cdf_at(theta_i - step)) / (2.0 * step);
  };
  const double d_full = central(h);
  const double d_half = central(0.5 * h);
  return (4.0 * d_half - d_full) / 3.0;
}

double wchisq_cdf_d2theta(double t, const WeightVector& w, int i) {
  check_theta_index(w, i);
  if (!(t > 0.0)) throw DomainError("wchisq_cdf_d2theta: t must be > 0");
  const double theta_i = w.theta()[i];
  const double h = 1e-3 * theta_i;
  if (theta_i + h == theta_i || theta_i - h <= 0.0)
    throw StepUnderflow("wchisq_cdf_d2theta: finite-difference step degenerated");
  const auto cdf_at = [&](double th) {
    Vec v = w.theta();
    v[i] = th;
    return wchisq_cdf(t, WeightVector(std::move(v)), 1e-12);
  };
  const double f0 = cdf_at(theta_i);
  const auto second = [&](double step) {
    return (cdf_at(theta_i + step) - 2.0 * f0 + cdf_at(theta_i - step)) / (step * step);
  };
  const double s_full = second(h);
  const double s_half = second(0.5 * h);
  return (4.0 * s_half - s_full) / 3.0;
}

double wchisq_cdf_p2_dtheta1(double t, double theta1, double theta2, double abs_tol) {
  if (!(theta1 > 0.0) || !(theta2 > 0.0))
    throw NonPositiveWeight("wchisq_cdf_p2_dtheta1: weights must be > 0");
  if (!(t > 0.0)) throw DomainError("wchisq_cdf_p2_dtheta1: t must be > 0");
  // dF/dth1 = t sqrt(th2/th1) / pi *
  //           Int_0^{pi/2} cos^2(rho) exp(-th1 t cos^2/2 - th2 t sin^2/2) drho
  const auto integrand = [&](double rho) {
    const double c = std::cos(rho);
    const double s = std::sin(rho);
    return c * c * std::exp(-0.5 * t * (theta1 * c * c + theta2 * s * s));
  };
  const double integral = detail::adaptive_simpson(integrand, 0.0, kHalfPi, abs_tol, 40);
  return t * std::sqrt(theta2 / theta1) / kPi * integral;
}

double wchisq_cdf_p2_d2theta1(double t, double theta1, double theta2, double abs_tol) {
  if (!(theta1 > 0.0) || !(theta2 > 0.0))
    throw NonPositiveWeight("wchisq_cdf_p2_d2theta1: weights must be > 0");
  if (!(t > 0.0)) throw DomainError("wchisq_cdf_p2_d2theta1: t must be > 0");
  // second derivative of the bivariate CDF in theta1, with the same
  // sin substitution; g = t cos^2(rho)
  const double r1 = std::sqrt(theta1 * t);
  const double r2 = std::sqrt(theta2 * t);
  const auto integrand = [&](double rho) {
    const double c = std::cos(rho);
    const double s = std::sin(rho);
    const double galt = t * c * c;
    const double weight = std::pow(galt, 1.5) / std::sqrt(theta1) +
                          std::sqrt(galt) / (theta1 * std::sqrt(theta1));
    return weight * normal_pdf(r1 * c) * normal_pdf(r2 * s) * r2 * c;
  };
  const double integral = detail::adaptive_simpson(integrand, 0.0, kHalfPi, abs_tol, 40);
  return -integral;
}

LambdaPath::LambdaPath(SpdMatrix m1, SpdMatrix m2, double t)
    : m1_(std::move(m1)), m2_(std::move(m2)), t_(t) {
  if (m1_.dim() != m2_.dim()) throw DimensionMismatch("LambdaPath: dimensions differ");
  if (!(t_ > 0.0)) throw DomainError("LambdaPath: threshold must be > 0");
  cholesky(m1_);
  cholesky(m2_);
}

double blend_cdf(double lambda, const LambdaPath& path, double abs_tol) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("blend_cdf: lambda must be in [0, 1]");
  const SpdMatrix m = mat_add_scaled(path.m1(), lambda, path.m2(), 1.0 - lambda);
  const EigenDecomp eig = sym_eigen(m);
  return wchisq_cdf(path.t(), WeightVector(eig.values), abs_tol);
}

Vec eigen_cumsum(const LambdaPath& path, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("eigen_cumsum: lambda must be in [0, 1]");
  const SpdMatrix m = mat_add_scaled(path.m1(), lambda, path.m2(), 1.0 - lambda);
  const EigenDecomp eig = sym_eigen(m);
  const int p = path.dim();
  Vec out(p);
  double acc = 0.0;
  for (int i = p - 1; i >= 0; --i) {
    acc += eig.values[i];
    out[i] = acc;
  }
  return out;
}

}  // namespace mbf
