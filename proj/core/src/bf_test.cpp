#include "mbf/bf_test.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace mbf {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

SpdMatrix sample_covariance(const Matrix& obs, const Vec& mean, const char* which) {
  const int n = obs.rows();
  const int p = obs.cols();
  SpdMatrix s(p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) acc += (obs(r, a) - mean[a]) * (obs(r, b) - mean[b]);
      s.set(a, b, acc / (n - 1));
    }
  }
  try {
    cholesky(s);
  } catch (const NotPositiveDefinite&) {
    throw RankDeficientSample(std::string("summarize: sample covariance of ") + which +
                              " is not positive definite");
  }
  return s;
}

Vec column_means(const Matrix& obs) {
  Vec mean(obs.cols(), 0.0);
  for (int r = 0; r < obs.rows(); ++r)
    for (int j = 0; j < obs.cols(); ++j) mean[j] += obs(r, j);
  for (double& v : mean) v /= obs.rows();
  return mean;
}

// Per-sample covariance scaled by its sample size, and shared solves.
struct ScaledParts {
  int p;
  SpdMatrix st1;   // S1 / m
  SpdMatrix st2;   // S2 / n
  SpdMatrix st;    // st1 + st2
  CholeskyFactor st_chol;
};

ScaledParts scaled_parts(const SampleSummary& s) {
  SpdMatrix st1 = scaled(s.s1, 1.0 / s.m);
  SpdMatrix st2 = scaled(s.s2, 1.0 / s.n);
  SpdMatrix st = mat_add_scaled(st1, 1.0, st2, 1.0);
  CholeskyFactor chol = cholesky(st);
  return {st.dim(), std::move(st1), std::move(st2), std::move(st), std::move(chol)};
}

double quad_with(const SpdMatrix& mid, const Vec& u) {
  double acc = 0.0;
  for (int i = 0; i < mid.dim(); ++i)
    for (int j = 0; j < mid.dim(); ++j) acc += u[i] * mid(i, j) * u[j];
  return acc;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::FBound: return "FBound";
    case Method::Yao: return "Yao";
    case Method::Johansen: return "Johansen";
    case Method::NelVanDerMerwe: return "NelVanDerMerwe";
    case Method::KrishnamoorthyYu: return "KrishnamoorthyYu";
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "fbound" || lower == "f-bound") return Method::FBound;
  if (lower == "yao") return Method::Yao;
  if (lower == "johansen") return Method::Johansen;
  if (lower == "nvdm" || lower == "nelvandermerwe" || lower == "nel-van-der-merwe")
    return Method::NelVanDerMerwe;
  if (lower == "ky" || lower == "krishnamoorthyyu" || lower == "krishnamoorthy-yu")
    return Method::KrishnamoorthyYu;
  return std::nullopt;
}

SampleSummary summarize(const TwoSampleData& data) {
  const int p = data.x.cols();
  if (data.y.cols() != p) throw DimensionMismatch("summarize: samples have different dimensions");
  if (p < 1) throw DimensionMismatch("summarize: dimension must be >= 1");
  const int m = data.x.rows();
  const int n = data.y.rows();
  if (m <= p || n <= p)
    throw DimensionMismatch("summarize: each sample needs more observations than dimensions");

  SampleSummary out{m, n, Vec(p), SpdMatrix(p), SpdMatrix(p)};
  const Vec mean_x = column_means(data.x);
  const Vec mean_y = column_means(data.y);
  for (int j = 0; j < p; ++j) out.mean_diff[j] = mean_x[j] - mean_y[j];
  out.s1 = sample_covariance(data.x, mean_x, "sample 1");
  out.s2 = sample_covariance(data.y, mean_y, "sample 2");
  return out;
}

double t2_statistic(const SampleSummary& s) {
  const SpdMatrix mid = mat_add_scaled(s.s1, 1.0 / s.m, s.s2, 1.0 / s.n);
  return quad_form_inv(s.mean_diff, mid);
}

double t2_statistic(const TwoSampleData& data) { return t2_statistic(summarize(data)); }

double lambda_from_k(double k, int m, int n) {
  if (!(k > 0.0)) throw NonPositiveK("lambda_from_k: k must be > 0");
  if (m < 1 || n < 1) throw InvalidArgument("lambda_from_k: sample sizes must be >= 1");
  return 1.0 / (1.0 + k * static_cast<double>(m) / static_cast<double>(n));
}

double sample_canonical_t2(const CanonicalParams& params, RngStream& stream) {
  if (!(params.lambda >= 0.0 && params.lambda <= 1.0))
    throw DomainError("sample_canonical_t2: lambda must be in [0, 1]");
  if (params.p < 1 || params.p >= std::min(params.m, params.n))
    throw DimensionTooLarge("sample_canonical_t2: requires p < min(m, n)");
  const int p = params.p;
  const SpdMatrix eye = SpdMatrix::identity(p);
  const Vec z = sample_normal_vec(stream, p);
  const SpdMatrix w1 = sample_wishart(stream, eye, params.m - 1);
  const SpdMatrix w2 = sample_wishart(stream, eye, params.n - 1);
  const SpdMatrix mid = mat_add_scaled(w1, params.lambda / (params.m - 1), w2,
                                       (1.0 - params.lambda) / (params.n - 1));
  return quad_form_inv(z, mid);
}

BoundPair bound_cdfs(double t, int p, int m, int n) {
  const int mn = std::min(m, n);
  if (p < 1) throw DimensionMismatch("bound_cdfs: p must be >= 1");
  if (p >= mn) throw DimensionTooLarge("bound_cdfs: requires p < min(m, n)");
  if (t < 0.0) throw DomainError("bound_cdfs: t must be >= 0");
  const double lower =
      f_cdf(t * (mn - p) / (static_cast<double>(p) * (mn - 1)), FParams{static_cast<double>(p),
                                                                        static_cast<double>(mn - p)});
  const double df2 = static_cast<double>(m + n - p - 1);
  const double upper =
      f_cdf(t * df2 / (static_cast<double>(p) * (m + n - 2)), FParams{static_cast<double>(p), df2});
  return {lower, upper};
}

double fbound_pvalue(double t2, int p, int m, int n) {
  return 1.0 - bound_cdfs(t2, p, m, n).lower;
}

FTransform hotelling_f_transform(int p, int n) {
  if (p < 1) throw DimensionMismatch("hotelling_f_transform: p must be >= 1");
  if (n < p) throw DfTooSmall("hotelling_f_transform: requires n >= p");
  const double den_df = static_cast<double>(n - p + 1);
  return {static_cast<double>(n) * p / den_df, FParams{static_cast<double>(p), den_df}};
}

double yao_df(const SampleSummary& s) {
  const ScaledParts parts = scaled_parts(s);
  const Vec u = parts.st_chol.solve(s.mean_diff);
  double denom = 0.0;
  for (int i = 0; i < parts.p; ++i) denom += s.mean_diff[i] * u[i];
  if (!(denom > 0.0)) throw DegenerateStatistic("yao_df: zero mean difference");
  const double w1 = quad_with(parts.st1, u) / denom;
  const double w2 = quad_with(parts.st2, u) / denom;
  const double inv_nu = w1 * w1 / (s.m - 1) + w2 * w2 / (s.n - 1);
  return 1.0 / inv_nu;
}

// Welch-James form: with weights W_i = st_i^{-1} and W = W_1 + W_2, the
// two-sample identity (W^{-1} W_i = st_other st^{-1}) turns the
// correction terms into each sample's own share st_i st^{-1} over its
// own degrees of freedom, which is what reduces to the Welch df at p=1.
JohansenParams johansen_params(const SampleSummary& s) {
  const ScaledParts parts = scaled_parts(s);
  const double p = parts.p;
  double a_sum = 0.0;
  const int sizes[2] = {s.m, s.n};
  const SpdMatrix* mats[2] = {&parts.st1, &parts.st2};
  for (int i = 0; i < 2; ++i) {
    const Matrix b = parts.st_chol.solve_matrix(mats[i]->to_matrix());  // st^{-1} st_i
    const double tr = trace(b);
    const double tr2 = trace_product(b, b);
    a_sum += (tr2 + tr * tr) / (2.0 * (sizes[i] - 1));
  }
  const double c = p + 2.0 * a_sum - 6.0 * a_sum / (p * (p - 1.0) + 2.0);
  const double nu = p * (p + 2.0) / (3.0 * a_sum);
  return {c, nu};
}

double nvdm_df(const SampleSummary& s) {
  const ScaledParts parts = scaled_parts(s);
  const double num = trace_product(parts.st, parts.st) + trace(parts.st) * trace(parts.st);
  const double den1 = trace_product(parts.st1, parts.st1) + trace(parts.st1) * trace(parts.st1);
  const double den2 = trace_product(parts.st2, parts.st2) + trace(parts.st2) * trace(parts.st2);
  return num / (den1 / (s.m - 1) + den2 / (s.n - 1));
}

double ky_df(const SampleSummary& s) {
  const ScaledParts parts = scaled_parts(s);
  const double p = parts.p;
  double den = 0.0;
  const int sizes[2] = {s.m, s.n};
  const SpdMatrix* mats[2] = {&parts.st1, &parts.st2};
  for (int i = 0; i < 2; ++i) {
    const Matrix b = parts.st_chol.solve_matrix(mats[i]->to_matrix());
    const double tr = trace(b);
    const double tr2 = trace_product(b, b);
    den += (tr2 + tr * tr) / (sizes[i] - 1);
  }
  return (p + p * p) / den;
}

double yao_df(const TwoSampleData& data) { return yao_df(summarize(data)); }
JohansenParams johansen_params(const TwoSampleData& data) { return johansen_params(summarize(data)); }
double nvdm_df(const TwoSampleData& data) { return nvdm_df(summarize(data)); }
double ky_df(const TwoSampleData& data) { return ky_df(summarize(data)); }

namespace {

TestResult hotelling_style_result(Method method, double t2, double nu, int p) {
  const double den_df = nu - p + 1.0;
  const DfInfo df{nu, static_cast<double>(p), den_df, den_df / (nu * p)};
  const double pval = 1.0 - f_cdf(df.f_scale * t2, FParams{df.f_num_df, df.f_den_df});
  return {method, t2, df, pval};
}

}  // namespace

TestResult run_test(const SampleSummary& s, Method method) {
  const int p = static_cast<int>(s.mean_diff.size());
  const double t2 = t2_statistic(s);
  switch (method) {
    case Method::FBound: {
      const int mn = std::min(s.m, s.n);
      const DfInfo df{static_cast<double>(mn - 1), static_cast<double>(p),
                      static_cast<double>(mn - p),
                      static_cast<double>(mn - p) / (static_cast<double>(p) * (mn - 1))};
      return {method, t2, df, fbound_pvalue(t2, p, s.m, s.n)};
    }
    case Method::Yao: {
      if (t2 == 0.0) {
        // 0/0 in the df ratio; the decision rule is continuous at zero
        return {method, 0.0, DfInfo{kNan, kNan, kNan, kNan}, 1.0};
      }
      return hotelling_style_result(method, t2, yao_df(s), p);
    }
    case Method::Johansen: {
      const JohansenParams jp = johansen_params(s);
      const DfInfo df{jp.nu, static_cast<double>(p), jp.nu, 1.0 / jp.c};
      const double pval = 1.0 - f_cdf(t2 / jp.c, FParams{df.f_num_df, df.f_den_df});
      return {method, t2, df, pval};
    }
    case Method::NelVanDerMerwe:
      return hotelling_style_result(method, t2, nvdm_df(s), p);
    case Method::KrishnamoorthyYu:
      return hotelling_style_result(method, t2, ky_df(s), p);
  }
  throw InvalidArgument("run_test: unknown method");
}

TestResult run_test(const TwoSampleData& data, Method method) {
  return run_test(summarize(data), method);
}

std::vector<TestResult> run_all_tests(const SampleSummary& s) {
  std::vector<TestResult> out;
  out.reserve(kAllMethods.size());
  for (Method m : kAllMethods) out.push_back(run_test(s, m));
  return out;
}

std::vector<TestResult> run_all_tests(const TwoSampleData& data) {
  return run_all_tests(summarize(data));
}

}  // namespace mbf
