#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "mbf/dist.hpp"
#include "mbf/matrix.hpp"
#include "mbf/rng.hpp"

namespace mbf {

// Two samples of p-dimensional observations, one observation per row.
// Valid inputs have more rows than columns in both samples.
struct TwoSampleData {
  Matrix x;  // m x p
  Matrix y;  // n x p
};

struct SampleSummary {
  int m = 0;
  int n = 0;
  Vec mean_diff;  // mean(x) - mean(y)
  SpdMatrix s1;   // unbiased covariance of x
  SpdMatrix s2;   // unbiased covariance of y
};

enum class Method { FBound, Yao, Johansen, NelVanDerMerwe, KrishnamoorthyYu };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::FBound, Method::Yao, Method::Johansen, Method::NelVanDerMerwe,
    Method::KrishnamoorthyYu};

std::string_view method_name(Method m);
std::optional<Method> method_from_string(std::string_view name);

// Degrees-of-freedom record. Every method rejects through the same rule:
//   p_value = 1 - f_cdf(f_scale * statistic, {f_num_df, f_den_df}).
// nu is the method's df estimate (for FBound, the min{m,n}-1 of the
// bounding distribution). All fields are NaN when the statistic is
// degenerate (zero mean difference under Yao).
struct DfInfo {
  double nu;
  double f_num_df;
  double f_den_df;
  double f_scale;
};

struct TestResult {
  Method method;
  double statistic;
  DfInfo df;
  double p_value;
};

// Sample means and unbiased covariances; throws RankDeficientSample if
// either covariance fails its Cholesky factorization.
SampleSummary summarize(const TwoSampleData& data);

// (mean_x - mean_y)^T (S1/m + S2/n)^{-1} (mean_x - mean_y)
double t2_statistic(const TwoSampleData& data);
double t2_statistic(const SampleSummary& s);

// Mixing weight of the canonical form: 1 / (1 + k m / n).
double lambda_from_k(double k, int m, int n);

struct CanonicalParams {
  double lambda;  // in [0, 1]
  int p;
  int m;
  int n;
};

// One draw from the null distribution of the statistic via the
// canonical form: Z^T { lambda W1/(m-1) + (1-lambda) W2/(n-1) }^{-1} Z,
// W1 ~ W(I_p, m-1), W2 ~ W(I_p, n-1), Z ~ N(0, I_p).
double sample_canonical_t2(const CanonicalParams& params, RngStream& stream);

struct BoundPair {
  double lower;
  double upper;
};

// Finite-sample bounds on P(T^2 <= t):
//   lower = F_{p, M-p}((M-p) t / (p (M-1))),          M = min(m, n)
//   upper = F_{p, m+n-p-1}((m+n-p-1) t / (p (m+n-2)))
// Only the lower bound yields a valid conservative p-value; the upper
// bound is diagnostic.
BoundPair bound_cdfs(double t, int p, int m, int n);

// Conservative p-value: exactly 1 - bound_cdfs(t2, p, m, n).lower.
double fbound_pvalue(double t2, int p, int m, int n);

// n Z^T W^{-1} Z for W ~ W(I_p, n) equals scale * F_{p, n-p+1} in
// distribution, scale = n p / (n - p + 1).
struct FTransform {
  double scale;
  FParams df;
};
FTransform hotelling_f_transform(int p, int n);

// Approximate degrees of freedom of the four competitor tests.
double yao_df(const SampleSummary& s);
double yao_df(const TwoSampleData& data);
struct JohansenParams {
  double c;
  double nu;
};
JohansenParams johansen_params(const SampleSummary& s);
JohansenParams johansen_params(const TwoSampleData& data);
double nvdm_df(const SampleSummary& s);
double nvdm_df(const TwoSampleData& data);
double ky_df(const SampleSummary& s);
double ky_df(const TwoSampleData& data);

TestResult run_test(const TwoSampleData& data, Method method);
TestResult run_test(const SampleSummary& s, Method method);
std::vector<TestResult> run_all_tests(const TwoSampleData& data);
std::vector<TestResult> run_all_tests(const SampleSummary& s);

}  // namespace mbf
