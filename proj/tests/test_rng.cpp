#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "mbf/dist.hpp"
#include "mbf/rng.hpp"
#include "testutil.hpp"

using namespace mbf;

TEST_CASE("identical seed and path reproduce the sequence bit-exactly") {
  RngStream a(12345);
  RngStream b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(12345, {7, 9});
  RngStream d = RngStream(12345).child(7).child(9);
  for (int i = 0; i < 100; ++i) CHECK(c.next_u64() == d.next_u64());

  RngStream e(12345);
  RngStream f(12345);
  CHECK(sample_std_normal(e) == sample_std_normal(f));
}

TEST_CASE("distinct paths give different sequences") {
  RngStream a = RngStream(99).child(0);
  RngStream b = RngStream(99).child(1);
  int equal = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("standard normal sample moments sit in the CLT bands") {
  RngStream s(2024);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_std_normal(s);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("normal vector draws match the pairwise fill") {
  RngStream a(77);
  RngStream b(77);
  const Vec v = sample_normal_vec(a, 5);
  Vec w(5);
  sample_normal_fill(b, w.data(), 5);
  CHECK(testutil::max_abs_diff(v, w) == 0.0);
}

TEST_CASE("mvn with identity covariance equals the raw normal vector plus mean") {
  RngStream a(31);
  RngStream b(31);
  const Vec mean{2.0, -1.0, 0.5};
  const Vec x = sample_mvn(a, mean, SpdMatrix::identity(3));
  const Vec z = sample_normal_vec(b, 3);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == z[i] + mean[i]);
}

TEST_CASE("mvn sample covariance approaches sigma") {
  SpdMatrix sigma(2);
  sigma.set(0, 0, 2.0);
  sigma.set(0, 1, 1.0);
  sigma.set(1, 1, 2.0);
  RngStream s(555);
  const int n = 100000;
  testutil::Grid draws(n, std::vector<double>(2));
  for (int i = 0; i < n; ++i) {
    const Vec x = sample_mvn(s, Vec{0.0, 0.0}, sigma);
    draws[i][0] = x[0];
    draws[i][1] = x[1];
  }
  const testutil::Grid cov = testutil::naive_covariance(draws);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::fabs(cov[i][j] - sigma(i, j)) < 0.05);
}

TEST_CASE("mvn rejects a singular covariance") {
  SpdMatrix sigma(2);
  sigma.set(0, 0, 1.0);
  sigma.set(0, 1, 1.0);
  sigma.set(1, 1, 1.0);  // rank one
  RngStream s(1);
  CHECK_THROWS_AS(sample_mvn(s, Vec{5.0, 5.0}, sigma), NotPositiveDefinite);
}

TEST_CASE("wishart mean is df * sigma") {
  RngStream s(808);
  const SpdMatrix eye = SpdMatrix::identity(2);
  double acc[2][2] = {{0, 0}, {0, 0}};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const SpdMatrix w = sample_wishart(s, eye, 5);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) acc[a][b] += w(a, b);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(std::fabs(acc[a][b] / n - (a == b ? 5.0 : 0.0)) < 0.1);
}

TEST_CASE("one-dimensional wishart reduces to a chi-square") {
  RngStream s(909);
  const SpdMatrix one = SpdMatrix::identity(1);
  std::vector<double> draws(100000);
  for (double& d : draws) d = sample_wishart(s, one, 5)(0, 0);
  const double dist = testutil::ks_distance(draws, [](double t) { return chisq_cdf(t, 5.0); });
  CHECK(dist < 0.01);
}

TEST_CASE("wishart rejects df below the dimension") {
  RngStream s(2);
  CHECK_THROWS_AS(sample_wishart(s, SpdMatrix::identity(3), 2), DfTooSmall);
}

TEST_CASE("gamma sampling covers shapes below one") {
  RngStream s(311);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_chisq(s, 1.0);  // shape 0.5 path
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}
