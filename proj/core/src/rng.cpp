#include "mbf/rng.hpp"

#include <cmath>

namespace mbf {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kRootSalt = 0x2545f4914f6cdd1dULL;
constexpr std::uint64_t kChildSalt = 0x452821e638d01377ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(std::uint64_t base_seed) : key_(mix64(base_seed ^ kRootSalt)) {}

RngStream::RngStream(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path)
    : RngStream(base_seed) {
  for (std::uint64_t label : path) *this = child(label);
}

RngStream RngStream::child(std::uint64_t label) const {
  RngStream out;
  out.key_ = mix64(key_ ^ mix64(label ^ kChildSalt));
  return out;
}

std::uint64_t RngStream::next_u64() {
  return mix64(key_ + (++counter_) * kGolden);
}

double RngStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_std_normal(RngStream& s) {
  const double u1 = s.next_uniform();
  const double u2 = s.next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

void sample_normal_fill(RngStream& s, double* out, int p) {
  int i = 0;
  while (i + 1 < p) {
    const double u1 = s.next_uniform();
    const double u2 = s.next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i++] = r * std::cos(kTwoPi * u2);
    out[i++] = r * std::sin(kTwoPi * u2);
  }
  if (i < p) out[i] = sample_std_normal(s);
}

Vec sample_normal_vec(RngStream& s, int p) {
  if (p < 1) throw InvalidArgument("sample_normal_vec: p must be >= 1");
  Vec out(p);
  sample_normal_fill(s, out.data(), p);
  return out;
}

double sample_gamma(RngStream& s, double shape) {
  if (!(shape > 0.0)) throw DomainError("sample_gamma: shape must be > 0");
  if (shape < 1.0) {
    // boost to shape+1, then scale back by a uniform power
    const double u = s.next_uniform();
    return sample_gamma(s, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_std_normal(s);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = s.next_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_chisq(RngStream& s, double df) {
  if (!(df > 0.0)) throw DomainError("sample_chisq: df must be > 0");
  return 2.0 * sample_gamma(s, 0.5 * df);
}

Vec sample_mvn(RngStream& s, const Vec& mean, const SpdMatrix& sigma) {
  const int p = sigma.dim();
  if (static_cast<int>(mean.size()) != p) throw DimensionMismatch("sample_mvn: mean size mismatch");
  const CholeskyFactor chol = cholesky(sigma);
  const Vec z = sample_normal_vec(s, p);
  Vec out(mean);
  const Matrix& l = chol.lower();
  for (int i = 0; i < p; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) acc += l(i, j) * z[j];
    out[i] += acc;
  }
  return out;
}

SpdMatrix sample_wishart(RngStream& s, const SpdMatrix& sigma, int df) {
  const int p = sigma.dim();
  if (df < p) throw DfTooSmall("sample_wishart: df must be >= dimension");
  const CholeskyFactor chol = cholesky(sigma);

  Matrix a(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) a(i, j) = sample_std_normal(s);
    a(i, i) = std::sqrt(sample_chisq(s, static_cast<double>(df - i)));
  }

  const Matrix b = matmul(chol.lower(), a);
  SpdMatrix w(p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      double acc = 0.0;
      for (int k = 0; k <= std::min(i, j); ++k) acc += b(i, k) * b(j, k);
      w.set(i, j, acc);
    }
  }
  return w;
}

}  // namespace mbf
