#pragma once

#include <cstdint>
#include <initializer_list>

#include "mbf/matrix.hpp"

namespace mbf {

// Counter-based deterministic random stream. Every output is a pure
// function of (base_seed, stream_path, counter), so replications can be
// assigned to workers in any order and still reproduce bit-exactly.
// Streams are single-owner: derive children for concurrent tasks instead
// of sharing one stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t base_seed);
  RngStream(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path);

  // New independent stream with one more path label appended.
  RngStream child(std::uint64_t label) const;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double next_uniform();

 private:
  RngStream() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

double sample_std_normal(RngStream& s);
Vec sample_normal_vec(RngStream& s, int p);
// Appends p draws; pairs of normals share one Box-Muller transform.
void sample_normal_fill(RngStream& s, double* out, int p);

double sample_gamma(RngStream& s, double shape);  // unit scale, shape > 0
double sample_chisq(RngStream& s, double df);     // df > 0

Vec sample_mvn(RngStream& s, const Vec& mean, const SpdMatrix& sigma);

// Bartlett construction; requires df >= dim(sigma).
SpdMatrix sample_wishart(RngStream& s, const SpdMatrix& sigma, int df);

}  // namespace mbf
