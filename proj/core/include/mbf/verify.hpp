#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbf/matrix.hpp"
#include "mbf/rng.hpp"

namespace mbf {

// Candidate pair for the majorization relation x ≺ y.
struct MajorizationPair {
  Vec x;
  Vec y;
};

// Sort both descending; x is majorized by y when totals agree and every
// prefix sum of x is dominated by the one of y. Comparisons use an
// absolute tolerance of 1e-12 on the sums.
bool is_majorized(const MajorizationPair& pair);

// The three weight vectors of the sandwich argument: uniform, the
// sample-size mixture (nu = m-1 copies of lambda/nu, th = n-1 copies of
// (1-lambda)/th), and the min-df extreme with zeros. Each sums to one
// and they form a majorization chain.
struct TheoremWeights {
  Vec psi;
  Vec eta;
  Vec xi;
};
TheoremWeights build_theorem2_weights(int m, int n, double k);

// Empirical-CDF dominance comparison on a fixed grid.
struct OrderCheckReport {
  Vec grid;
  Vec ecdf_a;  // form with the majorized (less spread) weights
  Vec ecdf_b;
  Vec mc_se;   // pointwise SE of the ECDF difference
  long violations = 0;
  double worst_margin = 0.0;  // min over grid of ecdf_a - ecdf_b + 3 se
};

// Summary serialized into the verification report. worst_margin is the
// smallest observed slack before the check would count a violation
// (negative means a violation happened).
struct CheckReport {
  std::string name;
  long instances = 0;
  long violations = 0;
  long skipped = 0;
  double worst_margin = 0.0;
  std::uint64_t seed = 0;
};

std::string reports_to_json(const std::vector<CheckReport>& reports);

// Monte Carlo check of the stochastic ordering: with exchangeable
// W_i ~ W(I_p, wishart_df) and psi majorized by eta, the quadratic form
// under psi dominates the one under eta pointwise in distribution.
// Refuses to run when psi is not majorized by eta, or when fewer than
// max(p, 1) weights are positive in either vector.
OrderCheckReport check_theorem1(const Vec& psi, const Vec& eta, int p, int wishart_df, long reps,
                                const RngStream& stream, int parallelism = 0);
CheckReport check_theorem1_report(const Vec& psi, const Vec& eta, int p, int wishart_df, long reps,
                                  const RngStream& stream, int parallelism = 0);

// Sign and ordering checks for the weighted chi-square CDF derivatives
// over random (theta, t) instances.
struct Lemma1Report {
  long instances = 0;
  long violations_positive = 0;  // first derivative must be > 0
  long violations_concave = 0;   // second derivative must be < 0
  long violations_ordering = 0;  // smaller weight has larger derivative
  double worst_margin_positive = 0.0;
  double worst_margin_concave = 0.0;
  double worst_margin_ordering = 0.0;
  std::uint64_t seed = 0;
};
Lemma1Report check_lemma1(int p, int num_instances, const RngStream& stream, int parallelism = 0);
std::vector<CheckReport> lemma1_reports(int p, const Lemma1Report& r);

// A pair qualifies for the concavity checks only when the blend
// actually moves (the endpoints differ) and the sorted eigenvalues stay
// separated by at least 1e-6 * trace on the whole 21-point lambda grid.
// Identical endpoints and near-tied spectra are degenerate.
bool blend_pair_nondegenerate(const SpdMatrix& m1, const SpdMatrix& m2);

// Concavity of the blend CDF in lambda over random SPD pairs;
// degenerate draws are resampled and counted as skipped.
CheckReport check_lemma2(int p, int num_instances, const RngStream& stream, int parallelism = 0);

// Concavity (second differences <= slack) of every bottom-up eigenvalue
// cumulative sum along the blend path.
CheckReport check_appendix_concavity(int p, int num_instances, const RngStream& stream,
                                     int parallelism = 0);

// Sandwich check: the empirical CDF of canonical draws must lie between
// the two F-distribution bound curves within 3 MC standard errors.
CheckReport check_theorem2(int p, int m, int n, double k, long reps, const RngStream& stream,
                           int parallelism = 0);

}  // namespace mbf
