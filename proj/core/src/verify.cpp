#include "mbf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "mbf/bf_test.hpp"
#include "mbf/parallel.hpp"
#include "mbf/wchisq.hpp"

namespace mbf {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kConcavitySlack = 1e-8;
constexpr double kEigenGapFloor = 1e-6;  // times the trace
constexpr int kLambdaGridPoints = 21;
constexpr int kEcdfGridPoints = 50;

Vec sorted_descending(Vec v) {
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

// Evenly spaced percentile grid between the 1st and 99th percentile of
// pooled samples.
Vec percentile_grid(Vec pooled) {
  std::sort(pooled.begin(), pooled.end());
  Vec grid(kEcdfGridPoints);
  const double n = static_cast<double>(pooled.size());
  for (int j = 0; j < kEcdfGridPoints; ++j) {
    const double prob = 0.01 + 0.98 * j / (kEcdfGridPoints - 1);
    const auto idx = static_cast<std::size_t>(prob * (n - 1.0));
    grid[j] = pooled[idx];
  }
  return grid;
}

double ecdf_at(const Vec& sorted_samples, double t) {
  const auto it = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), t);
  return static_cast<double>(it - sorted_samples.begin()) / sorted_samples.size();
}

int count_positive(const Vec& v) {
  int c = 0;
  for (double x : v)
    if (x > 0.0) ++c;
  return c;
}

struct BlendInstance {
  SpdMatrix m1;
  SpdMatrix m2;
  double t;
  std::vector<Vec> eigenvalues;  // per lambda grid point, descending
  long attempts = 0;
};

bool grid_eigenvalues_if_nondegenerate(const SpdMatrix& m1, const SpdMatrix& m2,
                                       std::vector<Vec>& eigenvalues) {
  const int p = m1.dim();
  double diff_norm = 0.0;
  double scale = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      diff_norm += (m1(i, j) - m2(i, j)) * (m1(i, j) - m2(i, j));
      scale += m1(i, j) * m1(i, j) + m2(i, j) * m2(i, j);
    }
  if (diff_norm < 1e-12 * scale) return false;  // endpoints coincide, the path is flat

  eigenvalues.clear();
  eigenvalues.reserve(kLambdaGridPoints);
  for (int g = 0; g < kLambdaGridPoints; ++g) {
    const double lambda = static_cast<double>(g) / (kLambdaGridPoints - 1);
    const SpdMatrix m = mat_add_scaled(m1, lambda, m2, 1.0 - lambda);
    const EigenDecomp eig = sym_eigen(m);
    const double floor = kEigenGapFloor * trace(m);
    for (int i = 0; i + 1 < p; ++i)
      if (eig.values[i] - eig.values[i + 1] < floor) return false;
    eigenvalues.push_back(eig.values);
  }
  return true;
}

// Draws SPD pairs until one qualifies; degenerate draws are counted and
// resampled from an extended stream path.
BlendInstance sample_blend_instance(const RngStream& instance_stream, int p) {
  const SpdMatrix eye = SpdMatrix::identity(p);
  for (long attempt = 0; attempt < 100; ++attempt) {
    RngStream s = instance_stream.child(static_cast<std::uint64_t>(attempt));
    const double scale1 = std::exp(s.next_uniform() - 0.5);
    const double scale2 = std::exp(s.next_uniform() - 0.5);
    BlendInstance inst{scaled(sample_wishart(s, eye, p + 2), scale1 / (p + 2)),
                       scaled(sample_wishart(s, eye, p + 2), scale2 / (p + 2)),
                       0.0,
                       {},
                       attempt};
    if (!grid_eigenvalues_if_nondegenerate(inst.m1, inst.m2, inst.eigenvalues)) continue;

    double inv_sum = 0.0;
    for (double d : inst.eigenvalues[kLambdaGridPoints / 2]) inv_sum += 1.0 / d;
    inst.t = inv_sum * (0.4 + 0.8 * s.next_uniform());
    return inst;
  }
  throw DegenerateSpectrum("sample_blend_instance: no non-degenerate pair after 100 attempts");
}

}  // namespace

bool blend_pair_nondegenerate(const SpdMatrix& m1, const SpdMatrix& m2) {
  if (m1.dim() != m2.dim()) throw DimensionMismatch("blend_pair_nondegenerate: dimensions differ");
  std::vector<Vec> scratch;
  return grid_eigenvalues_if_nondegenerate(m1, m2, scratch);
}

bool is_majorized(const MajorizationPair& pair) {
  if (pair.x.size() != pair.y.size()) throw LengthMismatch("is_majorized: lengths differ");
  const Vec xs = sorted_descending(pair.x);
  const Vec ys = sorted_descending(pair.y);
  double cum_x = 0.0;
  double cum_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cum_x += xs[i];
    cum_y += ys[i];
    const bool last = i + 1 == xs.size();
    if (last) {
      if (std::fabs(cum_x - cum_y) > kSumTol) return false;
    } else if (cum_x > cum_y + kSumTol) {
      return false;
    }
  }
  return true;
}

TheoremWeights build_theorem2_weights(int m, int n, double k) {
  if (m < 2 || n < 2) throw InvalidArgument("build_theorem2_weights: m, n must be >= 2");
  const double lambda = lambda_from_k(k, m, n);
  const int nu = m - 1;
  const int th = n - 1;
  const int r = nu + th;
  TheoremWeights w;
  w.psi.assign(r, 1.0 / r);
  w.eta.assign(r, 0.0);
  for (int i = 0; i < nu; ++i) w.eta[i] = lambda / nu;
  for (int i = nu; i < r; ++i) w.eta[i] = (1.0 - lambda) / th;
  w.xi.assign(r, 0.0);
  const int mn = std::min(nu, th);
  for (int i = 0; i < mn; ++i) w.xi[i] = 1.0 / mn;
  return w;
}

OrderCheckReport check_theorem1(const Vec& psi, const Vec& eta, int p, int wishart_df, long reps,
                                const RngStream& stream, int parallelism) {
  if (psi.size() != eta.size()) throw LengthMismatch("check_theorem1: weight lengths differ");
  if (!is_majorized({psi, eta}))
    throw NotMajorized("check_theorem1: psi is not majorized by eta; the check would be vacuous");
  const int needed = std::max(p, 1);
  if (count_positive(psi) < needed || count_positive(eta) < needed)
    throw InvalidArgument("check_theorem1: needs at least max(p, 1) positive weights per vector");
  if (reps < 100) throw InvalidArgument("check_theorem1: needs at least 100 replications");

  const int r = static_cast<int>(psi.size());
  Vec qa(reps), qb(reps);
  const SpdMatrix eye = SpdMatrix::identity(p);
  parallel_for(reps, resolve_parallelism(parallelism), [&](long begin, long end, int) {
    for (long rep = begin; rep < end; ++rep) {
      RngStream s = stream.child(static_cast<std::uint64_t>(rep));
      const Vec z = sample_normal_vec(s, p);
      SpdMatrix sum_a(p);
      SpdMatrix sum_b(p);
      for (int i = 0; i < r; ++i) {
        const SpdMatrix w = sample_wishart(s, eye, wishart_df);
        if (psi[i] != 0.0) sum_a = mat_add_scaled(sum_a, 1.0, w, psi[i]);
        if (eta[i] != 0.0) sum_b = mat_add_scaled(sum_b, 1.0, w, eta[i]);
      }
      qa[rep] = quad_form_inv(z, sum_a);
      qb[rep] = quad_form_inv(z, sum_b);
    }
  });

  Vec pooled;
  pooled.reserve(2 * reps);
  pooled.insert(pooled.end(), qa.begin(), qa.end());
  pooled.insert(pooled.end(), qb.begin(), qb.end());

  OrderCheckReport report;
  report.grid = percentile_grid(std::move(pooled));
  std::sort(qa.begin(), qa.end());
  std::sort(qb.begin(), qb.end());
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (double t : report.grid) {
    const double fa = ecdf_at(qa, t);
    const double fb = ecdf_at(qb, t);
    const double se = std::sqrt((fa * (1.0 - fa) + fb * (1.0 - fb)) / reps);
    report.ecdf_a.push_back(fa);
    report.ecdf_b.push_back(fb);
    report.mc_se.push_back(se);
    const double margin = fa - fb + 3.0 * se;
    if (margin < 0.0) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  return report;
}

CheckReport check_theorem1_report(const Vec& psi, const Vec& eta, int p, int wishart_df, long reps,
                                  const RngStream& stream, int parallelism) {
  const OrderCheckReport r = check_theorem1(psi, eta, p, wishart_df, reps, stream, parallelism);
  CheckReport out;
  out.name = "theorem1_stochastic_order";
  out.instances = reps;
  out.violations = r.violations;
  out.worst_margin = r.worst_margin;
  return out;
}

Lemma1Report check_lemma1(int p, int num_instances, const RngStream& stream, int parallelism) {
  if (p < 2) throw InvalidArgument("check_lemma1: p must be >= 2");
  if (num_instances < 1) throw InvalidArgument("check_lemma1: needs at least one instance");

  struct InstanceOutcome {
    long bad_pos = 0, bad_conc = 0, bad_ord = 0;
    double margin_pos = std::numeric_limits<double>::infinity();
    double margin_conc = std::numeric_limits<double>::infinity();
    double margin_ord = std::numeric_limits<double>::infinity();
  };
  std::vector<InstanceOutcome> slots(num_instances);

  parallel_for(num_instances, resolve_parallelism(parallelism), [&](long begin, long end, int) {
    for (long idx = begin; idx < end; ++idx) {
      RngStream s = stream.child(static_cast<std::uint64_t>(idx));
      Vec theta(p);
      double inv_sum = 0.0;
      const double lo = std::log(0.3), hi = std::log(3.0);
      for (int j = 0; j < p; ++j) {
        theta[j] = std::exp(lo + (hi - lo) * s.next_uniform());
        inv_sum += 1.0 / theta[j];
      }
      const double t = inv_sum * (0.3 + 1.2 * s.next_uniform());
      const WeightVector w(theta);

      InstanceOutcome& out = slots[idx];
      Vec f(p), g(p);
      for (int j = 0; j < p; ++j) {
        f[j] = wchisq_cdf_dtheta(t, w, j);
        g[j] = wchisq_cdf_d2theta(t, w, j);
        if (!(f[j] > 0.0)) ++out.bad_pos;
        if (!(g[j] < 0.0)) ++out.bad_conc;
        out.margin_pos = std::min(out.margin_pos, f[j]);
        out.margin_conc = std::min(out.margin_conc, -g[j]);
      }
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          if (i == j || theta[i] > 0.9 * theta[j]) continue;
          const double margin = f[i] - f[j];
          if (!(margin > 0.0)) ++out.bad_ord;
          out.margin_ord = std::min(out.margin_ord, margin);
        }
      }
    }
  });

  Lemma1Report report;
  report.instances = num_instances;
  report.worst_margin_positive = std::numeric_limits<double>::infinity();
  report.worst_margin_concave = std::numeric_limits<double>::infinity();
  report.worst_margin_ordering = std::numeric_limits<double>::infinity();
  for (const auto& o : slots) {
    report.violations_positive += o.bad_pos;
    report.violations_concave += o.bad_conc;
    report.violations_ordering += o.bad_ord;
    report.worst_margin_positive = std::min(report.worst_margin_positive, o.margin_pos);
    report.worst_margin_concave = std::min(report.worst_margin_concave, o.margin_conc);
    report.worst_margin_ordering = std::min(report.worst_margin_ordering, o.margin_ord);
  }
  return report;
}

std::vector<CheckReport> lemma1_reports(int p, const Lemma1Report& r) {
  const std::string suffix = "_p" + std::to_string(p);
  std::vector<CheckReport> out;
  out.push_back({"lemma1_derivative_positive" + suffix, r.instances, r.violations_positive, 0,
                 r.worst_margin_positive, r.seed});
  out.push_back({"lemma1_concave_in_weight" + suffix, r.instances, r.violations_concave, 0,
                 r.worst_margin_concave, r.seed});
  out.push_back({"lemma1_derivative_ordering" + suffix, r.instances, r.violations_ordering, 0,
                 r.worst_margin_ordering, r.seed});
  return out;
}

CheckReport check_lemma2(int p, int num_instances, const RngStream& stream, int parallelism) {
  if (p < 2) throw InvalidArgument("check_lemma2: p must be >= 2");
  struct Outcome {
    long violations = 0;
    long skipped = 0;
    double margin = std::numeric_limits<double>::infinity();
  };
  std::vector<Outcome> slots(num_instances);

  parallel_for(num_instances, resolve_parallelism(parallelism), [&](long begin, long end, int) {
    for (long idx = begin; idx < end; ++idx) {
      const BlendInstance inst = sample_blend_instance(stream.child(idx), p);
      Outcome& out = slots[idx];
      out.skipped = inst.attempts;
      Vec h(kLambdaGridPoints);
      for (int g = 0; g < kLambdaGridPoints; ++g)
        h[g] = wchisq_cdf(inst.t, WeightVector(inst.eigenvalues[g]));
      for (int g = 1; g + 1 < kLambdaGridPoints; ++g) {
        const double second_diff = h[g + 1] - 2.0 * h[g] + h[g - 1];
        const double margin = kConcavitySlack - second_diff;
        if (margin < 0.0) ++out.violations;
        out.margin = std::min(out.margin, margin);
      }
    }
  });

  CheckReport report;
  report.name = "lemma2_blend_concavity_p" + std::to_string(p);
  report.instances = num_instances;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& o : slots) {
    report.violations += o.violations;
    report.skipped += o.skipped;
    report.worst_margin = std::min(report.worst_margin, o.margin);
  }
  return report;
}

CheckReport check_appendix_concavity(int p, int num_instances, const RngStream& stream,
                                     int parallelism) {
  if (p < 2) throw InvalidArgument("check_appendix_concavity: p must be >= 2");
  struct Outcome {
    long violations = 0;
    long skipped = 0;
    double margin = std::numeric_limits<double>::infinity();
  };
  std::vector<Outcome> slots(num_instances);

  parallel_for(num_instances, resolve_parallelism(parallelism), [&](long begin, long end, int) {
    for (long idx = begin; idx < end; ++idx) {
      const BlendInstance inst = sample_blend_instance(stream.child(idx), p);
      Outcome& out = slots[idx];
      out.skipped = inst.attempts;
      // cumulative sums of eigenvalues from the bottom, per grid point
      std::vector<Vec> csum(kLambdaGridPoints, Vec(p));
      for (int g = 0; g < kLambdaGridPoints; ++g) {
        double acc = 0.0;
        for (int i = p - 1; i >= 0; --i) {
          acc += inst.eigenvalues[g][i];
          csum[g][i] = acc;
        }
      }
      for (int i = 0; i < p; ++i) {
        for (int g = 1; g + 1 < kLambdaGridPoints; ++g) {
          const double second_diff = csum[g + 1][i] - 2.0 * csum[g][i] + csum[g - 1][i];
          const double margin = kConcavitySlack - second_diff;
          if (margin < 0.0) ++out.violations;
          out.margin = std::min(out.margin, margin);
        }
      }
    }
  });

  CheckReport report;
  report.name = "appendix_cumsum_concavity_p" + std::to_string(p);
  report.instances = num_instances;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& o : slots) {
    report.violations += o.violations;
    report.skipped += o.skipped;
    report.worst_margin = std::min(report.worst_margin, o.margin);
  }
  return report;
}

CheckReport check_theorem2(int p, int m, int n, double k, long reps, const RngStream& stream,
                           int parallelism) {
  if (reps < 100) throw InvalidArgument("check_theorem2: needs at least 100 replications");
  const CanonicalParams params{lambda_from_k(k, m, n), p, m, n};
  Vec samples(reps);
  parallel_for(reps, resolve_parallelism(parallelism), [&](long begin, long end, int) {
    for (long rep = begin; rep < end; ++rep) {
      RngStream s = stream.child(static_cast<std::uint64_t>(rep));
      samples[rep] = sample_canonical_t2(params, s);
    }
  });

  Vec sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const Vec grid = percentile_grid(samples);

  CheckReport report;
  report.name = "theorem2_sandwich_p" + std::to_string(p) + "_m" + std::to_string(m) + "_n" +
                std::to_string(n);
  report.instances = reps;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double f = ecdf_at(sorted, t);
    const BoundPair b = bound_cdfs(t, p, m, n);
    const double se = std::sqrt(f * (1.0 - f) / reps);
    const double margin = std::min(f - b.lower + 3.0 * se, b.upper - f + 3.0 * se);
    if (margin < 0.0) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  return report;
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::json checks = nlohmann::json::array();
  long total = 0;
  for (const auto& r : reports) {
    checks.push_back({{"name", r.name},
                      {"instances", r.instances},
                      {"violations", r.violations},
                      {"skipped", r.skipped},
                      {"worst_margin", r.worst_margin},
                      {"seed", r.seed}});
    total += r.violations;
  }
  nlohmann::json doc{{"checks", checks}, {"violations_total", total}};
  return doc.dump(2) + "\n";
}

}  // namespace mbf
