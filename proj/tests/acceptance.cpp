// Acceptance suite: runs every acceptance criterion end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mbf/bf_test.hpp"
#include "mbf/dist.hpp"
#include "mbf/io.hpp"
#include "mbf/rng.hpp"
#include "mbf/sim.hpp"
#include "mbf/verify.hpp"
#include "mbf/wchisq.hpp"
#include "testutil.hpp"

using namespace mbf;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) { return format_double(v); }

SimConfig paper_grid_config(int parallelism) {
  SimConfig cfg;
  cfg.p = 5;
  for (int n : {10, 20, 50})
    for (double k : {0.01, 0.1, 1.0, 10.0, 100.0}) cfg.grid.push_back({10, n, k});
  for (int n : {100, 200, 500})
    for (double k : {0.01, 0.1, 1.0, 10.0, 100.0}) cfg.grid.push_back({100, n, k});
  cfg.alphas = {0.05, 0.01};
  cfg.reps = 20000;
  cfg.base_seed = 0x5EEDBF01;
  cfg.parallelism = parallelism;
  return cfg;
}

// criteria 1-3 share one grid run; criterion 10 reruns it with a
// different worker count
void criteria_grid(std::string* csv_first) {
  const SimConfig cfg = paper_grid_config(2);
  const SimResults results = run_grid(cfg);
  *csv_first = results_to_csv(results.rows);

  const double se05 = std::sqrt(0.05 * 0.95 / cfg.reps);
  const double se01 = std::sqrt(0.01 * 0.99 / cfg.reps);

  // 1: the bound test controls its level in every cell
  int conservative_cells = 0;
  double worst_excess = -1.0;
  for (const SettingResult& r : results.rows) {
    if (r.method != Method::FBound) continue;
    const double band = 3.0 * (r.alpha == 0.05 ? se05 : se01);
    if (r.empirical_size <= r.alpha + band) ++conservative_cells;
    worst_excess = std::max(worst_excess, r.empirical_size - r.alpha);
  }
  report(1, conservative_cells == 60,
         "bound test controls Type I error on the full grid",
         std::to_string(conservative_cells) + "/60 cells within alpha + 3 se, worst excess " +
             fmt(worst_excess));

  // 2: at the smallest sample sizes some competitor inflates
  double worst05 = 0.0, worst01 = 0.0;
  for (const SettingResult& r : results.rows) {
    if (r.method == Method::FBound || r.setting.m != 10 || r.setting.n != 10) continue;
    if (r.alpha == 0.05) worst05 = std::max(worst05, r.empirical_size);
    if (r.alpha == 0.01) worst01 = std::max(worst01, r.empirical_size);
  }
  report(2, worst05 >= 1.5 * 0.05 && worst01 >= 2.5 * 0.01,
         "competitors inflate at m=n=10",
         "worst size " + fmt(worst05) + " at alpha 0.05 (need 0.075), " + fmt(worst01) +
             " at alpha 0.01 (need 0.025)");

  // 3: with large samples everything is close to nominal. Known outcome:
  // the bound test under-rejects beyond this band at unbalanced sizes
  // (its critical value comes from the min(m,n)-1 df bound while the
  // null law concentrates near the pooled bound), so this criterion
  // reports FAIL on those cells while the four approximate-df methods
  // stay inside the band.
  double worst_dev = 0.0;
  std::string worst_cell = "-";
  for (const SettingResult& r : results.rows) {
    if (r.setting.m != 100 || r.alpha != 0.05) continue;
    const double dev = std::fabs(r.empirical_size - 0.05);
    if (dev > worst_dev) {
      worst_dev = dev;
      worst_cell = std::string(method_name(r.method)) + " at n=" + std::to_string(r.setting.n) +
                   " k=" + fmt(r.setting.k) + " size " + fmt(r.empirical_size);
    }
  }
  report(3, worst_dev <= 4.0 * se05, "every method is near nominal at m=100",
         "worst |size - alpha| " + fmt(worst_dev) + " vs band " + fmt(4.0 * se05) + "; " +
             worst_cell);

  atomic_write_file("acceptance_results.csv", *csv_first);
}

void criterion_sandwich() {
  const RngStream root(0x5EEDBF04);
  const int dims[3][3] = {{2, 12, 12}, {5, 10, 50}, {3, 8, 30}};
  long violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  int idx = 0;
  for (const auto& d : dims) {
    for (double k : {0.01, 1.0, 100.0}) {
      const CheckReport r = check_theorem2(d[0], d[1], d[2], k, 100000, root.child(idx++), 2);
      violations += r.violations;
      worst = std::min(worst, r.worst_margin);
    }
  }
  report(4, violations == 0, "empirical canonical CDF stays inside the two F bounds",
         "9 configurations x 100000 draws, violations " + std::to_string(violations) +
             ", worst margin " + fmt(worst));
}

void criterion_ordering() {
  const RngStream root(0x5EEDBF05);
  long violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    RngStream gen = root.child(0).child(i);
    const int r = 2 + static_cast<int>(gen.next_uniform() * 5) % 5;           // 2..6
    const int p = 1 + static_cast<int>(gen.next_uniform() * 4) % std::min(4, r);  // 1..min(4,r)
    Vec eta(r);
    double total = 0.0;
    for (double& v : eta) {
      v = 0.05 + 0.95 * gen.next_uniform();
      total += v;
    }
    for (double& v : eta) v /= total;
    Vec psi = eta;
    for (int transfer = 0; transfer < 3 * r; ++transfer) {
      const int a = static_cast<int>(gen.next_uniform() * r) % r;
      const int b = static_cast<int>(gen.next_uniform() * r) % r;
      if (psi[a] <= psi[b]) continue;
      const double delta = 0.5 * gen.next_uniform() * (psi[a] - psi[b]);
      psi[a] -= delta;
      psi[b] += delta;
    }
    const OrderCheckReport rep = check_theorem1(psi, eta, p, p + 3, 50000, root.child(1).child(i), 2);
    violations += rep.violations;
    worst = std::min(worst, rep.worst_margin);
  }
  report(5, violations == 0, "majorized weights give stochastically dominated quadratic forms",
         "20 pairs x 50000 draws, violations " + std::to_string(violations) + ", worst margin " +
             fmt(worst));
}

void criterion_derivatives() {
  const RngStream root(0x5EEDBF06);
  long bad = 0;
  std::string detail;
  for (int p : {2, 3, 5}) {
    const Lemma1Report r = check_lemma1(p, 200, root.child(p), 2);
    bad += r.violations_positive + r.violations_concave + r.violations_ordering;
    detail += "p" + std::to_string(p) + ":" + std::to_string(r.violations_positive) + "/" +
              std::to_string(r.violations_concave) + "/" + std::to_string(r.violations_ordering) +
              " ";
  }

  // dual-path derivative agreement on the two-component case
  double worst_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    RngStream s = root.child(100).child(i);
    const double t1 = 0.3 + 3.0 * s.next_uniform();
    const double t2 = 0.3 + 3.0 * s.next_uniform();
    const double t = (1.0 / t1 + 1.0 / t2) * (0.3 + 1.2 * s.next_uniform());
    const double analytic = wchisq_cdf_p2_dtheta1(t, t1, t2);
    const double h = 1e-4 * t1;
    const auto fd_at = [&](double step) {
      return (wchisq_cdf_p2(t, t1 + step, t2, 1e-12) - wchisq_cdf_p2(t, t1 - step, t2, 1e-12)) /
             (2.0 * step);
    };
    const double fd = (4.0 * fd_at(0.5 * h) - fd_at(h)) / 3.0;
    worst_gap = std::max(worst_gap, std::fabs(analytic - fd));
  }
  const bool pass = bad == 0 && worst_gap < 1e-6;
  report(6, pass, "derivative signs, ordering, and the dual-path agreement",
         "violations " + detail + "; worst analytic-vs-fd gap " + fmt(worst_gap));
}

void criterion_concavity() {
  const RngStream root(0x5EEDBF07);
  long violations = 0;
  long skipped = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int p : {2, 4}) {
    const CheckReport a = check_lemma2(p, 100, root.child(10 + p), 2);
    const CheckReport b = check_appendix_concavity(p, 100, root.child(20 + p), 2);
    violations += a.violations + b.violations;
    skipped += a.skipped + b.skipped;
    worst = std::min(worst, std::min(a.worst_margin, b.worst_margin));
  }
  report(7, violations == 0,
         "blend CDF and eigenvalue cumulative sums are concave along the path",
         "violations " + std::to_string(violations) + ", degenerate redraws " +
             std::to_string(skipped) + ", worst margin " + fmt(worst));
}

void criterion_reductions() {
  double worst_p = 0.0;
  for (const auto& mn : {std::pair{10, 20}, std::pair{5, 8}, std::pair{15, 7}}) {
    const int nu = std::min(mn.first, mn.second) - 1;
    for (double t = 0.25; t <= 4.0; t += 0.25) {
      const double from_bound = fbound_pvalue(t * t, 1, mn.first, mn.second);
      const double oracle = testutil::student_t_two_sided_p(t, nu);
      worst_p = std::max(worst_p, std::fabs(from_bound - oracle));
    }
  }

  const RngStream root(0x5EEDBF08);
  double worst_df = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    RngStream s = root.child(rep);
    const int m = 5 + static_cast<int>(s.next_uniform() * 20);
    const int n = 5 + static_cast<int>(s.next_uniform() * 20);
    Matrix x(m, 1), y(n, 1);
    for (int i = 0; i < m; ++i) x(i, 0) = sample_std_normal(s);
    for (int i = 0; i < n; ++i) y(i, 0) = 0.5 + 2.0 * sample_std_normal(s);
    const SampleSummary sum = summarize(TwoSampleData{x, y});
    const double welch = testutil::welch_df(sum.s1(0, 0), m, sum.s2(0, 0), n);
    worst_df = std::max(worst_df, std::fabs(yao_df(sum) - welch));
    worst_df = std::max(worst_df, std::fabs(nvdm_df(sum) - welch));
    worst_df = std::max(worst_df, std::fabs(ky_df(sum) - welch));
  }
  report(8, worst_p < 1e-10 && worst_df < 1e-10 * 50.0,
         "univariate reductions: t p-value and the Welch df",
         "worst p-value gap " + fmt(worst_p) + ", worst df gap " + fmt(worst_df));
}

void criterion_special_functions() {
  double worst_median = 0.0;
  for (int d = 1; d <= 100; ++d) {
    const double fd = static_cast<double>(d);
    worst_median = std::max(worst_median, std::fabs(f_cdf(1.0, FParams{fd, fd}) - 0.5));
  }
  double worst_chisq = 0.0;
  for (double t = 0.0; t <= 25.0; t += 0.2)
    worst_chisq = std::max(worst_chisq, std::fabs(chisq_cdf(t, 2.0) - (1.0 - std::exp(-0.5 * t))));
  double worst_round = 0.0;
  for (const FParams fp : {FParams{1.0, 9.0}, FParams{5.0, 5.0}, FParams{3.0, 27.0}}) {
    for (double x : {0.05, 0.2, 0.7, 1.0, 1.9, 5.5, 11.0}) {
      const double back = f_quantile(f_cdf(x, fp), fp);
      worst_round = std::max(worst_round, std::fabs(back - x) / std::max(1.0, x));
    }
  }
  report(9, worst_median < 1e-12 && worst_chisq < 1e-12 && worst_round < 1e-8,
         "special-function anchors",
         "median gap " + fmt(worst_median) + ", chi-square gap " + fmt(worst_chisq) +
             ", quantile round-trip " + fmt(worst_round));
}

void criterion_determinism(const std::string& csv_first) {
  const SimConfig cfg = paper_grid_config(3);  // different worker count
  const SimResults rerun = run_grid(cfg);
  const std::string csv_second = results_to_csv(rerun.rows);
  report(10, csv_first == csv_second, "grid rerun with a different worker count is byte-identical",
         csv_first == csv_second ? "CSV outputs match" : "CSV outputs differ");
}

}  // namespace

int main() {
  std::string csv_first;
  criteria_grid(&csv_first);
  criterion_sandwich();
  criterion_ordering();
  criterion_derivatives();
  criterion_concavity();
  criterion_reductions();
  criterion_special_functions();
  criterion_determinism(csv_first);

  if (failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
