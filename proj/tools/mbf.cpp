#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mbf/bf_test.hpp"
#include "mbf/dist.hpp"
#include "mbf/io.hpp"
#include "mbf/sim.hpp"
#include "mbf/verify.hpp"
#include "mbf/wchisq.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitViolations = 3;

void write_output(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(content.c_str(), stdout);
  } else {
    mbf::atomic_write_file(out_path, content);
  }
}

// ---------------------------------------------------------------- test ----

struct TestArgs {
  std::string x_path;
  std::string y_path;
  std::string method = "all";
  bool header = false;
  std::string out;
};

int cmd_test(const TestArgs& args) {
  const mbf::Matrix x = mbf::load_csv_matrix(args.x_path, args.header);
  const mbf::Matrix y = mbf::load_csv_matrix(args.y_path, args.header);
  if (x.cols() != y.cols())
    throw mbf::DimensionMismatch("column counts differ: " + args.x_path + " has " +
                                 std::to_string(x.cols()) + ", " + args.y_path + " has " +
                                 std::to_string(y.cols()));
  const mbf::TwoSampleData data{x, y};

  std::vector<mbf::TestResult> results;
  if (args.method == "all") {
    results = mbf::run_all_tests(data);
  } else {
    const auto method = mbf::method_from_string(args.method);
    if (!method) throw CLI::ValidationError("--method", "unknown method '" + args.method + "'");
    results.push_back(mbf::run_test(data, *method));
  }

  std::string out = "method,statistic,nu,f_num_df,f_den_df,f_scale,p_value\n";
  for (const mbf::TestResult& r : results) {
    out += std::string(mbf::method_name(r.method));
    out.push_back(',');
    out += mbf::format_double(r.statistic);
    out.push_back(',');
    out += mbf::format_double(r.df.nu);
    out.push_back(',');
    out += mbf::format_double(r.df.f_num_df);
    out.push_back(',');
    out += mbf::format_double(r.df.f_den_df);
    out.push_back(',');
    out += mbf::format_double(r.df.f_scale);
    out.push_back(',');
    out += mbf::format_double(r.p_value);
    out.push_back('\n');
  }
  write_output(out, args.out);
  return kExitOk;
}

// ------------------------------------------------------------ simulate ----

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
};

int cmd_simulate(const SimulateArgs& args) {
  const mbf::SimConfig config = mbf::sim_config_from_json(mbf::read_file(args.config_path));
  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);

  mbf::SimResults results = mbf::run_grid(config);
  if (config.mode == mbf::SimMode::Direct) {
    const mbf::SpdMatrix sigma = mbf::generate_sigma(config.sigma_seed, config.p);
    mbf::emit_sigma_file(sigma, config.sigma_seed, (dir / "sigma.json").string());
    results.manifest.sigma_file = "sigma.json";
  }

  mbf::emit_csv(results.rows, (dir / "results.csv").string());
  mbf::emit_json(results, (dir / "results.json").string());
  for (double alpha : config.alphas)
    mbf::emit_svg(results.rows, alpha,
                  (dir / ("typeI_alpha" + mbf::format_double(alpha) + ".svg")).string());
  mbf::emit_manifest(results.manifest, (dir / "manifest.json").string());
  return kExitOk;
}

// -------------------------------------------------------------- verify ----

struct VerifyArgs {
  std::string which;
  std::uint64_t seed = 20260807;
  std::string out;
  double scale = 1.0;
  bool inject_non_majorized = false;
};

long scaled_count(long base, double scale) {
  const long v = std::lround(static_cast<double>(base) * scale);
  return std::max(1L, v);
}

// Random pair for the ordering check: a positive weight vector and a
// less spread-out version of it produced by Robin Hood transfers, which
// keep the total fixed and only move mass from larger to smaller
// entries.
mbf::MajorizationPair random_majorized_pair(mbf::RngStream& s, int r) {
  mbf::Vec y(r);
  double total = 0.0;
  for (double& v : y) {
    v = 0.05 + 0.95 * s.next_uniform();
    total += v;
  }
  for (double& v : y) v /= total;
  mbf::Vec x = y;
  for (int transfer = 0; transfer < 3 * r; ++transfer) {
    const int i = static_cast<int>(s.next_uniform() * r) % r;
    const int j = static_cast<int>(s.next_uniform() * r) % r;
    if (x[i] <= x[j]) continue;
    const double delta = 0.5 * s.next_uniform() * (x[i] - x[j]);
    x[i] -= delta;
    x[j] += delta;
  }
  return {x, y};
}

int cmd_verify(const VerifyArgs& args) {
  const mbf::RngStream root(args.seed);
  std::vector<mbf::CheckReport> reports;
  const bool all = args.which == "all";

  if (all || args.which == "lemma1") {
    for (int p : {2, 3, 5}) {
      mbf::Lemma1Report r = mbf::check_lemma1(p, static_cast<int>(scaled_count(200, args.scale)),
                                              root.child(1).child(p));
      r.seed = args.seed;
      for (mbf::CheckReport& c : mbf::lemma1_reports(p, r)) reports.push_back(c);
    }
  }
  if (all || args.which == "lemma2") {
    for (int p : {2, 4}) {
      mbf::CheckReport r = mbf::check_lemma2(p, static_cast<int>(scaled_count(100, args.scale)),
                                             root.child(2).child(p));
      r.seed = args.seed;
      reports.push_back(r);
    }
  }
  if (all || args.which == "appendix") {
    for (int p : {2, 4}) {
      mbf::CheckReport r = mbf::check_appendix_concavity(
          p, static_cast<int>(scaled_count(100, args.scale)), root.child(3).child(p));
      r.seed = args.seed;
      reports.push_back(r);
    }
  }
  if (all || args.which == "theorem1") {
    // the three weight vectors of the bound construction form a chain
    {
      const mbf::TheoremWeights w = mbf::build_theorem2_weights(10, 20, 3.0);
      mbf::CheckReport chain;
      chain.name = "theorem1_weight_chain_m10_n20_k3";
      chain.instances = 2;
      chain.violations += mbf::is_majorized({w.psi, w.eta}) ? 0 : 1;
      chain.violations += mbf::is_majorized({w.eta, w.xi}) ? 0 : 1;
      chain.worst_margin = static_cast<double>(chain.instances - chain.violations);
      chain.seed = args.seed;
      reports.push_back(chain);
    }
    const long reps = scaled_count(50000, args.scale);
    const int n_pairs = static_cast<int>(scaled_count(20, args.scale));
    for (int i = 0; i < n_pairs; ++i) {
      mbf::RngStream gen = root.child(4).child(i);
      const int r = 2 + static_cast<int>(gen.next_uniform() * 5) % 5;               // 2..6
      const int p = 1 + static_cast<int>(gen.next_uniform() * 4) % std::min(4, r);  // 1..min(4,r)
      mbf::MajorizationPair pair = random_majorized_pair(gen, r);
      if (args.inject_non_majorized) std::swap(pair.x, pair.y);
      mbf::CheckReport rep = mbf::check_theorem1_report(pair.x, pair.y, p, p + 3, reps,
                                                        root.child(5).child(i));
      rep.name = "theorem1_pair" + std::to_string(i) + "_r" + std::to_string(r) + "_p" +
                 std::to_string(p);
      rep.seed = args.seed;
      reports.push_back(rep);
    }
  }
  if (all || args.which == "theorem2") {
    const long reps = scaled_count(100000, args.scale);
    const int dims[3][3] = {{2, 12, 12}, {5, 10, 50}, {3, 8, 30}};
    int idx = 0;
    for (const auto& d : dims) {
      for (double k : {0.01, 1.0, 100.0}) {
        mbf::CheckReport r =
            mbf::check_theorem2(d[0], d[1], d[2], k, reps, root.child(6).child(idx));
        r.name += "_k" + mbf::format_double(k);
        r.seed = args.seed;
        reports.push_back(r);
        ++idx;
      }
    }
  }

  long violations = 0;
  for (const mbf::CheckReport& r : reports) violations += r.violations;
  write_output(mbf::reports_to_json(reports), args.out);
  return violations > 0 ? kExitViolations : kExitOk;
}

// -------------------------------------------------------------- bounds ----

struct BoundsArgs {
  int p = 0;
  int m = 0;
  int n = 0;
  double t_max = 0.0;  // 0 = derive from the 0.999 quantile of the lower bound
  int t_steps = 50;
};

int cmd_bounds(const BoundsArgs& args) {
  const int mn = std::min(args.m, args.n);
  if (args.p >= mn) throw mbf::DimensionTooLarge("bounds: requires p < min(m, n)");
  double t_max = args.t_max;
  if (t_max <= 0.0) {
    const double q = mbf::f_quantile(
        0.999, mbf::FParams{static_cast<double>(args.p), static_cast<double>(mn - args.p)});
    t_max = q * args.p * (mn - 1) / static_cast<double>(mn - args.p);
  }
  std::string out = "t,lower,upper,fbound_pvalue\n";
  for (int j = 0; j <= args.t_steps; ++j) {
    const double t = t_max * j / args.t_steps;
    const mbf::BoundPair b = mbf::bound_cdfs(t, args.p, args.m, args.n);
    out += mbf::format_double(t);
    out.push_back(',');
    out += mbf::format_double(b.lower);
    out.push_back(',');
    out += mbf::format_double(b.upper);
    out.push_back(',');
    out += mbf::format_double(mbf::fbound_pvalue(t, args.p, args.m, args.n));
    out.push_back('\n');
  }
  std::fputs(out.c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate two-sample mean testing with finite-sample F bounds"};
  app.require_subcommand(1);

  TestArgs test_args;
  CLI::App* test = app.add_subcommand(
      "test", "Run the mean-comparison tests on two CSV samples (rows = observations)");
  test->add_option("--x", test_args.x_path, "CSV file with sample 1")->required();
  test->add_option("--y", test_args.y_path, "CSV file with sample 2")->required();
  test->add_option("--method", test_args.method,
                   "Method: fbound, yao, johansen, nvdm, ky, or all (default all)");
  test->add_flag("--header", test_args.header, "Skip one header line in both CSV files");
  test->add_option("--out", test_args.out, "Write the result CSV here instead of stdout");

  SimulateArgs sim_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the Type I error study described by a config JSON");
  simulate->add_option("--config", sim_args.config_path, "Config JSON path")->required();
  simulate->add_option("--out-dir", sim_args.out_dir, "Output directory")->required();

  VerifyArgs verify_args;
  CLI::App* verify =
      app.add_subcommand("verify", "Numerically verify the distributional properties");
  verify
      ->add_option("--which", verify_args.which,
                   "Check set: lemma1, lemma2, theorem1, theorem2, appendix, or all")
      ->required()
      ->check(CLI::IsMember({"lemma1", "lemma2", "theorem1", "theorem2", "appendix", "all"}));
  verify->add_option("--seed", verify_args.seed, "Base seed (default 20260807)");
  verify->add_option("--out", verify_args.out, "Write the JSON report here instead of stdout");
  verify->add_option("--scale", verify_args.scale,
                     "Scale factor on instance/replication counts (default 1.0)");
  verify->add_flag("--inject-non-majorized", verify_args.inject_non_majorized,
                   "Debug: swap the theorem1 weight pair so the precondition fails");

  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand("bounds", "Tabulate the distribution bounds over t");
  bounds->add_option("--p", bounds_args.p, "Dimension")->required();
  bounds->add_option("--m", bounds_args.m, "Sample size 1")->required();
  bounds->add_option("--n", bounds_args.n, "Sample size 2")->required();
  bounds->add_option("--t-max", bounds_args.t_max, "Largest tabulated t (default: 0.999 quantile)");
  bounds->add_option("--t-steps", bounds_args.t_steps, "Number of grid steps (default 50)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (test->parsed()) return cmd_test(test_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (bounds->parsed()) return cmd_bounds(bounds_args);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mbf::NotMajorized& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mbf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
