#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbf/bf_test.hpp"
#include "mbf/matrix.hpp"

namespace mbf {

struct GridSetting {
  int m;
  int n;
  double k;  // covariance proportionality factor, > 0
};

enum class SimMode { Direct, Canonical };

std::string_view sim_mode_name(SimMode mode);

// Type I error experiment description. reps has a floor of 1000 so the
// Monte Carlo standard errors stay meaningful.
struct SimConfig {
  int p = 5;
  std::vector<GridSetting> grid;
  std::vector<double> alphas;
  long reps = 20000;
  std::uint64_t base_seed = 1;
  SimMode mode = SimMode::Direct;
  std::uint64_t sigma_seed = 0x5EED;
  int parallelism = 0;  // 0 = auto (MBF_THREADS still wins)
};

void validate(const SimConfig& config);
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& config);

struct SettingResult {
  GridSetting setting;
  Method method;
  double alpha;
  long reps;
  long rejections;
  double empirical_size;  // rejections / reps
  double mc_se;           // sqrt(alpha (1-alpha) / reps)
};

struct SettingStats {
  GridSetting setting;
  long resamples = 0;
  long elapsed_ms = 0;
};

struct RunManifest {
  SimConfig config;
  std::string sigma_file;
  std::string started_at;
  std::vector<SettingStats> per_setting;
};

struct SimResults {
  std::vector<SettingResult> rows;
  RunManifest manifest;
};

// One draw of the population covariance: a fixed realization of a
// 10-df Wishart with identity scale, fully determined by sigma_seed.
SpdMatrix generate_sigma(std::uint64_t sigma_seed, int p);

// Empirical Type I error of every method at every alpha for one grid
// setting. Direct mode samples the two normal samples under the null
// and runs all five tests on the same data; canonical mode draws the
// statistic from its canonical form and covers FBound only.
std::vector<SettingResult> run_setting(const SimConfig& config, int setting_index,
                                       SettingStats* stats = nullptr);

// Full grid; deterministic for a fixed base_seed no matter how many
// workers execute the replications.
SimResults run_grid(const SimConfig& config);

// CSV schema (header exact):
//   m,n,k,alpha,method,reps,rejections,empirical_size,mc_se
void emit_csv(const std::vector<SettingResult>& rows, const std::string& path);
std::string results_to_csv(const std::vector<SettingResult>& rows);
std::vector<SettingResult> results_from_csv(const std::string& text);

void emit_json(const SimResults& results, const std::string& path);
void emit_manifest(const RunManifest& manifest, const std::string& path);

// Bar-chart matrix mirroring the experiment layout: one sub-plot per
// setting (rows = k values, columns = (m,n) pairs), one bar per method,
// horizontal reference line at alpha.
void emit_svg(const std::vector<SettingResult>& rows, double alpha, const std::string& path);
std::string results_to_svg(const std::vector<SettingResult>& rows, double alpha);

void emit_sigma_file(const SpdMatrix& sigma, std::uint64_t sigma_seed, const std::string& path);

}  // namespace mbf
