#include "mbf/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "json.hpp"

#include "mbf/io.hpp"
#include "mbf/parallel.hpp"
#include "mbf/rng.hpp"

namespace mbf {

namespace {

constexpr long kRepsFloor = 1000;
constexpr int kSigmaWishartDf = 10;

const char* kCsvHeader = "m,n,k,alpha,method,reps,rejections,empirical_size,mc_se";

// shared by the emitters and the chart: method display order == enum order
int method_index(Method m) {
  for (std::size_t i = 0; i < kAllMethods.size(); ++i)
    if (kAllMethods[i] == m) return static_cast<int>(i);
  return -1;
}

struct SettingCounts {
  std::vector<long> rejections;  // methods x alphas, row-major
  long resamples = 0;
};

// One replication of the direct experiment: sample X ~ N(0, Sigma)^m and
// Y ~ N(0, k Sigma)^n, then apply every method to the shared data.
// Returns false when a sample covariance came out rank deficient.
bool direct_replication(RngStream& s, const Matrix& chol_x, const Matrix& chol_y, Matrix& x,
                        Matrix& y, Vec& z, std::vector<TestResult>& results) {
  const int p = chol_x.rows();
  for (int r = 0; r < x.rows(); ++r) {
    sample_normal_fill(s, z.data(), p);
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int k = 0; k <= j; ++k) acc += chol_x(j, k) * z[k];
      x(r, j) = acc;
    }
  }
  for (int r = 0; r < y.rows(); ++r) {
    sample_normal_fill(s, z.data(), p);
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int k = 0; k <= j; ++k) acc += chol_y(j, k) * z[k];
      y(r, j) = acc;
    }
  }
  try {
    results = run_all_tests(TwoSampleData{x, y});
  } catch (const RankDeficientSample&) {
    return false;
  }
  return true;
}

}  // namespace

std::string_view sim_mode_name(SimMode mode) {
  return mode == SimMode::Direct ? "direct" : "canonical";
}

void validate(const SimConfig& config) {
  if (config.p < 1) throw InvalidArgument("sim config: p must be >= 1");
  if (config.grid.empty()) throw InvalidArgument("sim config: grid must not be empty");
  if (config.alphas.empty()) throw InvalidArgument("sim config: alphas must not be empty");
  if (config.reps < kRepsFloor)
    throw InvalidArgument("sim config: reps must be >= " + std::to_string(kRepsFloor));
  for (double a : config.alphas)
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("sim config: alphas must be in (0, 1)");
  for (const GridSetting& g : config.grid) {
    if (!(g.k > 0.0)) throw InvalidArgument("sim config: k must be > 0");
    if (config.p >= std::min(g.m, g.n))
      throw InvalidArgument("sim config: p must be < min(m, n) for every setting");
  }
}

SimConfig sim_config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("sim config: invalid JSON: ") + e.what());
  }
  SimConfig cfg;
  try {
    cfg.p = doc.at("p").get<int>();
    for (const auto& entry : doc.at("grid")) {
      if (!entry.is_array() || entry.size() != 3)
        throw InvalidArgument("sim config: grid entries must be [m, n, k]");
      cfg.grid.push_back({entry[0].get<int>(), entry[1].get<int>(), entry[2].get<double>()});
    }
    cfg.alphas = doc.at("alphas").get<std::vector<double>>();
    cfg.reps = doc.at("reps").get<long>();
    if (doc.contains("base_seed")) cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
    if (doc.contains("mode")) {
      const std::string mode = doc["mode"].get<std::string>();
      if (mode == "direct")
        cfg.mode = SimMode::Direct;
      else if (mode == "canonical")
        cfg.mode = SimMode::Canonical;
      else
        throw InvalidArgument("sim config: mode must be 'direct' or 'canonical'");
    }
    if (doc.contains("sigma_seed")) cfg.sigma_seed = doc["sigma_seed"].get<std::uint64_t>();
    if (doc.contains("parallelism")) cfg.parallelism = doc["parallelism"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sim config: schema error: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

namespace {

nlohmann::json config_to_json_value(const SimConfig& config) {
  nlohmann::json grid = nlohmann::json::array();
  for (const GridSetting& g : config.grid) grid.push_back({g.m, g.n, g.k});
  return {{"p", config.p},
          {"grid", grid},
          {"alphas", config.alphas},
          {"reps", config.reps},
          {"base_seed", config.base_seed},
          {"mode", std::string(sim_mode_name(config.mode))},
          {"sigma_seed", config.sigma_seed},
          {"parallelism", config.parallelism}};
}

}  // namespace

std::string sim_config_to_json(const SimConfig& config) {
  return config_to_json_value(config).dump(2) + "\n";
}

SpdMatrix generate_sigma(std::uint64_t sigma_seed, int p) {
  if (p > kSigmaWishartDf)
    throw DfTooSmall("generate_sigma: the 10-df Wishart draw requires p <= 10");
  RngStream s(sigma_seed);
  return sample_wishart(s, SpdMatrix::identity(p), kSigmaWishartDf);
}

std::vector<SettingResult> run_setting(const SimConfig& config, int setting_index,
                                       SettingStats* stats) {
  validate(config);
  if (setting_index < 0 || setting_index >= static_cast<int>(config.grid.size()))
    throw InvalidArgument("run_setting: setting index out of range");
  const GridSetting setting = config.grid[setting_index];
  const int p = config.p;
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<Method> methods;
  if (config.mode == SimMode::Direct) {
    methods.assign(kAllMethods.begin(), kAllMethods.end());
  } else {
    methods = {Method::FBound};
  }
  const int n_methods = static_cast<int>(methods.size());
  const int n_alphas = static_cast<int>(config.alphas.size());

  Matrix chol_x(p, p), chol_y(p, p);
  if (config.mode == SimMode::Direct) {
    const SpdMatrix sigma = generate_sigma(config.sigma_seed, p);
    chol_x = cholesky(sigma).lower();
    const double root_k = std::sqrt(setting.k);
    chol_y = chol_x;
    for (double& v : chol_y.data()) v *= root_k;
  }
  const CanonicalParams canon{lambda_from_k(setting.k, setting.m, setting.n), p, setting.m,
                              setting.n};

  const RngStream setting_stream =
      RngStream(config.base_seed).child(static_cast<std::uint64_t>(setting_index));
  const int workers = resolve_parallelism(config.parallelism);
  std::vector<SettingCounts> partial(workers);
  for (auto& c : partial) c.rejections.assign(n_methods * n_alphas, 0);

  parallel_for(config.reps, workers, [&](long begin, long end, int worker) {
    SettingCounts& counts = partial[worker];
    Matrix x(setting.m, p), y(setting.n, p);
    Vec z(p);
    std::vector<TestResult> results;
    for (long rep = begin; rep < end; ++rep) {
      const RngStream rep_stream = setting_stream.child(static_cast<std::uint64_t>(rep));
      if (config.mode == SimMode::Direct) {
        bool ok = false;
        for (long attempt = 0; attempt < 1000 && !ok; ++attempt) {
          RngStream s = attempt == 0 ? rep_stream
                                     : rep_stream.child(static_cast<std::uint64_t>(attempt));
          ok = direct_replication(s, chol_x, chol_y, x, y, z, results);
          if (!ok) ++counts.resamples;
        }
        if (!ok)
          throw RankDeficientSample("run_setting: persistent rank-deficient replication");
        for (int mi = 0; mi < n_methods; ++mi)
          for (int ai = 0; ai < n_alphas; ++ai)
            if (results[mi].p_value <= config.alphas[ai])
              ++counts.rejections[mi * n_alphas + ai];
      } else {
        RngStream s = rep_stream;
        const double t2 = sample_canonical_t2(canon, s);
        const double pval = fbound_pvalue(t2, p, setting.m, setting.n);
        for (int ai = 0; ai < n_alphas; ++ai)
          if (pval <= config.alphas[ai]) ++counts.rejections[ai];
      }
    }
  });

  std::vector<long> rejections(n_methods * n_alphas, 0);
  long resamples = 0;
  for (const auto& c : partial) {
    resamples += c.resamples;
    for (int i = 0; i < n_methods * n_alphas; ++i) rejections[i] += c.rejections[i];
  }

  std::vector<SettingResult> rows;
  rows.reserve(n_methods * n_alphas);
  for (int mi = 0; mi < n_methods; ++mi) {
    for (int ai = 0; ai < n_alphas; ++ai) {
      const double alpha = config.alphas[ai];
      const long rej = rejections[mi * n_alphas + ai];
      rows.push_back({setting, methods[mi], alpha, config.reps, rej,
                      static_cast<double>(rej) / config.reps,
                      std::sqrt(alpha * (1.0 - alpha) / config.reps)});
    }
  }
  if (stats) {
    stats->setting = setting;
    stats->resamples = resamples;
    stats->elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
  }
  return rows;
}

SimResults run_grid(const SimConfig& config) {
  validate(config);
  SimResults out;
  out.manifest.config = config;
  {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out.manifest.started_at = buf;
  }
  for (int i = 0; i < static_cast<int>(config.grid.size()); ++i) {
    SettingStats stats;
    std::vector<SettingResult> rows = run_setting(config, i, &stats);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    out.manifest.per_setting.push_back(stats);
  }
  return out;
}

std::string results_to_csv(const std::vector<SettingResult>& rows) {
  if (rows.empty()) throw InvalidArgument("results_to_csv: no rows");
  std::string out = kCsvHeader;
  out.push_back('\n');
  for (const SettingResult& r : rows) {
    out += std::to_string(r.setting.m);
    out.push_back(',');
    out += std::to_string(r.setting.n);
    out.push_back(',');
    out += format_double(r.setting.k);
    out.push_back(',');
    out += format_double(r.alpha);
    out.push_back(',');
    out += method_name(r.method);
    out.push_back(',');
    out += std::to_string(r.reps);
    out.push_back(',');
    out += std::to_string(r.rejections);
    out.push_back(',');
    out += format_double(r.empirical_size);
    out.push_back(',');
    out += format_double(r.mc_se);
    out.push_back('\n');
  }
  return out;
}

void emit_csv(const std::vector<SettingResult>& rows, const std::string& path) {
  atomic_write_file(path, results_to_csv(rows));
}

std::vector<SettingResult> results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ParseError("results_from_csv: unexpected header");
  std::vector<SettingResult> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9)
      throw ParseError("results_from_csv: line " + std::to_string(line_no) + ": expected 9 fields");
    const auto method = method_from_string(fields[4]);
    if (!method)
      throw ParseError("results_from_csv: line " + std::to_string(line_no) + ": unknown method");
    SettingResult r{};
    r.setting.m = static_cast<int>(parse_double(fields[0]));
    r.setting.n = static_cast<int>(parse_double(fields[1]));
    r.setting.k = parse_double(fields[2]);
    r.alpha = parse_double(fields[3]);
    r.method = *method;
    r.reps = static_cast<long>(parse_double(fields[5]));
    r.rejections = static_cast<long>(parse_double(fields[6]));
    r.empirical_size = parse_double(fields[7]);
    r.mc_se = parse_double(fields[8]);
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("results_from_csv: no data rows");
  return rows;
}

void emit_json(const SimResults& results, const std::string& path) {
  if (results.rows.empty()) throw InvalidArgument("emit_json: no rows");
  nlohmann::json arr = nlohmann::json::array();
  for (const SettingResult& r : results.rows) {
    arr.push_back({{"m", r.setting.m},
                   {"n", r.setting.n},
                   {"k", r.setting.k},
                   {"alpha", r.alpha},
                   {"method", std::string(method_name(r.method))},
                   {"reps", r.reps},
                   {"rejections", r.rejections},
                   {"empirical_size", r.empirical_size},
                   {"mc_se", r.mc_se}});
  }
  atomic_write_file(path, nlohmann::json{{"results", arr}}.dump(2) + "\n");
}

void emit_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json per_setting = nlohmann::json::array();
  for (const SettingStats& s : manifest.per_setting) {
    per_setting.push_back({{"m", s.setting.m},
                           {"n", s.setting.n},
                           {"k", s.setting.k},
                           {"resamples", s.resamples},
                           {"elapsed_ms", s.elapsed_ms}});
  }
  nlohmann::json doc{{"config", config_to_json_value(manifest.config)},
                     {"sigma_file", manifest.sigma_file},
                     {"started_at", manifest.started_at},
                     {"per_setting", per_setting}};
  atomic_write_file(path, doc.dump(2) + "\n");
}

void emit_sigma_file(const SpdMatrix& sigma, std::uint64_t sigma_seed, const std::string& path) {
  nlohmann::json matrix = nlohmann::json::array();
  for (int i = 0; i < sigma.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < sigma.dim(); ++j) row.push_back(sigma(i, j));
    matrix.push_back(row);
  }
  nlohmann::json doc{{"format", "mbf-sigma-v1"},
                     {"sigma_seed", sigma_seed},
                     {"p", sigma.dim()},
                     {"matrix", matrix}};
  atomic_write_file(path, doc.dump(2) + "\n");
}

namespace {

struct SvgWriter {
  std::string body;

  void append(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    body += buf;
  }
};

const char* kMethodColors[5] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4"};

}  // namespace

std::string results_to_svg(const std::vector<SettingResult>& rows, double alpha) {
  std::vector<SettingResult> filtered;
  for (const SettingResult& r : rows)
    if (r.alpha == alpha) filtered.push_back(r);
  if (filtered.empty()) throw InvalidArgument("results_to_svg: no rows at the requested alpha");

  std::vector<double> ks;
  std::vector<std::pair<int, int>> mns;
  double max_size = 0.0;
  for (const SettingResult& r : filtered) {
    if (std::find(ks.begin(), ks.end(), r.setting.k) == ks.end()) ks.push_back(r.setting.k);
    const std::pair<int, int> mn{r.setting.m, r.setting.n};
    if (std::find(mns.begin(), mns.end(), mn) == mns.end()) mns.push_back(mn);
    max_size = std::max(max_size, r.empirical_size);
  }
  std::sort(ks.begin(), ks.end());
  std::sort(mns.begin(), mns.end());

  const double y_max = std::max(2.0 * alpha, max_size) * 1.08;
  const double cell_w = 150.0, cell_h = 100.0, gap = 18.0;
  const double left = 86.0, top = 64.0;
  const double width = left + mns.size() * (cell_w + gap) + 20.0;
  const double height = top + ks.size() * (cell_h + gap) + 24.0;

  SvgWriter svg;
  svg.append("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  svg.append("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
             "viewBox=\"0 0 %.0f %.0f\">\n",
             width, height, width, height);
  svg.append("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"#ffffff\"/>\n", width,
             height);
  svg.append("<text x=\"%.1f\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
             "Empirical Type I error, alpha = %s</text>\n",
             left, format_double(alpha).c_str());

  // legend
  double lx = left;
  for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
    svg.append("<rect x=\"%.1f\" y=\"26\" width=\"10\" height=\"10\" fill=\"%s\"/>\n", lx,
               kMethodColors[i]);
    svg.append("<text x=\"%.1f\" y=\"35\" font-family=\"sans-serif\" font-size=\"10\">%s</text>\n",
               lx + 13.0, std::string(method_name(kAllMethods[i])).c_str());
    lx += 13.0 + 7.0 * (method_name(kAllMethods[i]).size() + 2);
  }

  for (std::size_t col = 0; col < mns.size(); ++col) {
    svg.append("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"middle\">m=%d, n=%d</text>\n",
               left + col * (cell_w + gap) + cell_w / 2, top - 6.0, mns[col].first,
               mns[col].second);
  }

  for (std::size_t row = 0; row < ks.size(); ++row) {
    const double oy = top + row * (cell_h + gap);
    svg.append("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"end\">k=%s</text>\n",
               left - 8.0, oy + cell_h / 2, format_double(ks[row]).c_str());
    for (std::size_t col = 0; col < mns.size(); ++col) {
      const double ox = left + col * (cell_w + gap);
      svg.append("<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                 "stroke=\"#888888\" stroke-width=\"0.7\"/>\n",
                 ox, oy, cell_w, cell_h);
      // bars for this (k, m, n) cell in method order
      const double slot = cell_w / kAllMethods.size();
      for (const SettingResult& r : filtered) {
        if (r.setting.k != ks[row] || r.setting.m != mns[col].first ||
            r.setting.n != mns[col].second)
          continue;
        const int mi = method_index(r.method);
        const double bar_h = cell_h * r.empirical_size / y_max;
        const double bx = ox + mi * slot + 0.15 * slot;
        svg.append("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                   bx, oy + cell_h - bar_h, 0.7 * slot, bar_h, kMethodColors[mi]);
      }
      // reference line at alpha
      const double ref_y = oy + cell_h - cell_h * alpha / y_max;
      svg.append("<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" stroke=\"#222222\" "
                 "stroke-width=\"0.8\" stroke-dasharray=\"4,3\"/>\n",
                 ox, ref_y, ox + cell_w, ref_y);
    }
  }
  svg.append("</svg>\n");
  return svg.body;
}

void emit_svg(const std::vector<SettingResult>& rows, double alpha, const std::string& path) {
  atomic_write_file(path, results_to_svg(rows, alpha));
}

}  // namespace mbf
