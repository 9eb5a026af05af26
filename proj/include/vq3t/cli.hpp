#pragma once
// Experiment front end behind the command-line tool: plain-text experiment
// configuration, the five commands (quantize, attn-check, simulate, sweep,
// selftest), and machine-readable reports. Every run is fully determined
// by (config, seeds): JSON objects serialize with sorted keys, numbers use
// round-trip formatting, and nothing time- or path-dependent enters file
// contents, so identical configs produce byte-identical reports.
//
// Exit codes: 0 success, 1 usage error (bad flags, bad config, unwritable
// output), 2 suite failure, 3 infeasible-hardware flag in a report.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "vq3t/attention.hpp"
#include "vq3t/dct.hpp"
#include "vq3t/hadamard.hpp"
#include "vq3t/hwcfg.hpp"
#include "vq3t/pe.hpp"
#include "vq3t/pipeline.hpp"
#include "vq3t/saliency.hpp"
#include "vq3t/sim.hpp"

namespace vq3t {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Environment variable naming a default hardware description file; the
// --hw flag and the [run] hw key take precedence.
inline constexpr const char* kHwEnvVar = "VQ3T_HW";

// Usage-level problems map to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ModelSpec model;  // defaults below: the small four-block study model
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<PrecisionMode> modes = {PrecisionMode::Bf16, PrecisionMode::W4A8,
                                      PrecisionMode::W4A4};
  QuantMethod method = QuantMethod::VersaQ;
  std::vector<std::size_t> frames_list = {1, 16};
  std::string input_kind = "gaussian";  // gaussian | saturated | spiky
  std::string hw_path;                  // empty: environment, then defaults
  std::string out_dir = "reports";

  std::vector<std::size_t> attn_lengths = {64, 192, 1030};
  std::vector<std::pair<std::size_t, std::size_t>> attn_tiles = {{64, 64},
                                                                 {32, 128}};
  double attn_tolerance = 1e-10;

  int sweep_lo = 3, sweep_hi = 8;
  int sweep_fixed_weight = 4, sweep_fixed_act = 8;

  ExperimentConfig() {
    model.frames = 2;
    model.tokens_per_frame = 32;
    model.channels = 128;
    model.heads = 4;
    model.blocks = 4;
    model.mlp_ratio = 2;
  }
};

// ---------------------------------------------------------------------------
// Name <-> enum plumbing shared by the config parser and the flag layer

inline PrecisionMode mode_from_name(const std::string& s) {
  if (s == "bf16") return PrecisionMode::Bf16;
  if (s == "w4a8") return PrecisionMode::W4A8;
  if (s == "w4a4") return PrecisionMode::W4A4;
  throw UsageError("unknown mode '" + s + "' (expected bf16|w4a8|w4a4)");
}

inline QuantMethod method_from_name(const std::string& s) {
  if (s == "rtn") return QuantMethod::Rtn;
  if (s == "wht") return QuantMethod::WhtOnly;
  if (s == "versaq") return QuantMethod::VersaQ;
  throw UsageError("unknown method '" + s + "' (expected rtn|wht|versaq)");
}

namespace clidetail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

inline std::int64_t to_int(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long n = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected an integer, got '" + v + "'");
  }
}

inline double to_double(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a number, got '" + v + "'");
  }
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace clidetail

inline std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : clidetail::split(s, ','))
    seeds.push_back(std::uint64_t(clidetail::to_int(item, "seed list")));
  if (seeds.empty()) throw UsageError("seed list: no seeds given");
  return seeds;
}

// ---------------------------------------------------------------------------
// Experiment configuration file: key = value lines under [section] headers.
// Sections: [model], [run], [attn], [sweep]. Unknown sections or keys are
// errors that name the offender; CLI flags override file values.

inline ExperimentConfig parse_experiment_config(std::istream& in) {
  using clidetail::split;
  using clidetail::to_double;
  using clidetail::to_int;
  using clidetail::trim;

  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError("config line " + std::to_string(lineno) +
                         ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "run" && section != "attn" &&
          section != "sweep")
        throw UsageError("config: unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw UsageError("config line " + std::to_string(lineno) + ": key '" +
                       key + "' outside any [section]");
    const std::string where = "config key '" + key + "'";

    if (section == "model") {
      if (key == "frames") cfg.model.frames = std::size_t(to_int(value, where));
      else if (key == "tokens_per_frame")
        cfg.model.tokens_per_frame = std::size_t(to_int(value, where));
      else if (key == "channels")
        cfg.model.channels = std::size_t(to_int(value, where));
      else if (key == "heads") cfg.model.heads = std::size_t(to_int(value, where));
      else if (key == "blocks")
        cfg.model.blocks = std::size_t(to_int(value, where));
      else if (key == "mlp_ratio")
        cfg.model.mlp_ratio = std::size_t(to_int(value, where));
      else
        throw UsageError("config: unknown key '" + key + "' in [model]");
    } else if (section == "run") {
      if (key == "seeds") cfg.seeds = parse_seed_list(value);
      else if (key == "modes") {
        cfg.modes.clear();
        for (const std::string& m : split(value, ','))
          cfg.modes.push_back(mode_from_name(m));
        if (cfg.modes.empty()) throw UsageError("config: empty modes list");
      } else if (key == "method") cfg.method = method_from_name(value);
      else if (key == "frames_list") {
        cfg.frames_list.clear();
        for (const std::string& f : split(value, ','))
          cfg.frames_list.push_back(std::size_t(to_int(f, where)));
        if (cfg.frames_list.empty())
          throw UsageError("config: empty frames_list");
      } else if (key == "input") {
        if (value != "gaussian" && value != "saturated" && value != "spiky")
          throw UsageError("config: unknown input kind '" + value + "'");
        cfg.input_kind = value;
      } else if (key == "hw") cfg.hw_path = value;
      else if (key == "out") cfg.out_dir = value;
      else
        throw UsageError("config: unknown key '" + key + "' in [run]");
    } else if (section == "attn") {
      if (key == "lengths") {
        cfg.attn_lengths.clear();
        for (const std::string& l : split(value, ','))
          cfg.attn_lengths.push_back(std::size_t(to_int(l, where)));
      } else if (key == "tiles") {
        cfg.attn_tiles.clear();
        for (const std::string& t : split(value, ',')) {
          std::size_t x = t.find('x');
          if (x == std::string::npos)
            throw UsageError("config: tile '" + t + "' is not t_qxt_k");
          cfg.attn_tiles.emplace_back(
              std::size_t(to_int(trim(t.substr(0, x)), where)),
              std::size_t(to_int(trim(t.substr(x + 1)), where)));
        }
      } else if (key == "tolerance") cfg.attn_tolerance = to_double(value, where);
      else
        throw UsageError("config: unknown key '" + key + "' in [attn]");
    } else {  // sweep
      if (key == "lo") cfg.sweep_lo = int(to_int(value, where));
      else if (key == "hi") cfg.sweep_hi = int(to_int(value, where));
      else if (key == "fixed_weight_bits")
        cfg.sweep_fixed_weight = int(to_int(value, where));
      else if (key == "fixed_act_bits")
        cfg.sweep_fixed_act = int(to_int(value, where));
      else
        throw UsageError("config: unknown key '" + key + "' in [sweep]");
    }
  }
  cfg.model.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  return parse_experiment_config(in);
}

// Hardware description precedence: explicit path (flag or [run] hw key),
// then the environment default, then built-in values.
inline HardwareConfig resolve_hardware(const ExperimentConfig& cfg) {
  try {
    if (!cfg.hw_path.empty()) return load_hardware_config(cfg.hw_path);
    if (const char* env = std::getenv(kHwEnvVar); env && *env)
      return load_hardware_config(env);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return HardwareConfig{};
}

// ---------------------------------------------------------------------------
// Report plumbing

namespace clidetail {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string());
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("cannot write " + path.string());
}

inline void write_json(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

inline json json_model(const ModelSpec& m) {
  return json{{"frames", m.frames},
              {"tokens_per_frame", m.tokens_per_frame},
              {"channels", m.channels},
              {"heads", m.heads},
              {"blocks", m.blocks},
              {"mlp_ratio", m.mlp_ratio}};
}

inline json json_hardware(const HardwareConfig& hw) {
  return json{{"bfu_rows", hw.bfu_rows},
              {"bfu_cols", hw.bfu_cols},
              {"int8_rows", hw.int8_rows},
              {"int8_cols", hw.int8_cols},
              {"int4_rows", hw.int4_rows},
              {"int4_cols", hw.int4_cols},
              {"weight_buffer_bytes", hw.weight_buffer_bytes},
              {"input_buffer_bytes", hw.input_buffer_bytes},
              {"output_buffer_bytes", hw.output_buffer_bytes},
              {"clock_hz", hw.clock_hz},
              {"dram_bytes_per_cycle", hw.dram_bytes_per_cycle},
              {"dram_pj_per_bit", hw.dram_pj_per_bit},
              {"power_bfu_array", hw.power_bfu_array},
              {"power_qu", hw.power_qu},
              {"power_weight_buf", hw.power_weight_buf},
              {"power_input_buf", hw.power_input_buf},
              {"power_output_buf", hw.power_output_buf},
              {"qu_values_per_cycle", hw.qu_values_per_cycle},
              {"exp_bfu_ops", hw.exp_bfu_ops}};
}

inline json json_sim_report(const SimReport& r) {
  return json{
      {"total_cycles", r.total_cycles},
      {"phases",
       {{"weight_load", r.phases.weight_load},
        {"compute_int", r.phases.compute_int},
        {"compute_bf16", r.phases.compute_bf16},
        {"dram_stall", r.phases.dram_stall}}},
      {"energy",
       {{"bfu_array_j", r.energy.bfu_array},
        {"qu_j", r.energy.qu},
        {"weight_buf_j", r.energy.weight_buf},
        {"input_buf_j", r.energy.input_buf},
        {"output_buf_j", r.energy.output_buf},
        {"dram_j", r.energy.dram},
        {"total_j", r.energy.total()}}},
      {"peaks",
       {{"weight_bytes", r.peak_bytes.weight},
        {"input_bytes", r.peak_bytes.input},
        {"output_bytes", r.peak_bytes.output}}},
      {"breakdown",
       {{"weight_load", r.breakdown.weight_load},
        {"attention", r.breakdown.attention},
        {"other", r.breakdown.other}}},
      {"utilization", r.utilization},
      {"feasible", r.feasible},
      {"flags", r.flags}};
}

// Every report embeds the resolved configuration and the artifact version.
inline json report_header(const ExperimentConfig& cfg, const char* command) {
  json seeds = json::array();
  for (std::uint64_t s : cfg.seeds) seeds.push_back(s);
  return json{{"artifact_version", kArtifactVersion},
              {"command", command},
              {"config",
               {{"model", json_model(cfg.model)},
                {"seeds", seeds},
                {"method", method_name(cfg.method)},
                {"input", cfg.input_kind}}}};
}

// Paired study seeds: the model draw and the activation draw come from
// disjoint streams so per-seed comparisons across methods share both.
inline std::uint64_t model_seed(std::uint64_t s) { return 1000 + s; }
inline std::uint64_t input_seed(std::uint64_t s) { return 5000 + s; }

inline SynthKind input_kind_enum(const std::string& name) {
  if (name == "saturated") return SynthKind::SaturatedChannels;
  if (name == "spiky") return SynthKind::SpikyOutliers;
  return SynthKind::Gaussian;
}

inline DenseMatrix study_inputs(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::size_t rows = cfg.model.frames * cfg.model.tokens_per_frame;
  return synth_activations(input_kind_enum(cfg.input_kind), rows,
                           cfg.model.channels, input_seed(seed));
}

// Direct per-head attention, the oracle for the tiled kernel.
inline DenseMatrix naive_attention(const DenseMatrix& q, const DenseMatrix& k,
                                   const DenseMatrix& v,
                                   const AttentionConfig& cfg) {
  const std::size_t n = q.rows, dk = cfg.d_k;
  DenseMatrix out(n, cfg.C);
  for (std::size_t h = 0; h < cfg.h; ++h) {
    const std::size_t c0 = h * dk;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(n);
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < dk; ++d)
          s += q.at(i, c0 + d) * k.at(j, c0 + d);
        row[j] = s * cfg.softmax_scale;
        m = std::max(m, row[j]);
      }
      double sum = 0.0;
      for (double& s : row) {
        s = std::exp(s - m);
        sum += s;
      }
      for (std::size_t d = 0; d < dk; ++d) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          acc += row[j] / sum * v.at(j, c0 + d);
        out.at(i, c0 + d) = acc;
      }
    }
  }
  return out;
}

}  // namespace clidetail

// ---------------------------------------------------------------------------
// quantize: the {RTN, WhtOnly, VersaQ} x {W4A8, W4A4} study over the seed
// list. Per-run JSON metrics plus one summary CSV with canonical row order.

inline int cmd_quantize(const ExperimentConfig& cfg) {
  namespace cd = clidetail;
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  cd::ensure_dir(out / "quantize");

  struct Row {
    std::string method, mode;
    std::uint64_t seed;
    ErrorStats stats;
  };
  std::vector<Row> rows;

  const QuantMethod methods[] = {QuantMethod::Rtn, QuantMethod::WhtOnly,
                                 QuantMethod::VersaQ};
  const PrecisionMode modes[] = {PrecisionMode::W4A8, PrecisionMode::W4A4};
  for (std::uint64_t seed : cfg.seeds) {
    const Model m = init_model(cfg.model, cd::model_seed(seed));
    const DenseMatrix x = cd::study_inputs(cfg, seed);
    const RunResult ref = run_reference(m, x);
    for (QuantMethod method : methods)
      for (PrecisionMode mode : modes) {
        RunResult r = run_quantized(m, x, mode, method, {}, &ref);
        rows.push_back({method_name(method), mode_name(mode), seed, r.metrics});

        cd::json j = cd::report_header(cfg, "quantize");
        j["method"] = method_name(method);
        j["mode"] = mode_name(mode);
        j["seed"] = seed;
        j["metrics"] = {{"mse", r.metrics.mse},
                        {"cosine", r.metrics.cosine},
                        {"max_abs", r.metrics.max_abs}};
        cd::write_json(out / "quantize" /
                           (std::string(method_name(method)) + "-" +
                            mode_name(mode) + "-seed" + std::to_string(seed) +
                            ".json"),
                       j);
      }
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.method, a.mode, a.seed) <
           std::tie(b.method, b.mode, b.seed);
  });
  std::string csv = "method,mode,seed,mse,cosine,max_abs\n";
  for (const Row& r : rows)
    csv += r.method + "," + r.mode + "," + std::to_string(r.seed) + "," +
           cd::fmt(r.stats.mse) + "," + cd::fmt(r.stats.cosine) + "," +
           cd::fmt(r.stats.max_abs) + "\n";
  cd::write_file(out / "quantize_summary.csv", csv);
  return 0;
}

// ---------------------------------------------------------------------------
// attn-check: tiled kernel against the direct oracle over the configured
// sequence lengths and tile shapes, in f64 so only the tiling can differ.

inline int cmd_attn_check(const ExperimentConfig& cfg) {
  namespace cd = clidetail;
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  cd::ensure_dir(out);

  cd::json cases = cd::json::array();
  bool all_pass = true;
  for (std::size_t L : cfg.attn_lengths)
    for (auto [tq, tk] : cfg.attn_tiles) {
      const AttentionConfig acfg = attention_config(1, L, 64, 4);
      Rng rng(cd::model_seed(cfg.seeds.empty() ? 1 : cfg.seeds.front()) ^ L);
      DenseMatrix q(L, 64), k(L, 64), v(L, 64);
      for (double* m : {&q.data[0], &k.data[0], &v.data[0]})
        for (std::size_t i = 0; i < L * 64; ++i) m[i] = rng.normal();

      TileConfig tiles;
      tiles.t_q = tq;
      tiles.t_k = tk;
      tiles.t_v = tk * std::max<std::size_t>(1, 2048 / tk);
      TilingStats ts;
      DenseMatrix tiled =
          tiled_attention(q, k, v, acfg, tiles, &ts, SoftmaxPrecision::F64);
      DenseMatrix direct = cd::naive_attention(q, k, v, acfg);
      const double dev = max_abs_diff(tiled, direct);

      // Each head contributes one normalized probability row, so a row's
      // accumulated mass is the head count.
      double prob_dev = 0.0;
      for (double s : ts.prob_row_sums)
        prob_dev = std::max(prob_dev, std::fabs(s - double(acfg.h)));
      const bool pass = dev <= cfg.attn_tolerance && prob_dev <= 1e-12 &&
                        ts.peak_score_entries <= tq * tk && ts.o_rows_in_order;
      all_pass = all_pass && pass;
      cases.push_back({{"seq_len", L},
                       {"t_q", tq},
                       {"t_k", tk},
                       {"max_abs_dev", dev},
                       {"prob_row_sum_dev", prob_dev},
                       {"peak_score_entries", ts.peak_score_entries},
                       {"pass", pass}});
    }

  cd::json j = cd::report_header(cfg, "attn-check");
  j["tolerance"] = cfg.attn_tolerance;
  j["cases"] = cases;
  j["pass"] = all_pass;
  cd::write_json(out / "attn_check_report.json", j);
  std::printf("attn-check: %zu cases, %s\n", cases.size(),
              all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// simulate: whole-model performance reports per (mode, frame count), as a
// breakdown JSON plus a plot-ready CSV. Any infeasible report exits 3.

inline int cmd_simulate(const ExperimentConfig& cfg) {
  namespace cd = clidetail;
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  cd::ensure_dir(out);
  const HardwareConfig hw = resolve_hardware(cfg);

  struct Run {
    std::string mode;
    std::size_t frames;
    SimReport report;
  };
  std::vector<Run> runs;
  for (PrecisionMode mode : cfg.modes)
    for (std::size_t S : cfg.frames_list) {
      ModelSpec spec = cfg.model;
      spec.frames = S;
      runs.push_back({mode_name(mode), S, simulate_model(hw, spec, mode, cfg.method)});
    }
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
    return std::tie(a.mode, a.frames) < std::tie(b.mode, b.frames);
  });

  bool feasible = true;
  cd::json jruns = cd::json::array();
  std::string csv = "mode,S,total_cycles,weight_load,attention,other,energy_j\n";
  for (const Run& r : runs) {
    feasible = feasible && r.report.feasible;
    cd::json jr = cd::json_sim_report(r.report);
    jr["mode"] = r.mode;
    jr["frames"] = r.frames;
    jruns.push_back(jr);
    csv += r.mode + "," + std::to_string(r.frames) + "," +
           std::to_string(r.report.total_cycles) + "," +
           std::to_string(r.report.breakdown.weight_load) + "," +
           std::to_string(r.report.breakdown.attention) + "," +
           std::to_string(r.report.breakdown.other) + "," +
           cd::fmt(r.report.energy.total()) + "\n";
  }

  cd::json j = cd::report_header(cfg, "simulate");
  j["config"]["hardware"] = cd::json_hardware(hw);
  j["runs"] = jruns;
  j["feasible"] = feasible;
  cd::write_json(out / "simulate_report.json", j);
  cd::write_file(out / "simulate_summary.csv", csv);
  if (!feasible) std::fprintf(stderr, "simulate: infeasible hardware flags raised\n");
  return feasible ? 0 : 3;
}

// ---------------------------------------------------------------------------
// sweep: bit-width curves per method, one axis at a time. Each CSV holds
// |methods| * |bit range| * |seeds| rows in canonical order.

inline int cmd_sweep(const ExperimentConfig& cfg) {
  namespace cd = clidetail;
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  cd::ensure_dir(out);
  if (cfg.sweep_lo > cfg.sweep_hi)
    throw UsageError("sweep: lo exceeds hi");

  struct Row {
    std::string method;
    int w_bits, a_bits;
    std::uint64_t seed;
    ErrorStats stats;
  };
  const QuantMethod methods[] = {QuantMethod::Rtn, QuantMethod::WhtOnly,
                                 QuantMethod::VersaQ};

  for (SweepAxis axis : {SweepAxis::ActivationBits, SweepAxis::WeightBits}) {
    const int fixed = axis == SweepAxis::ActivationBits ? cfg.sweep_fixed_weight
                                                        : cfg.sweep_fixed_act;
    std::vector<Row> rows;
    for (std::uint64_t seed : cfg.seeds) {
      const Model m = init_model(cfg.model, cd::model_seed(seed));
      const DenseMatrix x = cd::study_inputs(cfg, seed);
      for (QuantMethod method : methods) {
        auto curve = bitwidth_sweep(m, x, method, axis, fixed, cfg.sweep_lo,
                                    cfg.sweep_hi);
        for (const SweepPoint& p : curve) {
          const int wb = axis == SweepAxis::WeightBits ? p.bits : fixed;
          const int ab = axis == SweepAxis::WeightBits ? fixed : p.bits;
          rows.push_back({method_name(method), wb, ab, seed, p.metrics});
        }
      }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return std::tie(a.method, a.w_bits, a.a_bits, a.seed) <
             std::tie(b.method, b.w_bits, b.a_bits, b.seed);
    });
    std::string csv = "method,w_bits,a_bits,seed,mse,cosine,max_abs\n";
    for (const Row& r : rows)
      csv += r.method + "," + std::to_string(r.w_bits) + "," +
             std::to_string(r.a_bits) + "," + std::to_string(r.seed) + "," +
             cd::fmt(r.stats.mse) + "," + cd::fmt(r.stats.cosine) + "," +
             cd::fmt(r.stats.max_abs) + "\n";
    cd::write_file(out / (axis == SweepAxis::ActivationBits
                              ? "sweep_vary_act.csv"
                              : "sweep_vary_weight.csv"),
                   csv);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: the fast correctness gates, one PASS/FAIL line per suite and a
// JSON report; any failure exits 2.

inline int cmd_selftest(const ExperimentConfig& cfg) {
  namespace cd = clidetail;
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  cd::ensure_dir(out);

  struct Suite {
    std::string name, detail;
    bool pass;
  };
  std::vector<Suite> suites;

  {  // Exhaustive bit-fusion equivalence.
    int bad = 0;
    for (int a = -128; a <= 127; ++a)
      for (int b = -128; b <= 127; ++b)
        if (int8_mac_bitfusion(a, b, 0) != a * b) ++bad;
    suites.push_back({"bitfusion-exhaustive",
                      "65536 pairs, " + std::to_string(bad) + " mismatches",
                      bad == 0});
  }

  {  // BFU against the reference rounding on a seeded sample plus corners.
    std::mt19937_64 rng(0x5EEDF00Du);
    int bad = 0, tested = 0;
    auto check = [&](std::uint16_t pa, std::uint16_t pb) {
      Bf16 a = bf16_from_bits(pa), b = bf16_from_bits(pb);
      Bf16 fa = bf16_flush_subnormal(a), fb = bf16_flush_subnormal(b);
      if (bfu_fpadd(a, b).bits !=
          bf16_flush_subnormal(bf16_add(fa, fb)).bits)
        ++bad;
      if (bfu_fpmul(a, b).bits !=
          bf16_flush_subnormal(bf16_mul(fa, fb)).bits)
        ++bad;
      ++tested;
    };
    while (tested < 200000) {
      std::uint16_t pa = std::uint16_t(rng()), pb = std::uint16_t(rng());
      if (((pa >> 7) & 0xFF) == 0xFF || ((pb >> 7) & 0xFF) == 0xFF) continue;
      check(pa, pb);
    }
    const std::uint16_t corners[] = {0x0000, 0x8000, 0x0080, 0x8080,
                                     0x7F7F, 0xFF7F, 0x3F81, 0x3F7F};
    for (std::uint16_t a : corners)
      for (std::uint16_t b : corners) check(a, b);
    suites.push_back({"bfu-reference-sample",
                      std::to_string(tested) + " pairs, " +
                          std::to_string(bad) + " mismatches",
                      bad == 0});
  }

  {  // Transform orthogonality and fast-path agreement.
    double worst_gram = 0.0, worst_fast = 0.0, worst_dct = 0.0;
    for (std::size_t n : {2, 8, 64, 256}) {
      DenseMatrix h = hadamard_matrix(n);
      DenseMatrix g = matmul(h, transpose(h));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          worst_gram = std::max(
              worst_gram, std::fabs(g.at(i, j) - (i == j ? 1.0 : 0.0)));
    }
    {
      Rng rng(99);
      DenseMatrix x(8, 512);
      for (double& v : x.data) v = rng.normal();
      DenseMatrix fast = apply_wht(x, Axis::Rows);
      DenseMatrix dense = matmul(x, transpose(hadamard_matrix(512)));
      worst_fast = max_abs_diff(fast, dense) / std::max(1.0, max_abs(dense));
    }
    {
      Rng rng(100);
      DenseMatrix x(8, 128);
      for (double& v : x.data) v = rng.normal();
      DctMatrix d = dct_matrix(128, DctVariant::Orthonormal);
      DenseMatrix rt = apply_idct(apply_dct(x, d, Axis::Rows), d, Axis::Rows);
      worst_dct = max_abs_diff(rt, x) / std::max(1.0, max_abs(x));
    }
    const bool pass =
        worst_gram < 1e-12 && worst_fast < 1e-10 && worst_dct < 1e-10;
    suites.push_back({"transform-orthogonality",
                      "gram " + cd::fmt(worst_gram) + ", fast-wht " +
                          cd::fmt(worst_fast) + ", dct-roundtrip " +
                          cd::fmt(worst_dct),
                      pass});
  }

  {  // Streaming softmax statistics against direct statistics, then the
     // tiled kernel against the direct oracle on a ragged shape.
    Rng rng(4242);
    double worst_stats = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t rows = 8, cols = 257;
      DenseMatrix s(rows, cols);
      for (double& v : s.data) v = 3.0 * rng.normal();
      SoftmaxStats st(rows);
      std::size_t c0 = 0;
      while (c0 < cols) {
        std::size_t w = 1 + std::size_t(rng.index(64));
        w = std::min(w, cols - c0);
        std::vector<double> tmax(rows, -1e300), tsum(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = c0; c < c0 + w; ++c)
            tmax[r] = std::max(tmax[r], s.at(r, c));
          for (std::size_t c = c0; c < c0 + w; ++c)
            tsum[r] += std::exp(s.at(r, c) - tmax[r]);
        }
        streaming_update(st, tmax, tsum);
        c0 += w;
      }
      for (std::size_t r = 0; r < rows; ++r) {
        double m = -1e300, sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) m = std::max(m, s.at(r, c));
        for (std::size_t c = 0; c < cols; ++c) sum += std::exp(s.at(r, c) - m);
        worst_stats = std::max(worst_stats, std::fabs(st.m[r] - m));
        worst_stats =
            std::max(worst_stats, std::fabs(st.sigma[r] - sum) /
                                      std::max(1.0, std::fabs(sum)));
      }
    }
    const AttentionConfig acfg = attention_config(1, 1030, 64, 4);
    DenseMatrix q(1030, 64), k(1030, 64), v(1030, 64);
    Rng arng(77);
    for (double* m : {&q.data[0], &k.data[0], &v.data[0]})
      for (std::size_t i = 0; i < q.data.size(); ++i) m[i] = arng.normal();
    TilingStats ts;
    DenseMatrix tiled =
        tiled_attention(q, k, v, acfg, TileConfig{}, &ts, SoftmaxPrecision::F64);
    const double dev = max_abs_diff(tiled, cd::naive_attention(q, k, v, acfg));
    const bool pass = worst_stats < 1e-12 && dev < 1e-10 &&
                      ts.peak_score_entries <= 64 * 64 && ts.o_rows_in_order;
    suites.push_back({"streaming-softmax",
                      "stats " + cd::fmt(worst_stats) + ", tiled-vs-direct " +
                          cd::fmt(dev),
                      pass});
  }

  bool all = true;
  cd::json jsuites = cd::json::array();
  for (const Suite& s : suites) {
    all = all && s.pass;
    std::printf("%s %s (%s)\n", s.pass ? "PASS" : "FAIL", s.name.c_str(),
                s.detail.c_str());
    jsuites.push_back({{"name", s.name}, {"detail", s.detail}, {"pass", s.pass}});
  }
  cd::json j = cd::report_header(cfg, "selftest");
  j["suites"] = jsuites;
  j["pass"] = all;
  cd::write_json(out / "selftest_report.json", j);
  std::printf("selftest: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 2;
}

}  // namespace vq3t
