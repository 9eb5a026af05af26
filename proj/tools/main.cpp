// Command-line front end over the experiment suite:
//   vq3t quantize | attn-check | simulate | sweep | selftest [flags]
// Flags override config-file values; exit codes are 0 success, 1 usage
// error, 2 suite failure, 3 infeasible hardware.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "vq3t/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"versatile-quantization accelerator study driver"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, seeds, out_dir, hw_path, modes, method, frames;
  app.add_option("--config", config_path,
                 "experiment config file ([section] key = value lines)");
  app.add_option("--seeds", seeds, "comma-separated seed list override");
  app.add_option("--out", out_dir, "output directory for reports");
  app.add_option("--hw", hw_path,
                 "hardware description file (else $VQ3T_HW, else defaults)");
  app.add_option("--modes", modes,
                 "precision modes for simulate, e.g. bf16,w4a8,w4a4");
  app.add_option("--method", method, "quantization method: rtn|wht|versaq");
  app.add_option("--frames", frames,
                 "frame counts for simulate, e.g. 1,16");

  CLI::App* c_quant = app.add_subcommand(
      "quantize", "method x mode reconstruction-error study over the seeds");
  CLI::App* c_attn = app.add_subcommand(
      "attn-check", "tiled attention against the direct oracle");
  CLI::App* c_sim = app.add_subcommand(
      "simulate", "whole-model cycle and energy reports per mode and frame count");
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "bit-width error curves per method");
  CLI::App* c_self = app.add_subcommand(
      "selftest", "fast numeric gates, one PASS/FAIL line per suite");
  (void)c_self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    vq3t::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = vq3t::load_experiment_config(config_path);
    if (!seeds.empty()) cfg.seeds = vq3t::parse_seed_list(seeds);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!hw_path.empty()) cfg.hw_path = hw_path;
    if (!method.empty()) cfg.method = vq3t::method_from_name(method);
    if (!modes.empty()) {
      cfg.modes.clear();
      for (const std::string& m : vq3t::clidetail::split(modes, ','))
        cfg.modes.push_back(vq3t::mode_from_name(m));
    }
    if (!frames.empty()) {
      cfg.frames_list.clear();
      for (const std::string& f : vq3t::clidetail::split(frames, ','))
        cfg.frames_list.push_back(
            std::size_t(vq3t::clidetail::to_int(f, "frames list")));
    }

    if (*c_quant) return vq3t::cmd_quantize(cfg);
    if (*c_attn) return vq3t::cmd_attn_check(cfg);
    if (*c_sim) return vq3t::cmd_simulate(cfg);
    if (*c_sweep) return vq3t::cmd_sweep(cfg);
    return vq3t::cmd_selftest(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "vq3t: %s\n", e.what());
    return 1;
  }
}
