#include "wpic/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wpic/channel.hpp"
#include "wpic/optimizer.hpp"
#include "wpic/scenario.hpp"
#include "wpic/sweep.hpp"

namespace wpic {

namespace {

struct OptimizeArgs {
  std::string scheme = "asy";
  std::string channels_path;
  std::string out_path;
  bool no_irs = false;
  double eps = 1e-3;
  int max_outer = 100;
};

OptimizationResult run_single(const OptimizeArgs& args) {
  auto [channels, cfg] = load_channel_file(args.channels_path);
  OptimizerConfig opt;
  opt.eps_outer = args.eps;
  opt.max_outer = args.max_outer;
  opt.irs_enabled = !args.no_irs;
  SchemeSpec scheme(scheme_from_string(args.scheme), cfg.K);
  return optimize(scheme, channels, cfg, opt);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"IRS-aided wireless powered interference channel optimizer"};
  app.require_subcommand(1);

  // gen-channels
  auto* gen = app.add_subcommand("gen-channels", "Sample a channel realization");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  bool gen_has_seed = false;
  gen->add_option("--config", gen_config, "Scenario config JSON (default: desk profile)");
  gen->add_option("--seed", gen_seed, "Override the config seed")
      ->each([&](const std::string&) { gen_has_seed = true; });
  gen->add_option("--out", gen_out, "Output channel file")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize", "Optimize one scheme on a stored channel set");
  OptimizeArgs opt_args;
  opt->add_option("--scheme", opt_args.scheme, "asy|tdma|syn")
      ->check(CLI::IsMember({"asy", "tdma", "syn"}))
      ->required();
  opt->add_option("--channels", opt_args.channels_path, "Channel file")->required();
  opt->add_option("--out", opt_args.out_path, "Result JSON")->required();
  opt->add_flag("--no-irs", opt_args.no_irs, "Pin all IRS amplitudes to zero");
  opt->add_option("--eps", opt_args.eps, "Convergence threshold");
  opt->add_option("--max-outer", opt_args.max_outer, "Outer iteration cap");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run a Monte-Carlo parameter sweep");
  std::string swp_spec, swp_csv;
  double swp_eps = 1e-3;
  swp->add_option("--spec", swp_spec, "Sweep spec JSON")->required();
  swp->add_option("--out-csv", swp_csv, "Output CSV")->required();
  swp->add_option("--eps", swp_eps, "Convergence threshold");

  // trace
  auto* trc = app.add_subcommand("trace", "Emit the objective trace of one run");
  OptimizeArgs trc_args;
  std::string trc_out;
  trc->add_option("--channels", trc_args.channels_path, "Channel file")->required();
  trc->add_option("--scheme", trc_args.scheme, "asy|tdma|syn")
      ->check(CLI::IsMember({"asy", "tdma", "syn"}))
      ->required();
  trc->add_option("--out", trc_out, "Trace output, one objective per line")->required();
  trc->add_flag("--no-irs", trc_args.no_irs, "Pin all IRS amplitudes to zero");
  trc->add_option("--eps", trc_args.eps, "Convergence threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      ScenarioConfig cfg =
          gen_config.empty() ? ScenarioConfig::desk_defaults() : ScenarioConfig::load(gen_config);
      if (gen_has_seed) cfg.seed = gen_seed;
      ChannelSet channels = assemble_channels(cfg);
      save_channel_file(gen_out, channels, cfg);
      std::cout << "wrote " << gen_out << " (K=" << cfg.K << " L=" << cfg.L << " M=" << cfg.M
                << " N=" << cfg.n_total() << " seed=" << cfg.seed << ")\n";
    } else if (opt->parsed()) {
      OptimizationResult result = run_single(opt_args);
      result.save(opt_args.out_path);
      std::cout << "scheme=" << opt_args.scheme << " throughput=" << result.sum_throughput
                << " bits/Hz energy=" << result.total_energy << " J iterations="
                << result.iterations << " converged=" << (result.converged ? 1 : 0)
                << " wall_time=" << result.wall_time << " s\n";
    } else if (swp->parsed()) {
      SweepSpec spec = SweepSpec::load(swp_spec);
      OptimizerConfig opt_cfg;
      opt_cfg.eps_outer = swp_eps;
      std::vector<ResultRow> rows = run_sweep(spec, opt_cfg);
      write_csv(swp_csv, rows);
      std::cout << "wrote " << swp_csv << " (" << rows.size() << " rows)\n";
    } else if (trc->parsed()) {
      trc_args.out_path.clear();
      OptimizationResult result = run_single(trc_args);
      std::ofstream out(trc_out);
      if (!out) throw std::runtime_error("cannot write trace file: " + trc_out);
      for (double v : result.objective_trace) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
      }
      std::cout << "wrote " << trc_out << " (" << result.objective_trace.size() << " entries)\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace wpic
