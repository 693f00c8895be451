#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "healsim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"healsim: deterministic cycle-driven simulator for decentralized learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool force = false;

  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "override master_seed for every entry");
    if (with_jobs)
      cmd->add_option("--jobs", jobs, "repetitions run in parallel")->capture_default_str();
    cmd->add_flag("--force", force, "overwrite existing outputs");
  };

  CLI::App* run = app.add_subcommand("run", "run every experiment in the config");
  add_common(run, true);

  CLI::App* sweep = app.add_subcommand("sweep", "re-run the first entry across parameter values");
  add_common(sweep, true);
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "parameter to sweep (h, s, n_nodes, cycles, learning_rate)")
      ->required();
  sweep->add_option("--values", values, "values to sweep over")->required()->delimiter(',');

  CLI::App* inspect = app.add_subcommand("inspect-overlay", "export per-cycle overlay graphs");
  add_common(inspect, false);
  std::size_t cycles = 10;
  inspect->add_option("--cycles", cycles, "overlay cycles to export")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    healsim::RunOptions opt;
    opt.config_path = config_path;
    opt.out_dir = out_dir;
    opt.seed_override = seed;
    opt.jobs = jobs;
    opt.force = force;
    return healsim::cmd_run(opt);
  }
  if (sweep->parsed()) {
    healsim::SweepOptions opt;
    opt.config_path = config_path;
    opt.out_dir = out_dir;
    opt.seed_override = seed;
    opt.jobs = jobs;
    opt.force = force;
    opt.param = param;
    opt.values = values;
    return healsim::cmd_sweep(opt);
  }
  healsim::InspectOptions opt;
  opt.config_path = config_path;
  opt.out_dir = out_dir;
  opt.seed_override = seed;
  opt.force = force;
  opt.cycles = cycles;
  return healsim::cmd_inspect_overlay(opt);
}
