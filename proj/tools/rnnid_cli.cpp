// rnnid: run identification experiments from the command line.
//
//   rnnid run --config cfg.json [--trials N] [--seed S] [--out DIR] [--profile quick|paper]
//   rnnid theory --config cfg.json
//   rnnid grid --model gaussian|heavy --out DIR [--profile quick|paper] [--trials N] [--seed S]
//
// Exit status: 0 success, 1 configuration error, 2 I/O error, 3 other failure.

#include "rnnid/rnnid.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

int exit_code(rnnid_status s) {
  switch (s) {
    case RNNID_OK: return 0;
    case RNNID_E_CONFIG:
    case RNNID_E_INVALID_ARGUMENT: return 1;
    case RNNID_E_IO: return 2;
    default: return 3;
  }
}

struct Failure {
  rnnid_status status;
};

void check(rnnid_status s) {
  if (s != RNNID_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(rnnid_config* c) const { rnnid_config_free(c); }
};
struct ResultDeleter {
  void operator()(rnnid_result* r) const { rnnid_result_free(r); }
};
using ConfigPtr = std::unique_ptr<rnnid_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<rnnid_result, ResultDeleter>;

ConfigPtr load(const std::string& path) {
  rnnid_config* raw = nullptr;
  check(rnnid_config_load(path.c_str(), &raw));
  return ConfigPtr(raw);
}

std::string theory_json(const rnnid_config* cfg) {
  std::size_t needed = 0;
  check(rnnid_theory_report_json(cfg, nullptr, 0, &needed));
  std::vector<char> buf(needed);
  check(rnnid_theory_report_json(cfg, buf.data(), buf.size(), &needed));
  return std::string(buf.data());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identification of recurrent networks from a single trajectory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, profile, model;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run one experiment and write its results");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--trials", trials, "Override the number of trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--profile", profile, "Preset sizes and solver settings")->check(CLI::IsMember({"quick", "paper"}));
  run->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* theory = app.add_subcommand("theory", "Print the theory report for a config");
  theory->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* grid = app.add_subcommand("grid", "Run the full (alpha, rho) grid for one input model");
  grid->add_option("--model", model, "Input model")->required()->check(CLI::IsMember({"gaussian", "heavy"}));
  grid->add_option("--out", out_dir, "Output directory")->required();
  grid->add_option("--profile", profile, "Preset sizes and solver settings")->check(CLI::IsMember({"quick", "paper"}));
  grid->add_option("--trials", trials, "Override the number of trials")->check(CLI::PositiveNumber);
  grid->add_option("--seed", seed, "Override the master seed");
  grid->add_option("--threads", threads, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      ConfigPtr cfg = load(config_path);
      if (!profile.empty()) check(rnnid_config_apply_profile(cfg.get(), profile.c_str()));
      if (trials) check(rnnid_config_set_trials(cfg.get(), *trials));
      if (seed) check(rnnid_config_set_seed(cfg.get(), *seed));
      if (!out_dir.empty()) check(rnnid_config_set_output_dir(cfg.get(), out_dir.c_str()));

      rnnid_result* raw = nullptr;
      check(rnnid_experiment_run(cfg.get(), threads, &raw));
      ResultPtr result(raw);
      check(rnnid_result_write(result.get(), nullptr));

      std::size_t iters = 0, n = 0, conv = 0, div = 0;
      check(rnnid_result_iterations(result.get(), &iters));
      check(rnnid_result_trial_summary(result.get(), &n, &conv, &div));
      std::vector<double> median(iters);
      check(rnnid_result_quantiles(result.get(), median.data(), nullptr, nullptr));
      std::cout << "trials " << n << ", converged " << conv << ", diverged " << div << ", final median "
                << (iters ? median.back() : 0.0) << '\n';
    } else if (*theory) {
      ConfigPtr cfg = load(config_path);
      std::cout << theory_json(cfg.get()) << '\n';
    } else if (*grid) {
      const std::uint64_t s = seed.value_or(0);
      check(rnnid_grid_run(model.c_str(), profile.empty() ? nullptr : profile.c_str(), trials.value_or(0),
                           seed ? &s : nullptr, threads, out_dir.c_str()));
      std::cout << "grid written to " << out_dir << '\n';
    }
  } catch (const Failure& f) {
    std::cerr << "rnnid: " << rnnid_status_name(f.status) << ": " << rnnid_last_error() << '\n';
    return exit_code(f.status);
  }
  return 0;
}
