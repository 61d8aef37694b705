#pragma once

#include "rnnid/core.hpp"
#include "rnnid/dynamics.hpp"
#include "rnnid/estimator.hpp"
#include "rnnid/models.hpp"
#include "rnnid/potentials.hpp"
#include "rnnid/theory.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rnnid {

struct ExperimentConfig {
  Index n = 20;
  Index p = 40;
  Index T = 300;
  double spectral_alpha = 0.2;
  ConvexPotential potential = ConvexPotential::leaky_relu(1.0);
  InputModel input = InputModel::gaussian();
  int trials = 20;
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::string output_dir;
  std::optional<double> beta;  // overrides the default normalizer
  TheorySettings theory;

  void validate() const;
};

/// quick: n=20, p=40, T=300, 20 trials, up to 2000 iterations of restarted
///   AGM with step 1/L_f.
/// paper: n=50, p=100, T=500, 100 trials, 500 iterations of plain AGM with a
///   fixed step of 1e-3 (1e-4 for cubed-Gaussian inputs) on the mean-normalized
///   objective.
enum class Profile { Quick, Paper };

std::optional<Profile> parse_profile(const std::string& name);
std::string to_string(Profile profile);
void apply_profile(ExperimentConfig& config, Profile profile);

struct TrialOutcome {
  int index = 0;
  std::uint64_t seed = 0;
  double final_error = 0.0;
  int iterations_used = 0;
  bool converged = false;
  bool diverged = false;
  double beta = 0.0;
  double gram_lambda_min = 0.0;
  double seconds = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  // One entry per iteration 1..max_iterations; nearest-rank quantiles over
  // trials of the padded relative-error histories.
  std::vector<double> median;
  std::vector<double> q10;
  std::vector<double> q90;
  std::vector<TrialOutcome> trials;
  TheoryReport theory;  // for the last trial's system
  double seconds = 0.0;
};

/// Nearest-rank quantile: the ceil(q N)-th smallest value (1-based, at least 1).
double nearest_rank_quantile(std::vector<double> values, double q);

/// Per-trial seed: derive_seed(config.seed, trial).
std::uint64_t trial_seed(const ExperimentConfig& config, int trial);

struct TrialInstance {
  SystemParams system;
  Trajectory trajectory;
};

/// The system and trajectory that trial `trial` of `config` runs on.
TrialInstance build_trial(const ExperimentConfig& config, int trial);

/// threads = 0 uses std::thread::hardware_concurrency(). Results do not depend
/// on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

/// Writes config.json, quantiles.csv, trials.csv and theory.json into
/// output_dir (created if missing). Throws ErrorCode::Io naming the path.
void write_results(const ExperimentResult& result, const std::string& output_dir);

inline constexpr double kGridSpectralAlphas[] = {0.2, 0.8};
inline constexpr double kGridRhos[] = {1.0, 0.5, 0.3, 0.0};

struct GridCell {
  double spectral_alpha = 0.0;
  double rho = 0.0;
  std::string directory;  // relative to the grid output directory
  std::string title;
  double final_median = 0.0;
};

struct GridOptions {
  Profile profile = Profile::Paper;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

/// Name of the sub-directory holding one cell, e.g. "alpha_0.2_rho_0.5".
std::string grid_cell_directory(double spectral_alpha, double rho);

/// Runs the 2 x 4 (spectral_alpha, rho) grid for one input law, one
/// sub-directory per cell plus an index file grid.json.
std::vector<GridCell> run_grid(InputLaw law, const GridOptions& options, const std::string& output_dir);

}  // namespace rnnid
