#include "rnnid/experiments.hpp"

#include "format.hpp"
#include "rnnid/random.hpp"
#include "rnnid/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace rnnid {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  require(n >= 1 && p >= 1, "ExperimentConfig: n and p must be >= 1");
  require(T >= 1, "ExperimentConfig: T must be >= 1");
  require(spectral_alpha > 0.0 && spectral_alpha < 1.0, "ExperimentConfig: spectral_alpha must lie in (0, 1)");
  require(trials >= 1, "ExperimentConfig: trials must be >= 1");
  if (potential.dimension())
    require(*potential.dimension() == n, "ExperimentConfig: quadratic potential dimension differs from n");
  if (beta) require(std::isfinite(*beta) && *beta > 0.0, "ExperimentConfig: beta must be positive");
  require(theory.delta > 0.0 && theory.delta < 1.0, "ExperimentConfig: theory.delta must lie in (0, 1)");
  require(theory.c > 0.0 && theory.c2 >= 0.0, "ExperimentConfig: theory.c must be positive, c2 nonnegative");
  solver.validate();
}

std::optional<Profile> parse_profile(const std::string& name) {
  if (name == "quick") return Profile::Quick;
  if (name == "paper") return Profile::Paper;
  return std::nullopt;
}

std::string to_string(Profile profile) { return profile == Profile::Quick ? "quick" : "paper"; }

void apply_profile(ExperimentConfig& config, Profile profile) {
  SolverConfig& s = config.solver;
  if (profile == Profile::Quick) {
    config.n = 20;
    config.p = 40;
    config.T = 300;
    config.trials = 20;
    s.max_iterations = 2000;
    s.step_size = 1.0;
    s.step_rule = StepRule::InverseLipschitz;
    s.momentum = Momentum::NesterovConvexRestart;
    s.normalization = Normalization::Mean;
    s.stop_tol = 1e-10;
  } else {
    config.n = 50;
    config.p = 100;
    config.T = 500;
    config.trials = 100;
    s.max_iterations = 500;
    s.step_size = config.input.law == InputLaw::CubedGaussian ? 1e-4 : 1e-3;
    s.step_rule = StepRule::Fixed;
    s.momentum = Momentum::NesterovConvex;
    s.normalization = Normalization::Mean;
    s.stop_tol = 1e-10;
  }
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  require(!values.empty(), "nearest_rank_quantile: no values");
  require(q >= 0.0 && q <= 1.0, "nearest_rank_quantile: q must lie in [0, 1]");
  const auto count = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(count)));
  rank = std::clamp<std::size_t>(rank, 1, count);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

std::uint64_t trial_seed(const ExperimentConfig& config, int trial) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(trial));
}

TrialInstance build_trial(const ExperimentConfig& config, int trial) {
  const std::uint64_t s = trial_seed(config, trial);
  SystemParams system =
      sample_system(config.n, config.p, config.spectral_alpha, config.potential, derive_seed(s, 0), config.beta);
  const Matrix inputs = sample_inputs(config.input, config.p, config.T, derive_seed(s, 1));
  Trajectory traj = simulate(system, config.potential, inputs, config.T);
  return {std::move(system), std::move(traj)};
}

namespace {

struct TrialRecord {
  TrialOutcome outcome;
  std::vector<double> history;  // padded to max_iterations
};

TrialRecord run_trial(const ExperimentConfig& config, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const TrialInstance inst = build_trial(config, trial);
  const Matrix c_star = inst.system.c_star();
  const SolverRun run = agm_solve(inst.trajectory, config.potential, config.solver, c_star);

  TrialRecord rec;
  const auto m = static_cast<std::size_t>(config.solver.max_iterations);
  rec.history.reserve(m);
  for (double e : run.rel_error_history) rec.history.push_back(std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
  if (run.diverged) {
    rec.history.resize(m, std::numeric_limits<double>::infinity());
  } else {
    const double last = rec.history.empty() ? relative_error(run.final_C, c_star) : rec.history.back();
    rec.history.resize(m, last);
  }
  rec.history.resize(m);

  TrialOutcome& o = rec.outcome;
  o.index = trial;
  o.seed = trial_seed(config, trial);
  o.final_error = run.diverged ? std::numeric_limits<double>::infinity() : relative_error(run.final_C, c_star);
  o.iterations_used = run.iterations_used;
  o.converged = run.converged;
  o.diverged = run.diverged;
  o.beta = inst.system.beta;
  o.gram_lambda_min = gram_min_eig(inst.trajectory).lambda_min;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto trials = static_cast<std::size_t>(config.trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      try {
        records[i] = run_trial(config, static_cast<int>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = trials;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  result.config = config;
  const auto m = static_cast<std::size_t>(config.solver.max_iterations);
  result.median.resize(m);
  result.q10.resize(m);
  result.q90.resize(m);
  std::vector<double> column(trials);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < trials; ++i) column[i] = records[i].history[k];
    result.q10[k] = nearest_rank_quantile(column, 0.1);
    result.median[k] = nearest_rank_quantile(column, 0.5);
    result.q90[k] = nearest_rank_quantile(column, 0.9);
  }
  for (auto& r : records) result.trials.push_back(r.outcome);

  const TrialInstance last = build_trial(config, config.trials - 1);
  try {
    result.theory = theory_report(last.system, config.potential, config.input, config.T, config.theory);
  } catch (const Error&) {
    result.theory = coherence_report(last.system, config.potential);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

void ensure_directory(const std::string& dir) {
  if (dir.empty()) fail(ErrorCode::Io, "output directory path '' is empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create output directory '" + dir + "'");
}

void write_json(const Json& j, const fs::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  close_output(out, path);
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_results(const ExperimentResult& result, const std::string& output_dir) {
  ensure_directory(output_dir);
  const fs::path dir(output_dir);

  write_json(to_json(result.config), dir / "config.json");

  {
    const fs::path path = dir / "quantiles.csv";
    auto out = open_output(path);
    out << "iteration,median,q10,q90\n";
    for (std::size_t k = 0; k < result.median.size(); ++k)
      out << k + 1 << ',' << format_double(result.median[k]) << ',' << format_double(result.q10[k]) << ','
          << format_double(result.q90[k]) << '\n';
    close_output(out, path);
  }
  {
    const fs::path path = dir / "trials.csv";
    auto out = open_output(path);
    out << "trial,seed,final_error,iterations_used,converged,diverged,beta,gram_lambda_min,seconds\n";
    for (const auto& t : result.trials)
      out << t.index << ',' << t.seed << ',' << format_double(t.final_error) << ',' << t.iterations_used << ','
          << (t.converged ? 1 : 0) << ',' << (t.diverged ? 1 : 0) << ',' << format_double(t.beta) << ','
          << format_double(t.gram_lambda_min) << ',' << format_double(t.seconds) << '\n';
    close_output(out, path);
  }
  write_json(to_json(result.theory), dir / "theory.json");
}

std::string grid_cell_directory(double spectral_alpha, double rho) {
  return "alpha_" + shortest(spectral_alpha) + "_rho_" + shortest(rho);
}

std::vector<GridCell> run_grid(InputLaw law, const GridOptions& options, const std::string& output_dir) {
  ensure_directory(output_dir);
  std::vector<GridCell> cells;
  Json index = Json::array();
  for (double a : kGridSpectralAlphas) {
    for (double rho : kGridRhos) {
      ExperimentConfig cfg;
      cfg.spectral_alpha = a;
      cfg.potential = ConvexPotential::leaky_relu(rho);
      cfg.input = InputModel::from_law(law);
      apply_profile(cfg, options.profile);
      if (options.trials) cfg.trials = *options.trials;
      if (options.seed) cfg.seed = *options.seed;

      GridCell cell;
      cell.spectral_alpha = a;
      cell.rho = rho;
      cell.directory = grid_cell_directory(a, rho);
      cell.title = "α = " + shortest(a) + ", ρ = " + shortest(rho);
      cfg.output_dir = (fs::path(output_dir) / cell.directory).string();

      const ExperimentResult result = run_experiment(cfg, options.threads);
      write_results(result, cfg.output_dir);
      cell.final_median = result.median.back();
      index.push_back(Json{{"spectral_alpha", a},
                           {"rho", rho},
                           {"dir", cell.directory},
                           {"title", cell.title},
                           {"final_median", cell.final_median}});
      cells.push_back(std::move(cell));
    }
  }
  write_json(Json{{"model", law == InputLaw::Gaussian ? "gaussian" : "heavy"},
                  {"profile", to_string(options.profile)},
                  {"cells", index}},
             fs::path(output_dir) / "grid.json");
  return cells;
}

}  // namespace rnnid
