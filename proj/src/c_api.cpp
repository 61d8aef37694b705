#include "rnnid/rnnid.h"

#include "rnnid/experiments.hpp"
#include "rnnid/serialization.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

struct rnnid_potential {
  rnnid::ConvexPotential value;
};
struct rnnid_system {
  rnnid::SystemParams value;
};
struct rnnid_trajectory {
  rnnid::Trajectory value;
};
struct rnnid_config {
  rnnid::ExperimentConfig value;
};
struct rnnid_result {
  rnnid::ExperimentResult value;
};

namespace {

using rnnid::Index;
using rnnid::Matrix;

thread_local std::string last_error;

rnnid_status to_status(rnnid::ErrorCode code) {
  switch (code) {
    case rnnid::ErrorCode::InvalidArgument: return RNNID_E_INVALID_ARGUMENT;
    case rnnid::ErrorCode::UnsupportedPotential: return RNNID_E_UNSUPPORTED_POTENTIAL;
    case rnnid::ErrorCode::RankDeficient: return RNNID_E_RANK_DEFICIENT;
    case rnnid::ErrorCode::Infeasible: return RNNID_E_INFEASIBLE;
    case rnnid::ErrorCode::Numeric: return RNNID_E_NUMERIC;
    case rnnid::ErrorCode::Config: return RNNID_E_CONFIG;
    case rnnid::ErrorCode::Io: return RNNID_E_IO;
  }
  return RNNID_E_INTERNAL;
}

template <class F>
rnnid_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return RNNID_OK;
  } catch (const rnnid::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RNNID_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RNNID_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return RNNID_E_INTERNAL;
  }
}

template <class T>
const T& deref(const T* p, const char* what) {
  rnnid::require(p != nullptr, std::string(what) + " is NULL");
  return *p;
}

void need(const void* p, const char* what) { rnnid::require(p != nullptr, std::string(what) + " is NULL"); }

void copy_out(const Matrix& m, double* out) { std::memcpy(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size())); }

Matrix copy_in(const double* data, std::size_t rows, std::size_t cols) {
  return Eigen::Map<const Matrix>(data, static_cast<Index>(rows), static_cast<Index>(cols));
}

void copy_string(const std::string& s, char* buf, std::size_t capacity, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && capacity > 0) {
    const std::size_t n = std::min(capacity - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  if (!buf || capacity < s.size() + 1)
    rnnid::require(buf == nullptr && capacity == 0, "output buffer too small");
}

rnnid::SolverConfig solver_from(const rnnid_solver_options* o) {
  rnnid::SolverConfig c;
  if (!o) return c;
  c.step_size = o->step_size;
  c.max_iterations = o->max_iterations;
  c.stop_tol = o->stop_tol;
  c.momentum = o->momentum == RNNID_MOMENTUM_NESTEROV_RESTART ? rnnid::Momentum::NesterovConvexRestart
                                                              : rnnid::Momentum::NesterovConvex;
  c.normalization = o->normalization == RNNID_NORMALIZE_MEAN ? rnnid::Normalization::Mean : rnnid::Normalization::Sum;
  c.step_rule = o->step_rule == RNNID_STEP_INVERSE_LIPSCHITZ ? rnnid::StepRule::InverseLipschitz
                                                             : rnnid::StepRule::Fixed;
  return c;
}

}  // namespace

extern "C" {

const char* rnnid_version(void) { return "0.1.0"; }

const char* rnnid_last_error(void) { return last_error.c_str(); }

const char* rnnid_status_name(rnnid_status status) {
  switch (status) {
    case RNNID_OK: return "ok";
    case RNNID_E_INVALID_ARGUMENT: return "invalid_argument";
    case RNNID_E_UNSUPPORTED_POTENTIAL: return "unsupported_potential";
    case RNNID_E_RANK_DEFICIENT: return "rank_deficient";
    case RNNID_E_INFEASIBLE: return "infeasible";
    case RNNID_E_NUMERIC: return "numeric";
    case RNNID_E_CONFIG: return "config";
    case RNNID_E_IO: return "io";
    case RNNID_E_INTERNAL: return "internal";
  }
  return "unknown";
}

// --- potentials -------------------------------------------------------------

rnnid_status rnnid_potential_leaky_relu(double rho, rnnid_potential** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rnnid_potential{rnnid::ConvexPotential::leaky_relu(rho)};
  });
}

rnnid_status rnnid_potential_param_relu(double lambda_lo, double lambda_hi, rnnid_potential** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rnnid_potential{rnnid::ConvexPotential::param_relu(lambda_lo, lambda_hi)};
  });
}

rnnid_status rnnid_potential_quadratic(const double* q, size_t n, rnnid_potential** out) {
  return guarded([&] {
    need(out, "out");
    need(q, "q");
    rnnid::require(n >= 1, "quadratic potential needs n >= 1");
    *out = new rnnid_potential{rnnid::ConvexPotential::quadratic(copy_in(q, n, n))};
  });
}

void rnnid_potential_free(rnnid_potential* potential) { delete potential; }

rnnid_status rnnid_potential_constants(const rnnid_potential* potential, double* lambda, double* Lambda,
                                       double* epsilon) {
  return guarded([&] {
    const auto& f = deref(potential, "potential").value;
    if (lambda) *lambda = f.strong_convexity();
    if (Lambda) *Lambda = f.smoothness();
    if (epsilon) *epsilon = f.linearization_defect();
  });
}

rnnid_status rnnid_potential_gradient(const rnnid_potential* potential, const double* x, size_t n, double* out) {
  return guarded([&] {
    const auto& f = deref(potential, "potential").value;
    need(x, "x");
    need(out, "out");
    copy_out(f.gradient(copy_in(x, n, 1)), out);
  });
}

rnnid_status rnnid_potential_conjugate_gradient(const rnnid_potential* potential, const double* y, size_t n,
                                                double* out) {
  return guarded([&] {
    const auto& f = deref(potential, "potential").value;
    need(y, "y");
    need(out, "out");
    copy_out(f.conjugate_grad(copy_in(y, n, 1)), out);
  });
}

// --- systems ----------------------------------------------------------------

rnnid_status rnnid_system_sample(size_t n, size_t p, double spectral_alpha, const rnnid_potential* potential,
                                 uint64_t seed, double beta, rnnid_system** out) {
  return guarded([&] {
    const auto& f = deref(potential, "potential").value;
    need(out, "out");
    std::optional<double> b;
    if (beta > 0.0) b = beta;
    *out = new rnnid_system{
        rnnid::sample_system(static_cast<Index>(n), static_cast<Index>(p), spectral_alpha, f, seed, b)};
  });
}

void rnnid_system_free(rnnid_system* system) { delete system; }

rnnid_status rnnid_system_dims(const rnnid_system* system, size_t* n, size_t* p) {
  return guarded([&] {
    const auto& s = deref(system, "system").value;
    if (n) *n = static_cast<size_t>(s.n());
    if (p) *p = static_cast<size_t>(s.p());
  });
}

rnnid_status rnnid_system_beta(const rnnid_system* system, double* beta) {
  return guarded([&] {
    need(beta, "beta");
    *beta = deref(system, "system").value.beta;
  });
}

rnnid_status rnnid_system_matrices(const rnnid_system* system, double* a, double* b) {
  return guarded([&] {
    const auto& s = deref(system, "system").value;
    if (a) copy_out(s.A, a);
    if (b) copy_out(s.B, b);
  });
}

rnnid_status rnnid_system_c_star(const rnnid_system* system, double* c_star) {
  return guarded([&] {
    need(c_star, "c_star");
    copy_out(deref(system, "system").value.c_star(), c_star);
  });
}

// --- trajectories -----------------------------------------------------------

rnnid_status rnnid_trajectory_simulate(const rnnid_system* system, const rnnid_potential* potential,
                                       const double* inputs, size_t horizon, rnnid_trajectory** out) {
  return guarded([&] {
    const auto& s = deref(system, "system").value;
    const auto& f = deref(potential, "potential").value;
    need(inputs, "inputs");
    need(out, "out");
    const Matrix u = copy_in(inputs, static_cast<size_t>(s.p()), horizon);
    *out = new rnnid_trajectory{rnnid::simulate(s, f, u, static_cast<Index>(horizon))};
  });
}

rnnid_status rnnid_trajectory_sample(const rnnid_system* system, const rnnid_potential* potential,
                                     rnnid_input_law law, size_t horizon, uint64_t seed, rnnid_trajectory** out) {
  return guarded([&] {
    const auto& s = deref(system, "system").value;
    const auto& f = deref(potential, "potential").value;
    need(out, "out");
    rnnid::require(law == RNNID_INPUT_GAUSSIAN || law == RNNID_INPUT_CUBED_GAUSSIAN, "unknown input law");
    const auto model = rnnid::InputModel::from_law(
        law == RNNID_INPUT_GAUSSIAN ? rnnid::InputLaw::Gaussian : rnnid::InputLaw::CubedGaussian);
    const Matrix u = rnnid::sample_inputs(model, s.p(), static_cast<Index>(horizon), seed);
    *out = new rnnid_trajectory{rnnid::simulate(s, f, u, static_cast<Index>(horizon))};
  });
}

void rnnid_trajectory_free(rnnid_trajectory* trajectory) { delete trajectory; }

rnnid_status rnnid_trajectory_horizon(const rnnid_trajectory* trajectory, size_t* horizon) {
  return guarded([&] {
    need(horizon, "horizon");
    *horizon = static_cast<size_t>(deref(trajectory, "trajectory").value.horizon());
  });
}

rnnid_status rnnid_trajectory_states(const rnnid_trajectory* trajectory, double* states) {
  return guarded([&] {
    need(states, "states");
    copy_out(deref(trajectory, "trajectory").value.states(), states);
  });
}

rnnid_status rnnid_trajectory_gram_min_eig(const rnnid_trajectory* trajectory, double* lambda_min) {
  return guarded([&] {
    need(lambda_min, "lambda_min");
    *lambda_min = rnnid::gram_min_eig(deref(trajectory, "trajectory").value).lambda_min;
  });
}

// --- estimation -------------------------------------------------------------

void rnnid_solver_options_default(rnnid_solver_options* options) {
  if (!options) return;
  const rnnid::SolverConfig c;
  options->step_size = c.step_size;
  options->max_iterations = c.max_iterations;
  options->stop_tol = c.stop_tol;
  options->momentum = RNNID_MOMENTUM_NESTEROV;
  options->normalization = RNNID_NORMALIZE_SUM;
  options->step_rule = RNNID_STEP_FIXED;
}

rnnid_status rnnid_agm_solve(const rnnid_trajectory* trajectory, const rnnid_potential* potential,
                             const rnnid_solver_options* options, const double* reference_c, double* c_out,
                             int* iterations, double* rel_error) {
  return guarded([&] {
    const auto& traj = deref(trajectory, "trajectory").value;
    const auto& f = deref(potential, "potential").value;
    need(c_out, "c_out");
    const auto n = static_cast<size_t>(traj.n());
    const auto d = static_cast<size_t>(traj.n() + traj.p());
    std::optional<Matrix> ref;
    if (reference_c) ref = copy_in(reference_c, n, d);
    rnnid::require(!rel_error || ref, "rel_error requires reference_c");
    const auto run = rnnid::agm_solve(traj, f, solver_from(options), ref);
    copy_out(run.final_C, c_out);
    if (iterations) *iterations = run.iterations_used;
    if (rel_error) *rel_error = rnnid::relative_error(run.final_C, *ref);
  });
}

rnnid_status rnnid_ls_solve(const rnnid_trajectory* trajectory, const rnnid_potential* potential, double* c_out) {
  return guarded([&] {
    const auto& traj = deref(trajectory, "trajectory").value;
    const auto& f = deref(potential, "potential").value;
    need(c_out, "c_out");
    copy_out(rnnid::conjugate_ls_solve(traj, f), c_out);
  });
}

// --- configs ----------------------------------------------------------------

rnnid_status rnnid_config_default(rnnid_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rnnid_config{};
  });
}

rnnid_status rnnid_config_load(const char* path, rnnid_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new rnnid_config{rnnid::load_experiment_config(path)};
  });
}

rnnid_status rnnid_config_from_json(const char* json, rnnid_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    rnnid::Json j;
    try {
      j = rnnid::Json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      rnnid::fail(rnnid::ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    *out = new rnnid_config{rnnid::experiment_config_from_json(j)};
  });
}

void rnnid_config_free(rnnid_config* config) { delete config; }

rnnid_status rnnid_config_apply_profile(rnnid_config* config, const char* name) {
  return guarded([&] {
    need(config, "config");
    need(name, "name");
    const auto profile = rnnid::parse_profile(name);
    if (!profile) rnnid::fail(rnnid::ErrorCode::Config, std::string("unknown profile '") + name + "'");
    rnnid::apply_profile(config->value, *profile);
  });
}

rnnid_status rnnid_config_set_trials(rnnid_config* config, int trials) {
  return guarded([&] {
    need(config, "config");
    if (trials < 1) rnnid::fail(rnnid::ErrorCode::Config, "trials must be >= 1");
    config->value.trials = trials;
  });
}

rnnid_status rnnid_config_set_seed(rnnid_config* config, uint64_t seed) {
  return guarded([&] {
    need(config, "config");
    config->value.seed = seed;
  });
}

rnnid_status rnnid_config_set_output_dir(rnnid_config* config, const char* dir) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    config->value.output_dir = dir;
  });
}

rnnid_status rnnid_config_to_json(const rnnid_config* config, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] { copy_string(rnnid::to_json(deref(config, "config").value).dump(2), buf, capacity, needed); });
}

rnnid_status rnnid_theory_report_json(const rnnid_config* config, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    const auto& cfg = deref(config, "config").value;
    cfg.validate();
    const auto inst = rnnid::build_trial(cfg, cfg.trials - 1);
    const auto report = rnnid::theory_report(inst.system, cfg.potential, cfg.input, cfg.T, cfg.theory);
    copy_string(rnnid::to_json(report).dump(2), buf, capacity, needed);
  });
}

// --- experiments ------------------------------------------------------------

rnnid_status rnnid_experiment_run(const rnnid_config* config, unsigned threads, rnnid_result** out) {
  return guarded([&] {
    const auto& cfg = deref(config, "config").value;
    need(out, "out");
    *out = new rnnid_result{rnnid::run_experiment(cfg, threads)};
  });
}

void rnnid_result_free(rnnid_result* result) { delete result; }

rnnid_status rnnid_result_write(const rnnid_result* result, const char* dir) {
  return guarded([&] {
    const auto& r = deref(result, "result").value;
    rnnid::write_results(r, dir ? std::string(dir) : r.config.output_dir);
  });
}

rnnid_status rnnid_result_iterations(const rnnid_result* result, size_t* iterations) {
  return guarded([&] {
    need(iterations, "iterations");
    *iterations = deref(result, "result").value.median.size();
  });
}

rnnid_status rnnid_result_quantiles(const rnnid_result* result, double* median, double* q10, double* q90) {
  return guarded([&] {
    const auto& r = deref(result, "result").value;
    const std::size_t bytes = sizeof(double) * r.median.size();
    if (median) std::memcpy(median, r.median.data(), bytes);
    if (q10) std::memcpy(q10, r.q10.data(), bytes);
    if (q90) std::memcpy(q90, r.q90.data(), bytes);
  });
}

rnnid_status rnnid_result_trial_summary(const rnnid_result* result, size_t* trials, size_t* converged,
                                        size_t* diverged) {
  return guarded([&] {
    const auto& r = deref(result, "result").value;
    std::size_t c = 0, d = 0;
    for (const auto& t : r.trials) {
      c += t.converged ? 1 : 0;
      d += t.diverged ? 1 : 0;
    }
    if (trials) *trials = r.trials.size();
    if (converged) *converged = c;
    if (diverged) *diverged = d;
  });
}

rnnid_status rnnid_grid_run(const char* model, const char* profile, int trials, const uint64_t* seed,
                            unsigned threads, const char* output_dir) {
  return guarded([&] {
    need(model, "model");
    need(output_dir, "output_dir");
    const std::string m = model;
    rnnid::InputLaw law;
    if (m == "gaussian") law = rnnid::InputLaw::Gaussian;
    else if (m == "heavy" || m == "cubed_gaussian") law = rnnid::InputLaw::CubedGaussian;
    else rnnid::fail(rnnid::ErrorCode::Config, "unknown model '" + m + "'");

    rnnid::GridOptions opts;
    if (profile) {
      const auto p = rnnid::parse_profile(profile);
      if (!p) rnnid::fail(rnnid::ErrorCode::Config, std::string("unknown profile '") + profile + "'");
      opts.profile = *p;
    }
    if (trials > 0) opts.trials = trials;
    if (seed) opts.seed = *seed;
    opts.threads = threads;
    rnnid::run_grid(law, opts, output_dir);
  });
}

}  // extern "C"
