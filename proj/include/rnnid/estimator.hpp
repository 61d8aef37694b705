#pragma once

#include "rnnid/core.hpp"
#include "rnnid/dynamics.hpp"
#include "rnnid/potentials.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rnnid {

/// Sum: the objective is the raw sum over t. Mean: divided by T, which is the
/// scale at which fixed step sizes such as 1e-3 are stable.
enum class Normalization { Sum, Mean };

/// NesterovConvex: y_k = C_k + (k-1)/(k+2) (C_k - C_{k-1}).
/// NesterovConvexRestart: same schedule, with the momentum counter reset to 1
/// whenever <grad(y_k), C_{k+1} - C_k> > 0 (gradient-based adaptive restart).
enum class Momentum { NesterovConvex, NesterovConvexRestart };

/// Fixed: step_size as given. InverseLipschitz: step_size / L_f with
/// L_f = Lambda * lambda_max(Sigma) (divided by T under Mean), so
/// step_size = 1 gives the classical 1/L step.
enum class StepRule { Fixed, InverseLipschitz };

std::string to_string(Normalization v);
std::string to_string(Momentum v);
std::string to_string(StepRule v);

struct SolverConfig {
  double step_size = 1e-3;
  int max_iterations = 500;
  double stop_tol = 1e-8;
  Momentum momentum = Momentum::NesterovConvex;
  Normalization normalization = Normalization::Sum;
  StepRule step_rule = StepRule::Fixed;
  std::optional<Matrix> initial_C;  // zero when unset
  bool keep_iterates = false;

  void validate() const;
};

struct ObjectiveEval {
  double value = 0.0;
  Matrix gradient;
};

/// value = sum_{t=1}^T f(C z_{t-1}) - <x_t, C z_{t-1}>,
/// grad  = sum_{t=1}^T (grad f(C z_{t-1}) - x_t) z_{t-1}'.
ObjectiveEval objective_and_grad(const Matrix& C, const Trajectory& traj, const ConvexPotential& potential,
                                 Normalization normalization = Normalization::Sum);

struct SolverRun {
  std::vector<Matrix> iterates;  // only with keep_iterates
  /// |C_k - C*|_F^2 / |C*|_F^2 after each iteration when a reference is
  /// given; otherwise the objective after each iteration.
  std::vector<double> rel_error_history;
  std::vector<double> objective_history;  // objective at C_k, k = 1..iterations_used
  double initial_objective = 0.0;
  Matrix final_C;
  int iterations_used = 0;
  int restarts = 0;
  bool converged = false;
  bool diverged = false;
  double step_size_used = 0.0;
};

/// Accelerated gradient method on the convex program. With a reference the
/// run stops once the relative error reaches stop_tol; without one, once
/// |grad|_F <= stop_tol |grad at C_0|_F. A run diverges (and stops) when the
/// objective becomes non-finite or rises above
/// value(C_0) + 10 max(|value(C_0)|, |best value so far|).
SolverRun agm_solve(const Trajectory& traj, const ConvexPotential& potential, const SolverConfig& config,
                    const std::optional<Matrix>& reference_C = std::nullopt);

/// Least squares on grad f_*(x_t) = C z_{t-1}, t = 1..T.
/// Throws UnsupportedPotential when grad f is not invertible and
/// RankDeficientError (carrying lambda_min(Sigma)) when Sigma is singular.
Matrix conjugate_ls_solve(const Trajectory& traj, const ConvexPotential& potential);

/// |C_hat - C_star|_F^2 / |C_star|_F^2.
double relative_error(const Matrix& C_hat, const Matrix& C_star);

/// Lambda * lambda_max(Sigma), optionally divided by T.
double objective_lipschitz(const Trajectory& traj, const ConvexPotential& potential, Normalization normalization);

}  // namespace rnnid
