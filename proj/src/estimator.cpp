#include "rnnid/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace rnnid {

std::string to_string(Normalization v) { return v == Normalization::Sum ? "sum" : "mean"; }
std::string to_string(Momentum v) {
  return v == Momentum::NesterovConvex ? "nesterov_convex" : "nesterov_convex_restart";
}
std::string to_string(StepRule v) { return v == StepRule::Fixed ? "fixed" : "inverse_lipschitz"; }

void SolverConfig::validate() const {
  // A zero step is accepted: it freezes the iterate at initial_C.
  require(std::isfinite(step_size) && step_size >= 0.0, "SolverConfig: step_size must be >= 0");
  require(max_iterations >= 1, "SolverConfig: max_iterations must be >= 1");
  require(std::isfinite(stop_tol) && stop_tol >= 0.0, "SolverConfig: stop_tol must be >= 0");
  if (initial_C) require(initial_C->allFinite(), "SolverConfig: initial_C has non-finite entries");
}

namespace {

void check_shape(const Matrix& C, const Trajectory& traj) {
  require(C.rows() == traj.n() && C.cols() == traj.n() + traj.p(),
          "objective: C must be n x (n+p) for this trajectory");
}

// Fast path without argument checks; shared by the solver loop.
ObjectiveEval evaluate(const Matrix& C, const Matrix& Z, const Matrix& X1, const ConvexPotential& potential,
                       double scale) {
  const Matrix Y = C * Z;
  ObjectiveEval out;
  out.value = scale * (potential.value_sum_columns(Y) - (X1.array() * Y.array()).sum());
  out.gradient = scale * ((potential.gradient_columns(Y) - X1) * Z.transpose());
  return out;
}

double value_only(const Matrix& C, const Matrix& Z, const Matrix& X1, const ConvexPotential& potential,
                  double scale) {
  const Matrix Y = C * Z;
  return scale * (potential.value_sum_columns(Y) - (X1.array() * Y.array()).sum());
}

double scale_for(const Trajectory& traj, Normalization normalization) {
  return normalization == Normalization::Mean ? 1.0 / static_cast<double>(traj.horizon()) : 1.0;
}

}  // namespace

ObjectiveEval objective_and_grad(const Matrix& C, const Trajectory& traj, const ConvexPotential& potential,
                                 Normalization normalization) {
  check_shape(C, traj);
  require(C.allFinite(), "objective: C has non-finite entries");
  if (auto d = potential.dimension()) require(*d == traj.n(), "objective: potential dimension mismatch");
  if (traj.horizon() == 0) return {0.0, Matrix::Zero(C.rows(), C.cols())};
  const Matrix X1 = traj.states().rightCols(traj.horizon());
  return evaluate(C, traj.stacked(), X1, potential, scale_for(traj, normalization));
}

double objective_lipschitz(const Trajectory& traj, const ConvexPotential& potential, Normalization normalization) {
  const Matrix& Z = traj.stacked();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Z * Z.transpose(), Eigen::EigenvaluesOnly);
  return potential.smoothness() * eig.eigenvalues().maxCoeff() * scale_for(traj, normalization);
}

SolverRun agm_solve(const Trajectory& traj, const ConvexPotential& potential, const SolverConfig& config,
                    const std::optional<Matrix>& reference_C) {
  config.validate();
  require(traj.horizon() >= 1, "agm_solve: horizon must be >= 1");
  const Index n = traj.n();
  const Index d = n + traj.p();
  if (auto dim = potential.dimension()) require(*dim == n, "agm_solve: potential dimension mismatch");

  double ref_norm2 = 0.0;
  if (reference_C) {
    require(reference_C->rows() == n && reference_C->cols() == d, "agm_solve: reference_C has the wrong shape");
    ref_norm2 = reference_C->squaredNorm();
    require(ref_norm2 > 0.0, "agm_solve: reference_C must be nonzero");
  }

  const Matrix& Z = traj.stacked();
  const Matrix X1 = traj.states().rightCols(traj.horizon());
  const double scale = scale_for(traj, config.normalization);

  SolverRun run;
  run.step_size_used = config.step_size;
  if (config.step_rule == StepRule::InverseLipschitz) {
    const double lip = objective_lipschitz(traj, potential, config.normalization);
    run.step_size_used = lip > 0.0 ? config.step_size / lip : 0.0;
  }
  const double step = run.step_size_used;

  Matrix C = config.initial_C ? *config.initial_C : Matrix::Zero(n, d);
  require(C.rows() == n && C.cols() == d, "agm_solve: initial_C has the wrong shape");
  Matrix C_prev = C;

  run.initial_objective = value_only(C, Z, X1, potential, scale);
  double best = run.initial_objective;
  double grad0_norm = -1.0;
  long k = 1;

  for (int it = 1; it <= config.max_iterations; ++it) {
    const double momentum = static_cast<double>(k - 1) / static_cast<double>(k + 2);
    const Matrix Y = C + momentum * (C - C_prev);
    const ObjectiveEval at_y = evaluate(Y, Z, X1, potential, scale);
    if (grad0_norm < 0.0) grad0_norm = at_y.gradient.norm();

    Matrix C_next = Y - step * at_y.gradient;
    if (config.momentum == Momentum::NesterovConvexRestart &&
        (at_y.gradient.array() * (C_next - C).array()).sum() > 0.0) {
      k = 1;
      ++run.restarts;
    } else {
      ++k;
    }
    C_prev = std::move(C);
    C = std::move(C_next);
    run.iterations_used = it;

    const double value = value_only(C, Z, X1, potential, scale);
    run.objective_history.push_back(value);
    if (config.keep_iterates) run.iterates.push_back(C);

    double metric = value;
    if (reference_C) metric = (C - *reference_C).squaredNorm() / ref_norm2;
    run.rel_error_history.push_back(std::isfinite(metric) ? metric : std::numeric_limits<double>::infinity());

    const double limit = run.initial_objective + 10.0 * std::max(std::abs(run.initial_objective), std::abs(best));
    if (!std::isfinite(value) || !C.allFinite() || value > limit) {
      run.diverged = true;
      break;
    }
    best = std::min(best, value);

    if (reference_C) {
      if (metric <= config.stop_tol) {
        run.converged = true;
        break;
      }
    } else if (grad0_norm > 0.0) {
      // Gradient at the new iterate; costs one more product, only in this mode.
      const double g = evaluate(C, Z, X1, potential, scale).gradient.norm();
      if (g <= config.stop_tol * grad0_norm) {
        run.converged = true;
        break;
      }
    }
  }
  run.final_C = std::move(C);
  return run;
}

Matrix conjugate_ls_solve(const Trajectory& traj, const ConvexPotential& potential) {
  if (!potential.invertible_gradient())
    fail(ErrorCode::UnsupportedPotential, "conjugate_ls_solve: grad f is not invertible for this potential");
  if (auto dim = potential.dimension()) require(*dim == traj.n(), "conjugate_ls_solve: potential dimension mismatch");
  require(traj.horizon() >= 1, "conjugate_ls_solve: horizon must be >= 1");

  const Matrix& Z = traj.stacked();
  const GramResult gram = gram_min_eig(traj);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram.sigma, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 1e-12 * std::max(lmax, std::numeric_limits<double>::min())))
    throw RankDeficientError("conjugate_ls_solve: Gram matrix is singular (lambda_min = " +
                                 std::to_string(lmin) + ")",
                             lmin);

  const Matrix targets = potential.conjugate_grad_columns(traj.states().rightCols(traj.horizon()));
  // Z' C' = targets', solved by column-pivoted QR.
  Eigen::ColPivHouseholderQR<Matrix> qr(Z.transpose());
  return qr.solve(targets.transpose()).transpose();
}

double relative_error(const Matrix& C_hat, const Matrix& C_star) {
  require(C_hat.rows() == C_star.rows() && C_hat.cols() == C_star.cols(), "relative_error: shape mismatch");
  const double denom = C_star.squaredNorm();
  require(denom > 0.0, "relative_error: C_star must be nonzero");
  return (C_hat - C_star).squaredNorm() / denom;
}

}  // namespace rnnid
