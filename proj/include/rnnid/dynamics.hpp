#pragma once

#include "rnnid/core.hpp"
#include "rnnid/models.hpp"
#include "rnnid/potentials.hpp"

#include <iosfwd>
#include <vector>

namespace rnnid {

/// One realized horizon of x_t = grad f(A* x_{t-1} + B* u_{t-1}), x_0 = 0.
///
/// inputs holds u_0..u_{T-1} (p x T), states holds x_0..x_T (n x (T+1)).
/// The stacked state is z_t = [x_t; beta u_t] for t = 0..T-1.
class Trajectory {
 public:
  Trajectory(Matrix inputs, Matrix states, double beta);

  Index horizon() const { return inputs_.cols(); }
  Index n() const { return states_.rows(); }
  Index p() const { return inputs_.rows(); }
  double beta() const { return beta_; }

  const Matrix& inputs() const { return inputs_; }
  const Matrix& states() const { return states_; }

  /// (n+p) x T matrix whose column t is z_t.
  const Matrix& stacked() const { return stacked_; }
  Vector z(Index t) const { return stacked_.col(t); }

 private:
  Matrix inputs_;
  Matrix states_;
  double beta_;
  Matrix stacked_;
};

/// Runs the recursion for T steps using the first T columns of `inputs`.
Trajectory simulate(const SystemParams& params, const ConvexPotential& potential, const Matrix& inputs, Index T);

struct GramResult {
  Matrix sigma;
  double lambda_min = 0.0;
};

/// Sigma = sum_{t<T} z_t z_t', accumulated in long double.
GramResult gram_min_eig(const Trajectory& traj);

/// State process that is reset to zero right after every time t = offset
/// (mod stride), driven by the same realized inputs as the original.
struct RestartedTrajectory {
  Index stride = 1;
  Index offset = 0;
  Matrix states;               // x^{(l)}_0 .. x^{(l)}_T
  std::vector<Index> index_set;  // T_l = {t : L <= t < T, t = l mod L}
};

RestartedTrajectory restarted_trajectory(const Trajectory& traj, const SystemParams& params,
                                         const ConvexPotential& potential, Index stride, Index offset);

/// All offsets l = 0..L-1 for one stride.
std::vector<RestartedTrajectory> restarted_family(const Trajectory& traj, const SystemParams& params,
                                                  const ConvexPotential& potential, Index stride);

struct SDecomposition {
  std::vector<double> s;        // S_l(w)
  std::vector<double> s_tilde;  // S~_l(w)
  double quadratic_form = 0.0;  // w' Sigma w
  /// sum_l (S_l/2 - S~_l); never exceeds quadratic_form.
  double chain_lower_bound = 0.0;
};

SDecomposition s_decomposition(const Trajectory& traj, const std::vector<RestartedTrajectory>& family,
                               const Vector& w);

/// min over l, t in T_l of
///   (Lambda |A*|)^{2(L-1)} |x_{t-L+1}|^2 - |z_t - z^{(l)}_t|^2.
/// Deterministically nonnegative: the restart zeroes x^{(l)}_{t-L+1}, after
/// which the gap contracts by Lambda |A*| per step over L-1 steps. Returns
/// +inf when no T_l is populated.
double deviation_check(const Trajectory& traj, const std::vector<RestartedTrajectory>& family,
                       const ConvexPotential& potential, const SystemParams& params);

/// max_{1<=s<=T-1} |x_s| and the contraction bound
/// Lambda/(1 - Lambda|A*|) max_s |B* u_{s-1}| (inf if not contractive).
struct StateNormBound {
  double max_state_norm = 0.0;
  double bound = 0.0;
};
StateNormBound state_norm_bound(const Trajectory& traj, const SystemParams& params,
                                const ConvexPotential& potential);

/// Debug dump: header "t,u_0..u_{p-1},x_0..x_{n-1}", one row per t = 0..T
/// (the u columns are empty on the last row). Not a stable format.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace rnnid
