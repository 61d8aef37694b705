#include "rnnid/dynamics.hpp"

#include "format.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <ostream>

namespace rnnid {

namespace {

void check_dims(const SystemParams& params, const ConvexPotential& potential) {
  params.validate();
  if (auto d = potential.dimension())
    require(*d == params.n(), "potential dimension does not match the state dimension");
}

}  // namespace

Trajectory::Trajectory(Matrix inputs, Matrix states, double beta)
    : inputs_(std::move(inputs)), states_(std::move(states)), beta_(beta) {
  require(states_.cols() == inputs_.cols() + 1, "Trajectory: need T inputs and T+1 states");
  require(beta_ > 0.0, "Trajectory: beta must be positive");
  stacked_.resize(n() + p(), horizon());
  stacked_.topRows(n()) = states_.leftCols(horizon());
  stacked_.bottomRows(p()) = beta_ * inputs_;
}

Trajectory simulate(const SystemParams& params, const ConvexPotential& potential, const Matrix& inputs, Index T) {
  check_dims(params, potential);
  require(T >= 0, "simulate: T must be >= 0");
  require(inputs.rows() == params.p(), "simulate: input dimension does not match p");
  require(inputs.cols() >= T, "simulate: fewer inputs than the horizon");
  require(inputs.leftCols(T).allFinite(), "simulate: non-finite inputs");

  const Index n = params.n();
  Matrix states = Matrix::Zero(n, T + 1);
  const Matrix drive = params.B * inputs.leftCols(T);
  for (Index t = 1; t <= T; ++t) {
    const Vector pre = params.A * states.col(t - 1) + drive.col(t - 1);
    states.col(t) = potential.gradient_columns(pre);
  }
  return Trajectory(inputs.leftCols(T), std::move(states), params.beta);
}

GramResult gram_min_eig(const Trajectory& traj) {
  require(traj.horizon() >= 1, "gram_min_eig: horizon must be >= 1");
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LMatrix z = traj.stacked().cast<long double>();
  const LMatrix acc = z * z.transpose();
  GramResult out;
  out.sigma = acc.cast<double>();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.lambda_min = min_eigenvalue(out.sigma);
  return out;
}

RestartedTrajectory restarted_trajectory(const Trajectory& traj, const SystemParams& params,
                                         const ConvexPotential& potential, Index stride, Index offset) {
  check_dims(params, potential);
  const Index T = traj.horizon();
  require(stride >= 1 && stride <= std::max<Index>(T, 1), "restarted_trajectory: need 1 <= L <= T");
  require(offset >= 0 && offset < stride, "restarted_trajectory: need 0 <= offset < L");

  RestartedTrajectory r;
  r.stride = stride;
  r.offset = offset;
  r.states = Matrix::Zero(traj.n(), T + 1);
  for (Index t = 0; t < T; ++t) {
    if (t % stride == offset) continue;  // x^{(l)}_{t+1} = 0
    const Vector pre = params.A * r.states.col(t) + params.B * traj.inputs().col(t);
    r.states.col(t + 1) = potential.gradient_columns(pre);
  }
  for (Index t = stride; t < T; ++t)
    if (t % stride == offset) r.index_set.push_back(t);
  return r;
}

std::vector<RestartedTrajectory> restarted_family(const Trajectory& traj, const SystemParams& params,
                                                  const ConvexPotential& potential, Index stride) {
  std::vector<RestartedTrajectory> family;
  family.reserve(static_cast<std::size_t>(stride));
  for (Index l = 0; l < stride; ++l) family.push_back(restarted_trajectory(traj, params, potential, stride, l));
  return family;
}

SDecomposition s_decomposition(const Trajectory& traj, const std::vector<RestartedTrajectory>& family,
                               const Vector& w) {
  const Index n = traj.n();
  require(w.size() == n + traj.p(), "s_decomposition: w must have dimension n + p");
  require(std::abs(w.norm() - 1.0) <= 1e-10, "s_decomposition: w must be a unit vector");

  SDecomposition out;
  const Vector wx = w.head(n);
  const Vector projections = traj.stacked().transpose() * w;
  out.quadratic_form = projections.squaredNorm();
  for (const auto& r : family) {
    double s = 0.0, s_tilde = 0.0;
    for (Index t : r.index_set) {
      // z_t and z^{(l)}_t share the input block, so only the states differ.
      const double gap = wx.dot(traj.states().col(t) - r.states.col(t));
      const double restarted = projections(t) - gap;
      s += restarted * restarted;
      s_tilde += gap * gap;
    }
    out.s.push_back(s);
    out.s_tilde.push_back(s_tilde);
    out.chain_lower_bound += 0.5 * s - s_tilde;
  }
  return out;
}

double deviation_check(const Trajectory& traj, const std::vector<RestartedTrajectory>& family,
                       const ConvexPotential& potential, const SystemParams& params) {
  const double rate = potential.smoothness() * spectral_norm(params.A);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : family) {
    const double factor = std::pow(rate, 2.0 * static_cast<double>(r.stride - 1));
    for (Index t : r.index_set) {
      const double bound = factor * traj.states().col(t - r.stride + 1).squaredNorm();
      const double gap = (traj.states().col(t) - r.states.col(t)).squaredNorm();
      worst = std::min(worst, bound - gap);
    }
  }
  return worst;
}

StateNormBound state_norm_bound(const Trajectory& traj, const SystemParams& params,
                                const ConvexPotential& potential) {
  StateNormBound out;
  const Index T = traj.horizon();
  double drive = 0.0;
  for (Index s = 1; s <= T - 1; ++s) {
    out.max_state_norm = std::max(out.max_state_norm, traj.states().col(s).norm());
    drive = std::max(drive, (params.B * traj.inputs().col(s - 1)).norm());
  }
  const double Lam = potential.smoothness();
  const double rate = Lam * spectral_norm(params.A);
  out.bound = rate < 1.0 ? Lam / (1.0 - rate) * drive : std::numeric_limits<double>::infinity();
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t";
  for (Index i = 0; i < traj.p(); ++i) out << ",u_" << i;
  for (Index i = 0; i < traj.n(); ++i) out << ",x_" << i;
  out << '\n';
  for (Index t = 0; t <= traj.horizon(); ++t) {
    out << t;
    for (Index i = 0; i < traj.p(); ++i) {
      out << ',';
      if (t < traj.horizon()) out << format_double(traj.inputs()(i, t));
    }
    for (Index i = 0; i < traj.n(); ++i) out << ',' << format_double(traj.states()(i, t));
    out << '\n';
  }
}

}  // namespace rnnid
