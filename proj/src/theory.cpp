#include "rnnid/theory.hpp"

#include "rnnid/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rnnid {

std::vector<double> column_deleted_min_singular(const Matrix& B) {
  const Matrix gram = B * B.transpose();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(B.cols()));
  for (Index i = 0; i < B.cols(); ++i) {
    const Matrix deleted = gram - B.col(i) * B.col(i).transpose();
    out.push_back(std::sqrt(std::max(0.0, min_eigenvalue(deleted))));
  }
  return out;
}

ThetaResult theta(const SystemParams& params, const ConvexPotential& potential, const InputModel& model) {
  params.validate();
  const double lam = potential.strong_convexity();
  const double eps = potential.linearization_defect();

  ThetaResult r;
  r.valid = eps < lam;
  if (eps > 0.0) {
    require(model.orlicz_alpha && model.K, "theta: input model lacks Orlicz constants");
    const double a = *model.orlicz_alpha;
    r.tail_term = -eps * *model.K * std::pow(std::log(10.0 * std::max(model.eta, 3.0)), 1.0 / a) *
                  max_column_norm(params.B);
  }
  double spread = std::numeric_limits<double>::infinity();
  for (double s : column_deleted_min_singular(params.B))
    spread = std::min(spread, std::min(params.beta, (lam - eps) * s));
  r.spread_term = 0.6 * spread;
  r.theta = r.tail_term + r.spread_term;
  return r;
}

double stride_bound_rhs(double contraction, double Lambda, double B_frobenius, Index T, Index p, double delta,
                        double theta, double c) {
  const double inner = (c * c) / (theta * theta) *
                       std::log(2.0 * static_cast<double>(T - 1) * static_cast<double>(p + 1) / delta) *
                       std::pow(Lambda * B_frobenius / (1.0 - contraction), 2);
  return 1.0 + std::log(inner) / std::log(1.0 / contraction);
}

Index stride_bound(double contraction, double Lambda, double B_frobenius, Index T, Index p, double delta,
                   double theta, double c) {
  if (!(contraction < 1.0)) fail(ErrorCode::Infeasible, "stride_bound: Lambda |A*| >= 1, no finite stride");
  if (!(theta > 0.0)) fail(ErrorCode::Infeasible, "stride_bound: theta must be positive");
  require(delta > 0.0 && delta < 1.0, "stride_bound: delta must lie in (0, 1)");
  require(T >= 2 && p >= 1, "stride_bound: need T >= 2 and p >= 1");
  require(c > 0.0, "stride_bound: c must be positive");
  if (contraction <= 0.0) return 1;  // no memory: every stride works
  const double rhs = stride_bound_rhs(contraction, Lambda, B_frobenius, T, p, delta, theta, c);
  if (!std::isfinite(rhs)) fail(ErrorCode::Numeric, "stride_bound: non-finite bound");
  return std::max<Index>(1, static_cast<Index>(std::ceil(rhs)));
}

Index stride_bound(const SystemParams& params, const ConvexPotential& potential, Index T, Index p, double delta,
                   double theta, double c) {
  const double Lam = potential.smoothness();
  return stride_bound(Lam * spectral_norm(params.A), Lam, params.B.norm(), T, p, delta, theta, c);
}

double horizon_rhs(double T, Index n, Index p, Index L, double delta, double eta, double c2) {
  const double d = static_cast<double>(n + p);
  const double l = static_cast<double>(L);
  return c2 * (std::max(eta * eta, 9.0) * d * l * std::log(std::exp(1.0) * T / (l * d)) + std::log(8.0 * l / delta));
}

Index horizon_bound(Index n, Index p, Index L, double delta, double eta, double c2) {
  require(n >= 1 && p >= 1 && L >= 1, "horizon_bound: n, p, L must be >= 1");
  require(delta > 0.0 && delta < 1.0, "horizon_bound: delta must lie in (0, 1)");
  require(eta > 0.0 && c2 >= 0.0, "horizon_bound: eta must be positive and c2 nonnegative");

  const Index start = (n + p) * L;
  auto ok = [&](Index T) { return static_cast<double>(T) >= horizon_rhs(static_cast<double>(T), n, p, L, delta, eta, c2); };

  if (ok(start)) {
    for (Index T = 1; T < start; ++T)
      if (ok(T)) return T;
    return start;
  }
  Index T = start;
  for (int it = 0; it < 1000000; ++it) {
    const double next = std::ceil(horizon_rhs(static_cast<double>(T), n, p, L, delta, eta, c2));
    if (!std::isfinite(next) || next > 9e18) break;
    const Index candidate = std::max<Index>(T, static_cast<Index>(next));
    if (candidate == T) return T;
    T = candidate;
  }
  fail(ErrorCode::Numeric, "horizon_bound: fixed-point iteration did not converge");
}

TheoryReport coherence_report(const SystemParams& params, const ConvexPotential& potential) {
  params.validate();
  TheoryReport r;
  const double col_max = max_column_norm(params.B);
  r.mu = std::sqrt(static_cast<double>(params.p())) * col_max / params.B.norm();
  r.contraction = potential.smoothness() * spectral_norm(params.A);
  r.col_deleted_min_eigs = column_deleted_min_singular(params.B);
  r.spectral_spread = 0.0;
  for (double s : r.col_deleted_min_eigs)
    r.spectral_spread =
        std::max(r.spectral_spread, s > 0.0 ? col_max / s : std::numeric_limits<double>::infinity());
  r.beta = params.beta;
  r.lambda = potential.strong_convexity();
  r.Lambda = potential.smoothness();
  r.epsilon = potential.linearization_defect();
  return r;
}

TheoryReport theory_report(const SystemParams& params, const ConvexPotential& potential, const InputModel& model,
                           Index T, const TheorySettings& settings) {
  TheoryReport r = coherence_report(params, potential);
  r.eta = model.eta;
  r.delta = settings.delta;
  r.c = settings.c;
  r.c2 = settings.c2;
  r.horizon = T;

  const ThetaResult th = theta(params, potential, model);
  r.theta = th.theta;
  r.theta_valid = th.valid && th.theta > 0.0;
  if (r.theta_valid && r.contraction < 1.0 && T >= 2) {
    r.L_min = stride_bound(r.contraction, r.Lambda, params.B.norm(), T, params.p(), settings.delta, th.theta,
                           settings.c);
    r.T_min = horizon_bound(params.n(), params.p(), *r.L_min, settings.delta, model.eta, settings.c2);
  }
  return r;
}

double small_ball_target(double eta) { return 0.1 / std::max(eta, 3.0); }

SmallBallResult small_ball_probe(const SystemParams& params, const ConvexPotential& potential,
                                 const InputModel& model, Index L, Index ell, double theta, Index directions,
                                 Index trials, std::uint64_t seed) {
  params.validate();
  require(L >= 1 && ell >= 0 && ell < L, "small_ball_probe: need L >= 1 and 0 <= l < L");
  require(directions >= 1, "small_ball_probe: directions must be >= 1");
  require(trials >= 1000, "small_ball_probe: trials must be >= 1000");
  require(std::isfinite(theta), "small_ball_probe: theta must be finite");

  const Index n = params.n(), p = params.p();
  SmallBallResult out;
  out.time_index = L + ell;  // first t >= L with t = l (mod L)

  Rng dir_rng(derive_seed(seed, 0));
  out.directions.resize(n + p, directions);
  for (Index k = 0; k < directions; ++k) out.directions.col(k) = dir_rng.unit_vector(n + p);

  // Trials: L-1 steps from the reset state, then append beta u_t.
  const Matrix u = sample_inputs(model, p, trials * L, derive_seed(seed, 1));
  Matrix z(n + p, trials);
  for (Index i = 0; i < trials; ++i) {
    Vector x = Vector::Zero(n);
    for (Index s = 0; s + 1 < L; ++s) x = potential.gradient_columns(params.A * x + params.B * u.col(i * L + s));
    z.col(i).head(n) = x;
    z.col(i).tail(p) = params.beta * u.col(i * L + L - 1);
  }

  const Matrix proj = out.directions.transpose() * z;  // directions x trials
  for (Index k = 0; k < directions; ++k) {
    const Index hits = (proj.row(k).array().abs() >= theta).count();
    const double prob = static_cast<double>(hits) / static_cast<double>(trials);
    out.probabilities.push_back(prob);
    out.min_prob = std::min(out.min_prob, prob);
  }
  return out;
}

BernsteinProbe bernstein_probe(const SystemParams& params, const InputModel& model, double gamma, Index draws,
                               std::uint64_t seed) {
  params.validate();
  require(gamma > 0.0 && gamma <= 1.0, "bernstein_probe: gamma must lie in (0, 1]");
  require(draws >= 1, "bernstein_probe: draws must be >= 1");
  const Matrix u = sample_inputs(model, params.p(), draws, seed);
  std::vector<double> norms(static_cast<std::size_t>(draws));
  const Matrix bu = params.B * u;
  for (Index i = 0; i < draws; ++i) norms[static_cast<std::size_t>(i)] = bu.col(i).norm();
  std::sort(norms.begin(), norms.end());
  // Nearest rank.
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - gamma) * static_cast<double>(draws)));
  BernsteinProbe out;
  out.quantile = norms[std::clamp<std::size_t>(rank, 1, norms.size()) - 1];
  out.bound_unit_c = params.B.norm() * std::sqrt(std::log(2.0 * static_cast<double>(params.p() + 1) / gamma));
  out.ratio = out.quantile / out.bound_unit_c;
  return out;
}

}  // namespace rnnid
