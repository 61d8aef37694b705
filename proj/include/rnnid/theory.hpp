#pragma once

#include "rnnid/core.hpp"
#include "rnnid/models.hpp"
#include "rnnid/potentials.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rnnid {

/// Small-ball threshold
///   theta = -eps K log^{1/a}(10 max{eta,3}) |B|_{1->2}
///           + 0.6 min_i min{beta, (lambda - eps) lambda_min^{1/2}(B_\i B_\i')}
/// where B_\i is B with column i zeroed.
struct ThetaResult {
  double theta = 0.0;
  double tail_term = 0.0;    // first (non-positive) term
  double spread_term = 0.0;  // second term
  /// False when eps >= lambda (the lower bound on |F(x)y| is vacuous).
  bool valid = true;
};

ThetaResult theta(const SystemParams& params, const ConvexPotential& potential, const InputModel& model);

/// lambda_min^{1/2}(B_\i B_\i') for every column i.
std::vector<double> column_deleted_min_singular(const Matrix& B);

/// Right-hand side of the stride condition
///   1 + log((c/theta)^2 log(2(T-1)(p+1)/delta) (Lambda |B|_F / (1 - Lambda|A|))^2) / log(1/(Lambda|A|)).
double stride_bound_rhs(double contraction, double Lambda, double B_frobenius, Index T, Index p, double delta,
                        double theta, double c);

/// Smallest integer L >= max(1, rhs). Throws Infeasible unless
/// Lambda |A*| < 1, theta > 0 and 0 < delta < 1; needs T >= 2.
Index stride_bound(const SystemParams& params, const ConvexPotential& potential, Index T, Index p, double delta,
                   double theta, double c);
Index stride_bound(double contraction, double Lambda, double B_frobenius, Index T, Index p, double delta,
                   double theta, double c);

/// c2 [max{eta^2, 9} (n+p) L log(e T / (L (n+p))) + log(8L/delta)].
double horizon_rhs(double T, Index n, Index p, Index L, double delta, double eta, double c2);

/// Smallest T with T >= horizon_rhs(T). When (n+p)L already satisfies it the
/// smallest such T >= 1 is returned (c2 = 0 gives 1); otherwise the
/// fixed-point iteration T <- ceil(rhs(T)) from (n+p)L, which increases
/// monotonically to the least solution above (n+p)L.
Index horizon_bound(Index n, Index p, Index L, double delta, double eta, double c2);

struct TheorySettings {
  double delta = 0.05;
  double c = 1.0;   // constant of the stride condition
  double c2 = 1.0;  // hidden constant of the horizon condition
};

struct TheoryReport {
  std::optional<double> theta;
  bool theta_valid = false;
  double mu = 0.0;            // p^{1/2} |B|_{1->2} / |B|_F
  double contraction = 0.0;   // Lambda |A*|
  std::optional<Index> L_min;
  std::optional<Index> T_min;
  double eta = 0.0;
  double delta = 0.05;
  double c = 1.0;
  double c2 = 1.0;
  Index horizon = 0;          // T used in the stride condition
  std::vector<double> col_deleted_min_eigs;
  double spectral_spread = 0.0;  // max_i |B|_{1->2} / lambda_min^{1/2}(B_\i B_\i')
  double beta = 0.0;
  double lambda = 0.0;
  double Lambda = 0.0;
  double epsilon = 0.0;
};

/// Fills mu, contraction, the column-deleted spectra and the spread statistic.
TheoryReport coherence_report(const SystemParams& params, const ConvexPotential& potential);

/// Everything: coherence, theta, L_min for horizon T and T_min for that L_min.
/// Bounds whose preconditions fail are left empty.
TheoryReport theory_report(const SystemParams& params, const ConvexPotential& potential, const InputModel& model,
                           Index T, const TheorySettings& settings = {});

struct SmallBallResult {
  std::vector<double> probabilities;  // one per direction
  double min_prob = 1.0;
  Index time_index = 0;  // the t in T_l that was probed
  Matrix directions;     // (n+p) x directions
};

/// Monte-Carlo estimate of P(|w' z^{(l)}_t| >= theta) for random unit w, at the
/// first t in T_l. Each trial draws fresh inputs for the L-1 steps following
/// the restart plus u_t; all directions share the trials.
SmallBallResult small_ball_probe(const SystemParams& params, const ConvexPotential& potential,
                                 const InputModel& model, Index L, Index ell, double theta, Index directions,
                                 Index trials, std::uint64_t seed);

/// Target 0.1 / max{eta, 3}.
double small_ball_target(double eta);

struct BernsteinProbe {
  double quantile = 0.0;   // empirical (1 - gamma) quantile of |B u|
  double bound_unit_c = 0.0;  // |B|_F log^{1/2}(2 (p+1) / gamma)
  double ratio = 0.0;      // quantile / bound_unit_c, i.e. the smallest c that works
};

BernsteinProbe bernstein_probe(const SystemParams& params, const InputModel& model, double gamma, Index draws,
                               std::uint64_t seed);

}  // namespace rnnid
