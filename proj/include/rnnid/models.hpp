#pragma once

#include "rnnid/core.hpp"
#include "rnnid/potentials.hpp"
#include "rnnid/random.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rnnid {

// ---------------------------------------------------------------------------
// Linear-algebra helpers shared by the modules.

/// Largest singular value.
double spectral_norm(const Matrix& m);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& symmetric);
/// Largest column l2 norm, i.e. the 1->2 operator norm.
double max_column_norm(const Matrix& m);

/// Haar-distributed orthogonal matrix: QR of an i.i.d. standard normal matrix
/// with the signs of diag(R) folded into Q.
Matrix haar_orthogonal(Index n, Rng& rng);

// ---------------------------------------------------------------------------

/// Ground truth (A*, B*, beta). C* = [A* | B*/beta] is n x (n+p).
struct SystemParams {
  Matrix A;
  Matrix B;
  double beta = 1.0;
  bool contraction_violated = false;  // Lambda * |A*| >= 1
  bool beta_fallback = false;         // default beta rule was not usable

  Index n() const { return A.rows(); }
  Index p() const { return B.cols(); }
  Matrix c_star() const;
  void validate() const;
};

/// Default normalizer (lambda - eps) * lambda_min(BB')^{1/2}. When lambda - eps
/// <= 0 the factor is replaced by 1, and when BB' is singular the result is 1;
/// `fallback` reports either case.
double default_beta(const Matrix& B, const ConvexPotential& potential, bool* fallback = nullptr);

/// A* = spectral_alpha * R with R Haar, B* i.i.d. N(0, 1).
SystemParams sample_system(Index n, Index p, double spectral_alpha, const ConvexPotential& potential,
                           std::uint64_t seed, std::optional<double> beta_override = std::nullopt);

// ---------------------------------------------------------------------------

enum class InputLaw { Gaussian, CubedGaussian };

std::string to_string(InputLaw law);

/// Input law with i.i.d. symmetric coordinates and its regularity constants:
/// psi-alpha exponent, Orlicz bound K (sup over directions of the smallest K
/// with E exp(|<h,u>|^a / K^a) <= 2) and the directional fourth moment eta.
/// The constants are analytic for the supported laws; distribution_constants()
/// estimates them empirically.
struct InputModel {
  InputLaw law = InputLaw::Gaussian;
  bool normalize_isotropic = true;
  std::optional<double> orlicz_alpha;
  std::optional<double> K;
  double eta = 3.0;

  static InputModel gaussian();
  /// g^3 coordinates; divided by sqrt(15) when normalized so E uu' = I.
  static InputModel cubed_gaussian(bool normalize_isotropic = true);
  static InputModel from_law(InputLaw law, bool normalize_isotropic = true);

  double coordinate_scale() const;
};

/// p x count matrix; column t is u_t.
Matrix sample_inputs(const InputModel& model, Index p, Index count, std::uint64_t seed);

struct DistributionConstants {
  std::optional<double> K_est;
  double eta_est = 0.0;
  std::optional<double> eta_bound;  // 2 (4/a)^{4/a} K_est^4
  Index probes = 0;
};

/// Empirical constants over the probe set {coordinate axes} + 64 random unit
/// directions. K_est is the smallest multiple of kOrliczGridStep meeting the
/// psi-alpha condition on every probe.
inline constexpr double kOrliczGridStep = 0.005;
inline constexpr Index kRandomProbeDirections = 64;

DistributionConstants distribution_constants(const InputModel& model, Index p, Index sample_budget,
                                             std::uint64_t seed);

/// 2 (4/a)^{4/a} K^4, the fourth-moment bound implied by a psi-alpha bound.
double eta_from_orlicz(double alpha, double K);

}  // namespace rnnid
