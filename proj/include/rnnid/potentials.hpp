#pragma once

#include "rnnid/core.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rnnid {

enum class PotentialKind { Quadratic, LeakyRelu, ParamRelu };

std::string to_string(PotentialKind kind);

struct GradEval {
  double value = 0.0;
  Vector gradient;
};

/// Convex potential f whose gradient is the recurrent nonlinearity.
///
/// Three families are supported:
///  - Quadratic: f(x) = x'Qx/2 with Q symmetric PSD. lambda = lambda_min(Q),
///    Lambda = lambda_max(Q), epsilon = 0, F(x) = Q.
///  - ParamRelu(lo, hi): f(x) = sum_i max{lo (-x_i)_+^2, hi (x_i)_+^2}/2, i.e. a
///    coordinatewise ReLU with slope hi on the positive and lo on the negative
///    half line. lambda = lo, Lambda = hi, epsilon = (hi - lo)/2.
///  - LeakyRelu(rho): stored as ParamRelu(rho, 1); only the reported kind
///    differs. rho = 0 (plain ReLU) is allowed but flagged as violating strong
///    convexity.
///
/// Separable kinds have no fixed dimension; Quadratic is bound to Q's size.
/// Instances are immutable and safe to share between threads.
class ConvexPotential {
 public:
  static ConvexPotential quadratic(Matrix q);
  static ConvexPotential leaky_relu(double rho);
  static ConvexPotential param_relu(double lambda_lo, double lambda_hi);

  PotentialKind kind() const noexcept { return kind_; }
  bool separable() const noexcept { return kind_ != PotentialKind::Quadratic; }

  double strong_convexity() const noexcept { return lambda_; }
  double smoothness() const noexcept { return Lambda_; }
  double linearization_defect() const noexcept { return epsilon_; }
  /// lambda <= 0: strong convexity fails, still simulatable.
  bool assumption_violating() const noexcept { return !(lambda_ > 0.0); }
  bool invertible_gradient() const noexcept { return lambda_ > 0.0; }

  /// Slope on the negative half line (ParamRelu / LeakyRelu only).
  double negative_slope() const noexcept { return lo_; }
  double positive_slope() const noexcept { return hi_; }
  const Matrix& q() const noexcept { return q_; }
  std::optional<Index> dimension() const;

  GradEval grad_eval(const Vector& x) const;
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix local_map(const Vector& x) const;
  Vector conjugate_grad(const Vector& y) const;

  // Column-batched variants used by the simulator and the solvers. No
  // finiteness checks: callers detect blow-up themselves.
  Matrix gradient_columns(const Matrix& y) const;
  double value_sum_columns(const Matrix& y) const;
  Matrix conjugate_grad_columns(const Matrix& y) const;

 private:
  static ConvexPotential piecewise(double lambda_lo, double lambda_hi);
  ConvexPotential() = default;
  void check_input(const Vector& x, const char* what) const;

  PotentialKind kind_ = PotentialKind::ParamRelu;
  double lambda_ = 1.0;
  double Lambda_ = 1.0;
  double epsilon_ = 0.0;
  double lo_ = 1.0;
  double hi_ = 1.0;
  Matrix q_;
  Matrix q_inverse_;
};

/// Worst-case slack per inequality; every entry must be >= -1e-12 for the
/// potential to satisfy its stated constants on the sampled pairs.
struct RegularityReport {
  std::size_t samples = 0;
  double strong_convexity = 0.0;     // curvature lower bound
  double smoothness = 0.0;           // curvature upper bound
  double linearization = 0.0;        // linearization bound with the potential's epsilon
  double local_map_lower = 0.0;      // (lambda - eps)|y| <= |F(x)y|
  double local_map_upper = 0.0;      // |F(x)y| <= (Lambda + eps)|y|
  double gradient_lower = 0.0;       // lambda|y-x| <= |grad f(y) - grad f(x)|
  double gradient_upper = 0.0;       // |grad f(y) - grad f(x)| <= Lambda|y-x|

  double min_slack() const;
  bool holds(double tolerance = 1e-12) const { return min_slack() >= -tolerance; }
};

/// Random (x, y) pairs: standard normal draws with roughly a quarter of
/// coordinates pinned to zero so that the kinks of the ReLU kinds are hit.
RegularityReport verify_regularity(const ConvexPotential& potential, std::size_t sample_count,
                                   Index dimension, std::uint64_t seed);

}  // namespace rnnid
