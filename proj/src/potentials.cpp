#include "rnnid/potentials.hpp"

#include "rnnid/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rnnid {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Quadratic: return "quadratic";
    case PotentialKind::LeakyRelu: return "leaky_relu";
    case PotentialKind::ParamRelu: return "param_relu";
  }
  return "unknown";
}

ConvexPotential ConvexPotential::quadratic(Matrix q) {
  require(q.rows() >= 1 && q.rows() == q.cols(), "quadratic potential: Q must be square and non-empty");
  require(q.allFinite(), "quadratic potential: Q has non-finite entries");
  require((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()),
          "quadratic potential: Q must be symmetric");
  Matrix sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  require(lo >= -1e-12 * std::max(1.0, hi), "quadratic potential: Q must be positive semidefinite");

  ConvexPotential p;
  p.kind_ = PotentialKind::Quadratic;
  p.lambda_ = lo > 1e-14 * std::max(1.0, hi) ? lo : 0.0;
  p.Lambda_ = hi;
  p.epsilon_ = 0.0;
  p.lo_ = p.lambda_;
  p.hi_ = hi;
  p.q_ = std::move(sym);
  if (p.lambda_ > 0.0) p.q_inverse_ = p.q_.llt().solve(Matrix::Identity(p.q_.rows(), p.q_.cols()));
  return p;
}

ConvexPotential ConvexPotential::param_relu(double lambda_lo, double lambda_hi) {
  require(std::isfinite(lambda_lo) && std::isfinite(lambda_hi), "param_relu: slopes must be finite");
  require(lambda_lo > 0.0 && lambda_hi >= lambda_lo, "param_relu: need 0 < lambda_lo <= lambda_hi");
  return piecewise(lambda_lo, lambda_hi);
}

ConvexPotential ConvexPotential::piecewise(double lambda_lo, double lambda_hi) {
  ConvexPotential p;
  p.kind_ = PotentialKind::ParamRelu;
  p.lo_ = lambda_lo;
  p.hi_ = lambda_hi;
  p.lambda_ = lambda_lo;
  p.Lambda_ = lambda_hi;
  p.epsilon_ = 0.5 * (lambda_hi - lambda_lo);
  return p;
}

ConvexPotential ConvexPotential::leaky_relu(double rho) {
  require(std::isfinite(rho) && rho >= 0.0 && rho <= 1.0, "leaky_relu: rho must lie in [0, 1]");
  ConvexPotential p = piecewise(rho, 1.0);
  p.kind_ = PotentialKind::LeakyRelu;
  return p;
}

std::optional<Index> ConvexPotential::dimension() const {
  if (kind_ == PotentialKind::Quadratic) return q_.rows();
  return std::nullopt;
}

void ConvexPotential::check_input(const Vector& x, const char* what) const {
  require(x.allFinite(), std::string(what) + ": non-finite input");
  if (kind_ == PotentialKind::Quadratic)
    require(x.size() == q_.rows(), std::string(what) + ": dimension does not match Q");
}

GradEval ConvexPotential::grad_eval(const Vector& x) const {
  check_input(x, "grad_eval");
  return {value_sum_columns(x), gradient_columns(x)};
}

double ConvexPotential::value(const Vector& x) const {
  check_input(x, "value");
  return value_sum_columns(x);
}

Vector ConvexPotential::gradient(const Vector& x) const {
  check_input(x, "gradient");
  return gradient_columns(x);
}

Matrix ConvexPotential::gradient_columns(const Matrix& y) const {
  if (kind_ == PotentialKind::Quadratic) return q_ * y;
  const double lo = lo_, hi = hi_;
  return y.unaryExpr([lo, hi](double v) { return v > 0.0 ? hi * v : lo * v; });
}

double ConvexPotential::value_sum_columns(const Matrix& y) const {
  if (kind_ == PotentialKind::Quadratic) return 0.5 * (y.array() * (q_ * y).array()).sum();
  const double lo = lo_, hi = hi_;
  return 0.5 * y.unaryExpr([lo, hi](double v) { return v > 0.0 ? hi * v * v : lo * v * v; }).sum();
}

Matrix ConvexPotential::local_map(const Vector& x) const {
  check_input(x, "local_map");
  if (kind_ == PotentialKind::Quadratic) return q_;
  const double mid = 0.5 * (hi_ + lo_);
  const double half = 0.5 * (hi_ - lo_);
  // sgn(0) = 0: any value in [-1, 1] satisfies the linearization bound at the kink.
  Vector diag = x.unaryExpr([mid, half](double v) {
    const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return mid + half * s;
  });
  return diag.asDiagonal();
}

Vector ConvexPotential::conjugate_grad(const Vector& y) const {
  check_input(y, "conjugate_grad");
  return conjugate_grad_columns(y);
}

Matrix ConvexPotential::conjugate_grad_columns(const Matrix& y) const {
  if (!invertible_gradient())
    fail(ErrorCode::UnsupportedPotential,
         "conjugate_grad: gradient of " + to_string(kind_) + " potential is not invertible (lambda = 0)");
  if (kind_ == PotentialKind::Quadratic) return q_inverse_ * y;
  const double lo = lo_, hi = hi_;
  return y.unaryExpr([lo, hi](double v) { return v > 0.0 ? v / hi : v / lo; });
}

double RegularityReport::min_slack() const {
  return std::min({strong_convexity, smoothness, linearization, local_map_lower, local_map_upper,
                   gradient_lower, gradient_upper});
}

RegularityReport verify_regularity(const ConvexPotential& potential, std::size_t sample_count,
                                   Index dimension, std::uint64_t seed) {
  require(sample_count >= 1, "verify_regularity: sample_count must be >= 1");
  if (auto d = potential.dimension()) dimension = *d;
  require(dimension >= 1, "verify_regularity: dimension must be >= 1");

  Rng rng(seed);
  auto draw = [&] {
    Vector v = rng.normal_vector(dimension);
    for (Index i = 0; i < dimension; ++i)
      if (rng.uniform() < 0.25) v(i) = 0.0;
    return v;
  };

  const double lam = potential.strong_convexity();
  const double Lam = potential.smoothness();
  const double eps = potential.linearization_defect();
  constexpr double inf = std::numeric_limits<double>::infinity();

  RegularityReport r;
  r.samples = sample_count;
  r.strong_convexity = r.smoothness = r.linearization = inf;
  r.local_map_lower = r.local_map_upper = r.gradient_lower = r.gradient_upper = inf;

  for (std::size_t s = 0; s < sample_count; ++s) {
    const Vector x = draw();
    const Vector y = draw();

    const GradEval fx = potential.grad_eval(x);
    const GradEval fy = potential.grad_eval(y);
    const double dist = (y - x).norm();
    const double bregman = fy.value - fx.value - fx.gradient.dot(y - x);
    r.strong_convexity = std::min(r.strong_convexity, bregman - 0.5 * lam * dist * dist);
    r.smoothness = std::min(r.smoothness, 0.5 * Lam * dist * dist - bregman);

    const double gdist = (fy.gradient - fx.gradient).norm();
    r.gradient_lower = std::min(r.gradient_lower, gdist - lam * dist);
    r.gradient_upper = std::min(r.gradient_upper, Lam * dist - gdist);

    const Matrix F = potential.local_map(x);
    const Vector Fy = F * y;
    const Vector sym_diff = 0.5 * (potential.gradient(x + y) - potential.gradient(x - y));
    const double ynorm = y.norm();
    r.linearization = std::min(r.linearization, eps * ynorm - (sym_diff - Fy).norm());
    r.local_map_lower = std::min(r.local_map_lower, Fy.norm() - (lam - eps) * ynorm);
    r.local_map_upper = std::min(r.local_map_upper, (Lam + eps) * ynorm - Fy.norm());
  }
  return r;
}

}  // namespace rnnid
