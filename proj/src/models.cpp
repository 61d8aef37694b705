#include "rnnid/models.hpp"

#include "rnnid/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rnnid {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double max_column_norm(const Matrix& m) {
  if (m.cols() == 0) return 0.0;
  return m.colwise().norm().maxCoeff();
}

Matrix haar_orthogonal(Index n, Rng& rng) {
  Matrix g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Matrix SystemParams::c_star() const {
  Matrix c(n(), n() + p());
  c << A, B / beta;
  return c;
}

void SystemParams::validate() const {
  require(A.rows() >= 1 && A.rows() == A.cols(), "SystemParams: A must be square and non-empty");
  require(B.rows() == A.rows() && B.cols() >= 1, "SystemParams: B must be n x p with p >= 1");
  require(std::isfinite(beta) && beta > 0.0, "SystemParams: beta must be positive");
}

double default_beta(const Matrix& B, const ConvexPotential& potential, bool* fallback) {
  const double margin = potential.strong_convexity() - potential.linearization_defect();
  bool used_fallback = !(margin > 0.0);
  const double factor = used_fallback ? 1.0 : margin;
  const double lmin = min_eigenvalue(B * B.transpose());
  double beta = 1.0;
  if (lmin > 1e-12 * std::max(1.0, B.squaredNorm())) beta = factor * std::sqrt(lmin);
  else used_fallback = true;
  if (fallback) *fallback = used_fallback;
  return beta;
}

SystemParams sample_system(Index n, Index p, double spectral_alpha, const ConvexPotential& potential,
                           std::uint64_t seed, std::optional<double> beta_override) {
  require(n >= 1 && p >= 1, "sample_system: n and p must be >= 1");
  require(spectral_alpha > 0.0 && spectral_alpha < 1.0, "sample_system: spectral_alpha must lie in (0, 1)");
  if (auto d = potential.dimension())
    require(*d == n, "sample_system: quadratic potential dimension does not match n");

  Rng rng(seed);
  SystemParams s;
  s.A = spectral_alpha * haar_orthogonal(n, rng);
  s.B = rng.normal_matrix(n, p);
  if (beta_override) {
    require(std::isfinite(*beta_override) && *beta_override > 0.0, "sample_system: beta override must be positive");
    s.beta = *beta_override;
  } else {
    s.beta = default_beta(s.B, potential, &s.beta_fallback);
  }
  s.contraction_violated = potential.smoothness() * spectral_alpha >= 1.0;
  return s;
}

std::string to_string(InputLaw law) {
  switch (law) {
    case InputLaw::Gaussian: return "gaussian";
    case InputLaw::CubedGaussian: return "cubed_gaussian";
  }
  return "unknown";
}

InputModel InputModel::gaussian() {
  InputModel m;
  m.law = InputLaw::Gaussian;
  m.normalize_isotropic = true;
  m.orlicz_alpha = 2.0;
  // E exp(g^2/K^2) = (1 - 2/K^2)^{-1/2} = 2  <=>  K^2 = 8/3.
  m.K = std::sqrt(8.0 / 3.0);
  m.eta = 3.0;
  return m;
}

InputModel InputModel::cubed_gaussian(bool normalize_isotropic) {
  InputModel m;
  m.law = InputLaw::CubedGaussian;
  m.normalize_isotropic = normalize_isotropic;
  // |g^3|^{2/3} = g^2, so u = s g^3 has E exp(|u|^{2/3}/K^{2/3}) =
  // (1 - 2 s^{2/3}/K^{2/3})^{-1/2}; equal to 2 at K = s (8/3)^{3/2}.
  const double s = m.coordinate_scale();
  m.orlicz_alpha = 2.0 / 3.0;
  m.K = s * std::pow(8.0 / 3.0, 1.5);
  // E g^12 = 11!! = 10395.
  m.eta = 10395.0 * std::pow(s, 4);
  return m;
}

InputModel InputModel::from_law(InputLaw law, bool normalize_isotropic) {
  return law == InputLaw::Gaussian ? gaussian() : cubed_gaussian(normalize_isotropic);
}

double InputModel::coordinate_scale() const {
  if (law == InputLaw::CubedGaussian && normalize_isotropic) return 1.0 / std::sqrt(15.0);
  return 1.0;
}

Matrix sample_inputs(const InputModel& model, Index p, Index count, std::uint64_t seed) {
  require(p >= 1, "sample_inputs: p must be >= 1");
  require(count >= 0, "sample_inputs: count must be >= 0");
  Rng rng(seed);
  Matrix u = rng.normal_matrix(p, count);
  if (model.law == InputLaw::CubedGaussian) {
    const double s = model.coordinate_scale();
    u = u.unaryExpr([s](double g) { return s * g * g * g; });
  }
  return u;
}

double eta_from_orlicz(double alpha, double K) {
  return 2.0 * std::pow(4.0 / alpha, 4.0 / alpha) * std::pow(K, 4);
}

namespace {

double orlicz_mean(const Vector& abs_proj, double alpha, double K) {
  double acc = 0.0;
  for (Index i = 0; i < abs_proj.size(); ++i) acc += std::exp(std::pow(abs_proj(i) / K, alpha));
  return acc / static_cast<double>(abs_proj.size());
}

// Smallest grid index j with E exp(|v|^a/(j h)^a) <= 2, given that index
// `known_ok` already satisfies it.
long smallest_grid_index(const Vector& abs_proj, double alpha, long known_ok) {
  long hi = known_ok;
  long lo = 0;  // K = 0 never satisfies
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (orlicz_mean(abs_proj, alpha, mid * kOrliczGridStep) <= 2.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

DistributionConstants distribution_constants(const InputModel& model, Index p, Index sample_budget,
                                             std::uint64_t seed) {
  require(p >= 1, "distribution_constants: p must be >= 1");
  require(sample_budget >= 10000, "distribution_constants: sample_budget must be >= 1e4");
  require(static_cast<double>(p) * static_cast<double>(sample_budget) <= 2e8,
          "distribution_constants: p * sample_budget too large to hold in memory");

  const Matrix u = sample_inputs(model, p, sample_budget, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  Matrix probes(p, p + kRandomProbeDirections);
  probes.leftCols(p).setIdentity();
  for (Index k = 0; k < kRandomProbeDirections; ++k) probes.col(p + k) = rng.unit_vector(p);

  DistributionConstants out;
  out.probes = probes.cols();
  const auto alpha = model.orlicz_alpha;
  long k_index = 0;

  for (Index k = 0; k < probes.cols(); ++k) {
    const Vector proj = u.transpose() * probes.col(k);
    out.eta_est = std::max(out.eta_est, proj.array().pow(4).mean());
    if (!alpha) continue;

    const Vector abs_proj = proj.cwiseAbs();
    if (k_index > 0 && orlicz_mean(abs_proj, *alpha, k_index * kOrliczGridStep) <= 2.0) continue;
    // Exponential search for a satisfying grid point, then bisect.
    long hi = std::max<long>(k_index, 1);
    while (orlicz_mean(abs_proj, *alpha, hi * kOrliczGridStep) > 2.0) {
      hi *= 2;
      if (hi > (1L << 40)) fail(ErrorCode::Numeric, "distribution_constants: Orlicz search did not terminate");
    }
    k_index = smallest_grid_index(abs_proj, *alpha, hi);
  }

  if (alpha) {
    out.K_est = k_index * kOrliczGridStep;
    out.eta_bound = eta_from_orlicz(*alpha, *out.K_est);
  }
  return out;
}

}  // namespace rnnid
