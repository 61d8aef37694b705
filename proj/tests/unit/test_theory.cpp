#include "helpers.hpp"

#include "rnnid/theory.hpp"

#include <cmath>

using namespace rnnid;
using testing::custom_system;
using testing::error_code_of;

namespace {

// Reference values from tests/oracles/theory_fixtures.py.
constexpr double kThetaFixture = 0.37082039324993690;
constexpr double kStrideRhsFixture = 11.359104874150237;
constexpr Index kStrideFixture = 12;
constexpr Index kHorizonFixture = 30834;

Matrix cols(std::initializer_list<std::initializer_list<double>> columns) {
  const Index p = static_cast<Index>(columns.size());
  const Index n = static_cast<Index>(columns.begin()->size());
  Matrix m(n, p);
  Index j = 0;
  for (auto c : columns) {
    Index i = 0;
    for (double v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("theta fixture") {
  const auto s = custom_system(Matrix::Zero(2, 2), cols({{1, 0}, {0, 1}, {1, 1}}), 1.0);
  const auto id = ConvexPotential::quadratic(Matrix::Identity(2, 2));
  const auto r = theta(s, id, InputModel::gaussian());
  CHECK(r.theta == doctest::Approx(kThetaFixture).epsilon(1e-12));
  CHECK(r.theta == doctest::Approx(0.6 * std::sqrt((3.0 - std::sqrt(5.0)) / 2.0)).epsilon(1e-12));
  CHECK(r.tail_term == 0.0);
  CHECK(r.valid);
}

TEST_CASE("theta with a rank-deficient deletion") {
  const auto s = custom_system(Matrix::Zero(2, 2), cols({{1, 0}, {0, 1}, {0, 1}}), 1.0);
  const auto id = ConvexPotential::quadratic(Matrix::Identity(2, 2));
  CHECK(theta(s, id, InputModel::gaussian()).theta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("theta ignores the tail constants when eps = 0") {
  const auto s = custom_system(Matrix::Zero(2, 2), cols({{1, 0}, {0, 1}, {1, 1}}), 1.0);
  const auto id = ConvexPotential::quadratic(Matrix::Identity(2, 2));
  InputModel m;
  m.orlicz_alpha.reset();
  m.K.reset();
  m.eta = 1e6;
  CHECK(theta(s, id, m).theta == doctest::Approx(kThetaFixture).epsilon(1e-12));
}

TEST_CASE("theta monotonicity") {
  Rng rng(1);
  const Matrix B = rng.normal_matrix(4, 6);
  const auto s = custom_system(Matrix::Zero(4, 4), B, 2.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double lo : {1.0, 0.9, 0.8, 0.7, 0.6}) {  // eps grows as lo shrinks
    const auto f = ConvexPotential::param_relu(lo, 1.0);
    const double th = theta(s, f, InputModel::gaussian()).theta;
    CHECK(th <= prev);
    prev = th;
  }
  const auto id = ConvexPotential::quadratic(Matrix::Identity(4, 4));
  const double base = theta(s, id, InputModel::gaussian()).theta;
  const auto scaled = custom_system(Matrix::Zero(4, 4), 1.5 * B, 2.0);
  CHECK(theta(scaled, id, InputModel::gaussian()).theta >= base);

  const auto invalid = theta(s, ConvexPotential::leaky_relu(0.2), InputModel::gaussian());
  CHECK_FALSE(invalid.valid);
}

TEST_CASE("stride bound fixture") {
  CHECK(stride_bound_rhs(0.5, 1.0, 2.0, 500, 3, 0.05, kThetaFixture, 1.0) ==
        doctest::Approx(kStrideRhsFixture).epsilon(1e-12));
  CHECK(stride_bound(0.5, 1.0, 2.0, 500, 3, 0.05, kThetaFixture, 1.0) == kStrideFixture);
}

TEST_CASE("stride bound properties") {
  SUBCASE("unit argument of the outer log") {
    // Choose theta so that the inner factor is exactly 1.
    const double inner_wo_theta = std::log(2.0 * 499 * 4 / 0.05) * std::pow(2.0 / 0.5, 2);
    const double th = std::sqrt(inner_wo_theta);
    CHECK(stride_bound_rhs(0.5, 1.0, 2.0, 500, 3, 0.05, th, 1.0) == doctest::Approx(1.0));
    CHECK(stride_bound(0.5, 1.0, 2.0, 500, 3, 0.05, th * (1 + 1e-12), 1.0) == 1);
  }
  SUBCASE("substituted back") {
    for (double contraction : {0.2, 0.5, 0.8, 0.95}) {
      for (double th : {0.05, 0.3, 1.0}) {
        const Index L = stride_bound(contraction, 1.0, 5.0, 300, 10, 0.05, th, 1.0);
        const double rhs = stride_bound_rhs(contraction, 1.0, 5.0, 300, 10, 0.05, th, 1.0);
        CHECK(static_cast<double>(L) >= rhs);
        if (L > 1) CHECK(static_cast<double>(L - 1) < rhs);
      }
    }
  }
  SUBCASE("doubling c") {
    for (double contraction : {0.3, 0.5, 0.7, 0.9}) {
      const Index L1 = stride_bound(contraction, 1.0, 4.0, 1000, 20, 0.05, 0.2, 1.0);
      const Index L2 = stride_bound(contraction, 1.0, 4.0, 1000, 20, 0.05, 0.2, 2.0);
      const auto step = static_cast<Index>(std::ceil(2.0 * std::log(2.0) / std::log(1.0 / contraction)));
      CHECK(L2 - L1 <= step);
      CHECK(L2 - L1 >= step - 1);
    }
  }
  SUBCASE("errors") {
    CHECK(error_code_of([] { stride_bound(1.0, 1.0, 2.0, 500, 3, 0.05, 0.3, 1.0); }) == ErrorCode::Infeasible);
    CHECK(error_code_of([] { stride_bound(0.5, 1.0, 2.0, 500, 3, 0.05, 0.0, 1.0); }) == ErrorCode::Infeasible);
    CHECK(error_code_of([] { stride_bound(0.5, 1.0, 2.0, 500, 3, 1.5, 0.3, 1.0); }) ==
          ErrorCode::InvalidArgument);
  }
  SUBCASE("system overload") {
    const auto f = ConvexPotential::leaky_relu(1.0);
    const auto s = sample_system(3, 3, 0.5, f, 2);
    const Index direct = stride_bound(0.5, 1.0, s.B.norm(), 500, 3, 0.05, 0.3, 1.0);
    CHECK(stride_bound(s, f, 500, 3, 0.05, 0.3, 1.0) == direct);
  }
}

TEST_CASE("horizon bound fixture") {
  const Index T = horizon_bound(20, 40, 12, 0.05, 3.0, 1.0);
  CHECK(T == kHorizonFixture);
  CHECK(static_cast<double>(T) >= horizon_rhs(static_cast<double>(T), 20, 40, 12, 0.05, 3.0, 1.0));
  CHECK(static_cast<double>(T - 1) < horizon_rhs(static_cast<double>(T - 1), 20, 40, 12, 0.05, 3.0, 1.0));
}

TEST_CASE("horizon bound properties") {
  SUBCASE("degenerate constant") { CHECK(horizon_bound(5, 5, 3, 0.05, 3.0, 0.0) == 1); }
  SUBCASE("satisfies its inequality, predecessor does not") {
    for (double eta : {1.0, 3.0, 46.2}) {
      for (Index L : {1, 4, 9}) {
        for (double c2 : {0.01, 0.5, 1.0}) {
          const Index T = horizon_bound(10, 20, L, 0.05, eta, c2);
          CHECK(static_cast<double>(T) >= horizon_rhs(static_cast<double>(T), 10, 20, L, 0.05, eta, c2));
          if (T > 1)
            CHECK(static_cast<double>(T - 1) < horizon_rhs(static_cast<double>(T - 1), 10, 20, L, 0.05, eta, c2));
        }
      }
    }
  }
  SUBCASE("unit log") {
    // log(eT / (L(n+p))) = 1 at T = (n+p)L.
    const double d = 30.0, L = 2.0;
    for (double c2 : {0.1, 1.0, 3.0}) {
      const double unit = c2 * 9.0 * d * L + c2 * std::log(8.0 * L / 0.05);
      CHECK(horizon_rhs(d * L, 10, 20, 2, 0.05, 3.0, c2) == doctest::Approx(unit));
    }
  }
  SUBCASE("errors") {
    CHECK(error_code_of([] { horizon_bound(0, 5, 3, 0.05, 3.0, 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { horizon_bound(5, 5, 3, 0.0, 3.0, 1.0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("coherence report") {
  SUBCASE("unit columns") {
    Rng rng(3);
    Matrix B = rng.normal_matrix(4, 9);
    B.colwise().normalize();
    const auto s = custom_system(0.3 * haar_orthogonal(4, rng), B);
    const auto r = coherence_report(s, ConvexPotential::leaky_relu(1.0));
    CHECK(r.mu == doctest::Approx(1.0));
    CHECK(r.contraction == doctest::Approx(0.3));
    CHECK(r.col_deleted_min_eigs.size() == 9);
  }
  SUBCASE("gaussian B at paper scale") {
    int in_range = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      const auto s = custom_system(Matrix::Zero(50, 50), rng.normal_matrix(50, 100));
      const auto r = coherence_report(s, ConvexPotential::leaky_relu(1.0));
      CHECK(r.mu >= 1.0);
      in_range += r.mu <= 2.0;
    }
    CHECK(in_range >= 95);
  }
  SUBCASE("spectral spread") {
    const auto s = custom_system(Matrix::Zero(2, 2), cols({{1, 0}, {0, 1}, {1, 1}}));
    const auto r = coherence_report(s, ConvexPotential::leaky_relu(1.0));
    const double smallest = std::sqrt((3.0 - std::sqrt(5.0)) / 2.0);
    CHECK(r.spectral_spread == doctest::Approx(std::sqrt(2.0) / smallest));
  }
}

TEST_CASE("theory report") {
  const auto f = ConvexPotential::quadratic(Matrix::Identity(4, 4));
  const auto s = sample_system(4, 10, 0.3, f, 5);
  const auto r = theory_report(s, f, InputModel::gaussian(), 500);
  REQUIRE(r.theta);
  CHECK(r.theta_valid);
  REQUIRE(r.L_min);
  REQUIRE(r.T_min);
  CHECK(*r.L_min == stride_bound(s, f, 500, 10, 0.05, *r.theta, 1.0));
  CHECK(*r.T_min == horizon_bound(4, 10, *r.L_min, 0.05, 3.0, 1.0));

  const auto bad = theory_report(s, ConvexPotential::leaky_relu(0.2), InputModel::gaussian(), 500);
  CHECK_FALSE(bad.theta_valid);
  CHECK_FALSE(bad.L_min);
  CHECK_FALSE(bad.T_min);
}

TEST_CASE("small-ball probe") {
  SUBCASE("zero threshold") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto s = sample_system(3, 4, 0.5, f, 6);
    const auto r = small_ball_probe(s, f, InputModel::gaussian(), 3, 1, 0.0, 8, 1000, 7);
    CHECK(r.min_prob == 1.0);
    CHECK(r.probabilities.size() == 8);
    CHECK(r.time_index == 4);
  }
  SUBCASE("gaussian tail oracle") {
    // Linear potential, A* = 0, beta = 1: z = [B u_{t-1}; u_t] is Gaussian
    // with covariance diag(BB', I).
    Rng rng(8);
    const Index n = 3, p = 4;
    const auto s = custom_system(Matrix::Zero(n, n), rng.normal_matrix(n, p), 1.0);
    const auto id = ConvexPotential::quadratic(Matrix::Identity(n, n));
    const double th = 0.8;
    const Index trials = 20000;
    const auto r = small_ball_probe(s, id, InputModel::gaussian(), 2, 0, th, 6, trials, 9);
    Matrix cov = Matrix::Zero(n + p, n + p);
    cov.topLeftCorner(n, n) = s.B * s.B.transpose();
    cov.bottomRightCorner(p, p).setIdentity();
    for (Index k = 0; k < 6; ++k) {
      const Vector w = r.directions.col(k);
      const double sigma = std::sqrt(w.dot(cov * w));
      const double expect = 2.0 * normal_tail(th / sigma);
      const double band = 3.0 * std::sqrt(expect * (1 - expect) / static_cast<double>(trials));
      CHECK(std::abs(r.probabilities[static_cast<std::size_t>(k)] - expect) <= band);
    }
  }
  SUBCASE("argument checks") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto s = sample_system(3, 4, 0.5, f, 6);
    CHECK(error_code_of([&] { small_ball_probe(s, f, InputModel::gaussian(), 3, 1, 0.1, 8, 999, 7); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { small_ball_probe(s, f, InputModel::gaussian(), 3, 3, 0.1, 8, 1000, 7); }) ==
          ErrorCode::InvalidArgument);
  }
  CHECK(small_ball_target(3.0) == doctest::Approx(0.1 / 3.0));
  CHECK(small_ball_target(1.0) == doctest::Approx(0.1 / 3.0));
  CHECK(small_ball_target(46.2) == doctest::Approx(0.1 / 46.2));
}

TEST_CASE("bernstein probe") {
  // Calibration fixture: for Gaussian inputs the empirical 0.99 quantile of
  // |B u| sits well inside |B|_F log^{1/2}(2 (p+1) / gamma).
  const auto f = ConvexPotential::leaky_relu(1.0);
  const auto s = sample_system(10, 20, 0.5, f, 10);
  const auto r = bernstein_probe(s, InputModel::gaussian(), 0.01, 10000, 11);
  CHECK(r.bound_unit_c == doctest::Approx(s.B.norm() * std::sqrt(std::log(2.0 * 21 / 0.01))));
  CHECK(r.ratio == doctest::Approx(r.quantile / r.bound_unit_c));
  CHECK(r.ratio <= 1.0);
  CHECK(r.ratio >= 0.2);
}

}  // TEST_SUITE
