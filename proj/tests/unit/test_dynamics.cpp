#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace rnnid;
using testing::custom_system;
using testing::error_code_of;
using testing::make_instance;

TEST_SUITE("dynamics") {

TEST_CASE("simulate: memoryless linear system") {
  Rng rng(1);
  const auto s = custom_system(Matrix::Zero(3, 3), rng.normal_matrix(3, 4));
  const auto id = ConvexPotential::quadratic(Matrix::Identity(3, 3));
  const Matrix u = rng.normal_matrix(4, 10);
  const auto traj = simulate(s, id, u, 10);
  CHECK(traj.states().col(0).norm() == 0.0);
  for (Index t = 1; t <= 10; ++t) CHECK((traj.states().col(t) - s.B * u.col(t - 1)).norm() <= 1e-14);
}

TEST_CASE("simulate: zero horizon") {
  const auto s = sample_system(3, 2, 0.5, ConvexPotential::leaky_relu(0.5), 1);
  const auto traj = simulate(s, ConvexPotential::leaky_relu(0.5), Matrix(2, 0), 0);
  CHECK(traj.horizon() == 0);
  CHECK(traj.states().cols() == 1);
  CHECK(traj.states().norm() == 0.0);
}

TEST_CASE("simulate: unrolled linear sum") {
  Rng rng(2);
  const Index n = 4, p = 3, T = 25;
  const auto s = sample_system(n, p, 0.7, ConvexPotential::leaky_relu(1.0), 5);
  const auto id = ConvexPotential::quadratic(Matrix::Identity(n, n));
  const Matrix u = rng.normal_matrix(p, T);
  const auto traj = simulate(s, id, u, T);
  for (Index t = 1; t <= T; ++t) {
    Vector x = Vector::Zero(n);
    Matrix Ak = Matrix::Identity(n, n);
    for (Index k = 0; k < t; ++k) {
      x += Ak * s.B * u.col(t - 1 - k);
      Ak = Ak * s.A;
    }
    CHECK((traj.states().col(t) - x).norm() <= 1e-10);
  }
}

TEST_CASE("simulate: recursion replay and stacking") {
  const auto f = ConvexPotential::leaky_relu(0.3);
  const auto inst = make_instance(5, 7, 40, 0.6, f, 3);
  const auto& tr = inst.trajectory;
  for (Index t = 1; t <= 40; ++t) {
    const Vector pre = inst.system.A * tr.states().col(t - 1) + inst.system.B * tr.inputs().col(t - 1);
    CHECK((tr.states().col(t) - f.gradient(pre)).norm() == 0.0);
  }
  CHECK(tr.stacked().rows() == 12);
  CHECK(tr.stacked().cols() == 40);
  for (Index t : {0, 17, 39}) {
    CHECK((tr.z(t).head(5) - tr.states().col(t)).norm() == 0.0);
    CHECK((tr.z(t).tail(7) - inst.system.beta * tr.inputs().col(t)).norm() == 0.0);
  }
  const auto again = make_instance(5, 7, 40, 0.6, f, 3);
  CHECK(again.trajectory.states() == tr.states());
}

TEST_CASE("simulate: argument checks") {
  const auto f = ConvexPotential::leaky_relu(0.5);
  const auto s = sample_system(3, 2, 0.5, f, 1);
  CHECK(error_code_of([&] { simulate(s, f, Matrix::Zero(2, 3), 4); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { simulate(s, f, Matrix::Zero(3, 5), 4); }) == ErrorCode::InvalidArgument);
  const auto q = ConvexPotential::quadratic(Matrix::Identity(4, 4));
  CHECK(error_code_of([&] { simulate(s, q, Matrix::Zero(2, 5), 4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("gram matrix") {
  const auto f = ConvexPotential::leaky_relu(0.5);
  SUBCASE("rank one at T = 1") {
    const auto inst = make_instance(3, 4, 1, 0.5, f, 4);
    const auto g = gram_min_eig(inst.trajectory);
    const Vector z = inst.trajectory.z(0);
    CHECK((g.sigma - z * z.transpose()).norm() <= 1e-14);
    CHECK(std::abs(g.lambda_min) <= 1e-12);
  }
  SUBCASE("symmetric PSD and quadratic-form identity") {
    const auto inst = make_instance(6, 9, 120, 0.5, f, 5);
    const auto g = gram_min_eig(inst.trajectory);
    CHECK((g.sigma - g.sigma.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.sigma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(g.lambda_min == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-9));
    Rng rng(6);
    for (int k = 0; k < 10; ++k) {
      const Vector w = rng.unit_vector(15);
      const double direct = (inst.trajectory.stacked().transpose() * w).squaredNorm();
      CHECK(w.dot(g.sigma * w) == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("restarted trajectories") {
  const auto f = ConvexPotential::leaky_relu(0.5);
  const auto inst = make_instance(4, 6, 50, 0.5, f, 7);
  const auto& tr = inst.trajectory;

  SUBCASE("reset and replay") {
    const Index L = 5, ell = 2;
    const auto r = restarted_trajectory(tr, inst.system, f, L, ell);
    CHECK(r.stride == L);
    CHECK(r.offset == ell);
    for (Index t = 0; t < 50; ++t) {
      if (t % L == ell) {
        CHECK(r.states.col(t + 1).norm() == 0.0);
        if (t + 2 <= 50) {
          const Vector expect = f.gradient(inst.system.B * tr.inputs().col(t + 1));
          CHECK((r.states.col(t + 2) - expect).norm() <= 1e-15);
        }
      } else {
        const Vector pre = inst.system.A * r.states.col(t) + inst.system.B * tr.inputs().col(t);
        CHECK((r.states.col(t + 1) - f.gradient(pre)).norm() == 0.0);
      }
    }
    const auto again = restarted_trajectory(tr, inst.system, f, L, ell);
    CHECK(again.states == r.states);
  }

  SUBCASE("index sets partition {L, ..., T-1}") {
    for (Index L : {1, 3, 7, 50}) {
      const auto fam = restarted_family(tr, inst.system, f, L);
      CHECK(fam.size() == static_cast<std::size_t>(L));
      std::multiset<Index> all;
      for (const auto& r : fam) {
        for (Index t : r.index_set) {
          CHECK(t % L == r.offset);
          all.insert(t);
        }
      }
      CHECK(all.size() == static_cast<std::size_t>(std::max<Index>(0, 50 - L)));
      Index expect = L;
      for (Index t : all) CHECK(t == expect++);
    }
  }

  SUBCASE("single reset when L = T") {
    const auto r = restarted_trajectory(tr, inst.system, f, 50, 10);
    for (Index t = 0; t <= 10; ++t)
      CHECK((r.states.col(t) - tr.states().col(t)).norm() == 0.0);
    CHECK(r.states.col(11).norm() == 0.0);
  }

  SUBCASE("argument checks") {
    CHECK(error_code_of([&] { restarted_trajectory(tr, inst.system, f, 0, 0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { restarted_trajectory(tr, inst.system, f, 4, 4); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { restarted_trajectory(tr, inst.system, f, 51, 0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("S decomposition") {
  SUBCASE("memoryless linear system has no restart gap") {
    Rng rng(8);
    const auto s = custom_system(Matrix::Zero(3, 3), rng.normal_matrix(3, 4));
    const auto id = ConvexPotential::quadratic(Matrix::Identity(3, 3));
    const auto tr = simulate(s, id, rng.normal_matrix(4, 40), 40);
    const auto fam = restarted_family(tr, s, id, 4);
    const auto d = s_decomposition(tr, fam, rng.unit_vector(7));
    for (double st : d.s_tilde) CHECK(st == 0.0);
  }
  SUBCASE("chain lower bound") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto inst = make_instance(5, 8, 200, 0.5, f, 9);
    Rng rng(10);
    for (Index L : {1, 2, 4, 8}) {
      const auto fam = restarted_family(inst.trajectory, inst.system, f, L);
      for (int k = 0; k < 10; ++k) {
        const auto d = s_decomposition(inst.trajectory, fam, rng.unit_vector(13));
        CHECK(d.quadratic_form >= d.chain_lower_bound - 1e-9);
        double sum = 0.0;
        for (std::size_t l = 0; l < d.s.size(); ++l) sum += 0.5 * d.s[l] - d.s_tilde[l];
        CHECK(d.chain_lower_bound == doctest::Approx(sum));
      }
    }
  }
  SUBCASE("gap shrinks geometrically with the stride") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto inst = make_instance(5, 8, 400, 0.5, f, 11);
    const double contraction = spectral_norm(inst.system.A);
    Rng rng(12);
    const Vector w = rng.unit_vector(13);
    auto worst = [&](Index L) {
      const auto d = s_decomposition(inst.trajectory, restarted_family(inst.trajectory, inst.system, f, L), w);
      return *std::max_element(d.s_tilde.begin(), d.s_tilde.end());
    };
    // Doubling L from 2 to 4 to 8: worst gap bounded by the contraction rate
    // over the added steps (times the per-offset count ratio, which is <= 1
    // after doubling) with a modest Monte-Carlo allowance.
    const double g2 = worst(2), g4 = worst(4), g8 = worst(8);
    CHECK(g4 <= g2 * std::pow(contraction, 2 * 2) * 4.0);
    CHECK(g8 <= g4 * std::pow(contraction, 2 * 4) * 4.0);
  }
  SUBCASE("non-unit direction rejected") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto inst = make_instance(2, 2, 10, 0.5, f, 13);
    const auto fam = restarted_family(inst.trajectory, inst.system, f, 2);
    CHECK(error_code_of([&] { s_decomposition(inst.trajectory, fam, Vector::Ones(4)); }) ==
          ErrorCode::InvalidArgument);
  }
}

TEST_CASE("deviation check") {
  SUBCASE("contractive runs") {
    for (double rho : {1.0, 0.5, 0.3}) {
      const auto f = ConvexPotential::leaky_relu(rho);
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto inst = make_instance(6, 10, 150, 0.6, f, 100 + seed);
        for (Index L : {1, 2, 4, 8}) {
          const auto fam = restarted_family(inst.trajectory, inst.system, f, L);
          CHECK(deviation_check(inst.trajectory, fam, f, inst.system) >= -1e-12);
        }
      }
    }
  }
  SUBCASE("L = 1 evaluated directly") {
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto inst = make_instance(4, 5, 30, 0.5, f, 14);
    const auto& tr = inst.trajectory;
    const auto fam = restarted_family(tr, inst.system, f, 1);
    double direct = std::numeric_limits<double>::infinity();
    for (Index t = 1; t < 30; ++t) {
      const Vector gap = tr.states().col(t) - fam[0].states.col(t);
      direct = std::min(direct, tr.states().col(t).squaredNorm() - gap.squaredNorm());
    }
    CHECK(deviation_check(tr, fam, f, inst.system) == doctest::Approx(direct));
    CHECK(direct == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("memoryless system") {
    Rng rng(15);
    const auto s = custom_system(Matrix::Zero(3, 3), rng.normal_matrix(3, 3));
    const auto f = ConvexPotential::leaky_relu(0.5);
    const auto tr = simulate(s, f, rng.normal_matrix(3, 30), 30);
    for (Index L : {2, 5}) CHECK(deviation_check(tr, restarted_family(tr, s, f, L), f, s) >= 0.0);
  }
}

TEST_CASE("state norm bound") {
  for (double rho : {1.0, 0.5, 0.0}) {
    const auto f = ConvexPotential::leaky_relu(rho);
    const auto inst = make_instance(6, 8, 200, 0.8, f, 16);
    const auto b = state_norm_bound(inst.trajectory, inst.system, f);
    CHECK(b.bound - b.max_state_norm >= -1e-10);
  }
}

TEST_CASE("trajectory csv") {
  const auto f = ConvexPotential::leaky_relu(0.5);
  const auto inst = make_instance(2, 3, 4, 0.5, f, 17);
  std::ostringstream os;
  write_trajectory_csv(inst.trajectory, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,u_0,u_1,u_2,x_0,x_1");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}

}  // TEST_SUITE
