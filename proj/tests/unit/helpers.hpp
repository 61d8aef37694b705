#pragma once

#include "rnnid/dynamics.hpp"
#include "rnnid/models.hpp"
#include "rnnid/potentials.hpp"
#include "rnnid/random.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <string>

namespace testing {

using namespace rnnid;

struct Instance {
  SystemParams system;
  Trajectory trajectory;
};

inline Instance make_instance(Index n, Index p, Index T, double spectral_alpha, const ConvexPotential& f,
                              std::uint64_t seed, const InputModel& model = InputModel::gaussian()) {
  SystemParams s = sample_system(n, p, spectral_alpha, f, derive_seed(seed, 0));
  Matrix u = sample_inputs(model, p, T, derive_seed(seed, 1));
  Trajectory traj = simulate(s, f, u, T);
  return {std::move(s), std::move(traj)};
}

inline SystemParams custom_system(Matrix A, Matrix B, double beta = 1.0) {
  SystemParams s;
  s.A = std::move(A);
  s.B = std::move(B);
  s.beta = beta;
  return s;
}

inline double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(RNNID_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rnnid::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace testing
