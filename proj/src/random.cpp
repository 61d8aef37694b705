#include "rnnid/random.hpp"

namespace rnnid {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

Vector Rng::normal_vector(Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = normal();
  return v;
}

Vector Rng::unit_vector(Index size) {
  Vector v;
  double norm = 0.0;
  do {
    v = normal_vector(size);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace rnnid
