#pragma once

#include "rnnid/core.hpp"

#include <cstdint>
#include <random>

namespace rnnid {

/// SplitMix64 finalizer. Used to turn (seed, stream) pairs into independent
/// generator seeds so that trial i of an experiment does not depend on how
/// many trials ran before it.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based child seed: deterministic in (seed, stream), well mixed for
/// consecutive streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator owned by the caller. Not thread-safe; give each worker
/// its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  Matrix normal_matrix(Index rows, Index cols);
  Vector normal_vector(Index size);
  /// Uniform draw from the unit sphere S^{size-1}.
  Vector unit_vector(Index size);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rnnid
