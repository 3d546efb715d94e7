#pragma once

#include <cstdint>
#include <random>

#include "cgpkit/psd.hpp"

namespace cgpkit {

/// Reproducible normal stream. Streams are keyed by (seed, stream) through
/// std::seed_seq, so Monte-Carlo shards can derive independent substreams
/// from one user seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Vector normal_vector(Index n);
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

/// Draws from N(mean, cov) through a jittered Cholesky factor.
class GaussianSampler {
 public:
  GaussianSampler(Vector mean, const PsdMatrix& cov);

  Vector draw(RandomStream& rng) const;
  Index dim() const noexcept { return mean_.size(); }
  double jitter() const noexcept { return jitter_; }

 private:
  Vector mean_;
  Matrix lower_;
  double jitter_;
};

}  // namespace cgpkit
