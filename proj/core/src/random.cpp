#include "cgpkit/random.hpp"

namespace cgpkit {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

Vector RandomStream::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

GaussianSampler::GaussianSampler(Vector mean, const PsdMatrix& cov) : mean_(std::move(mean)) {
  const Cholesky f = cholesky_jittered(cov);
  lower_ = f.lower();
  jitter_ = f.jitter();
}

Vector GaussianSampler::draw(RandomStream& rng) const {
  return mean_ + lower_.triangularView<Eigen::Lower>() * rng.normal_vector(mean_.size());
}

}  // namespace cgpkit
