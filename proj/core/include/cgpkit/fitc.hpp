#pragma once

#include "cgpkit/gp.hpp"

namespace cgpkit {

/// Fixed inducing input locations; distinct to within 1e-9.
class InducingSet {
 public:
  /// Throws DegenerateInducing on duplicates, InvalidInput when empty.
  explicit InducingSet(Inputs locations);

  const Inputs& locations() const noexcept { return locations_; }
  Index size() const noexcept { return locations_.rows(); }

 private:
  Inputs locations_;
};

/// FITC predictive belief over test_X: the training conditional given the
/// inducing values is taken as fully independent, with diag(K_ff - Q_ff)
/// added to the noise diagonal.
GaussianBelief fitc_posterior(const GpModel& model, const DataSegment& train,
                              const InducingSet& inducing, const Inputs& test_X);

/// Axis-aligned box; one entry per input dimension.
struct InputRange {
  Vector lower;
  Vector upper;
};

/// Evenly spaced locations including both endpoints. In 2-D this is an
/// nx-by-ny grid with nx = ceil(sqrt(count)) and ny = ceil(count / nx), so it
/// may hold slightly more than `count` points. A count of 1 gives the centre.
InducingSet place_uniform(const InputRange& range, std::size_t count);

}  // namespace cgpkit
