#pragma once

#include "cgpkit/kernels.hpp"
#include "cgpkit/optimize.hpp"
#include "cgpkit/psd.hpp"

namespace cgpkit {

/// Gaussian over the M test latents z.
struct GaussianBelief {
  Vector mean;
  PsdMatrix cov;

  Index dim() const { return mean.size(); }
  Vector variance() const { return cov.matrix().diagonal(); }
};

/// One block {X_k, y_k} of inputs and observations.
struct DataSegment {
  Inputs X;
  Vector y;

  Index size() const { return y.size(); }
  bool empty() const { return y.size() == 0; }
  /// Throws InvalidInput / DimensionMismatch unless nonempty, consistent and finite.
  void validate() const;
};

/// Prior N(mu(test_X), K(test_X, test_X)) over the test latents.
GaussianBelief prior_belief(const GpModel& model, const Inputs& test_X);

/// Exact posterior of z given one data segment by joint Gaussian conditioning.
/// An empty segment returns the prior unchanged.
GaussianBelief gp_posterior(const GaussianBelief& prior, const GpModel& model,
                            const DataSegment& segment, const Inputs& test_X);

struct LogLikelihood {
  double value = 0.0;
  /// Gradient with respect to parameters(model).
  Vector gradient;
};

LogLikelihood log_marginal_likelihood(const GpModel& model, const DataSegment& segment);

struct MlEstimate {
  GpModel model;
  Vector theta;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  BfgsStatus status = BfgsStatus::MaxIterations;

  bool converged() const { return status == BfgsStatus::Converged; }
};

/// Local maximizer of the log marginal likelihood started from `init`.
/// Returns the best iterate flagged MaxIterations / Stalled when it cannot
/// meet the gradient tolerance.
MlEstimate ml_estimate(const GpModel& init, const DataSegment& segment,
                       const BfgsOptions& options = {});

struct FisherInfo {
  PsdMatrix matrix;
  Vector theta_hat;
};

/// Slepian-Bangs Fisher information at the model's parameters:
/// J_ij = dmu_i^T S^{-1} dmu_j + 1/2 tr(S^{-1} dS_i S^{-1} dS_j),
/// in the packed coordinates of parameters(model).
FisherInfo fisher_information(const GpModel& model, const DataSegment& segment);

}  // namespace cgpkit
