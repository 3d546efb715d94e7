#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cgpkit/gp.hpp"

namespace cgpkit {

/// Running composite-GP belief over fixed test latents.
///
/// The prior is factorized once. If that factorization needs jitter, the
/// jittered covariance becomes the prior for the lifetime of the state, so
/// the conditional p(y_k | z) is always built from the same Sigma_zz that the
/// running belief started from.
class CgpState {
 public:
  CgpState(GaussianBelief prior, Inputs test_X);

  /// Rebuilds a state from a checkpoint of the running belief.
  static CgpState resume(GaussianBelief prior, Inputs test_X, GaussianBelief current,
                         std::size_t segments_seen);

  const GaussianBelief& prior() const noexcept { return prior_; }
  const GaussianBelief& current() const noexcept { return current_; }
  std::size_t segments_seen() const noexcept { return k_; }
  const Inputs& test_inputs() const noexcept { return *test_X_; }
  /// Jitter added to the prior covariance during construction (0 if none).
  double prior_jitter() const noexcept { return prior_factor_->jitter(); }

 private:
  friend CgpState cgp_update(const CgpState& state, const GpModel& model,
                             const DataSegment& segment);

  GaussianBelief prior_;
  GaussianBelief current_;
  std::size_t k_ = 0;
  std::shared_ptr<const Inputs> test_X_;
  std::shared_ptr<const Cholesky> prior_factor_;
};

/// State at k = 0 with the model prior over test_X.
CgpState cgp_start(const GpModel& model, const Inputs& test_X);

/// Folds one segment into the belief:
///   H = S_yz S_zz^{-1},  G = S_{y|z} + H P H^T,
///   m <- m + P H^T G^{-1} (y - mu_y - H (m - mu_z)),
///   P <- P - P H^T G^{-1} H P,
/// where S_{y|z} = S_yy + noise I - H S_zy uses the original prior S_zz.
CgpState cgp_update(const CgpState& state, const GpModel& model, const DataSegment& segment);

struct CgpRun {
  CgpState state;
  std::vector<double> step_seconds;
};

/// cgp_update folded over the segments in order, timing each step.
/// Errors are rethrown with the failing segment index in the message.
CgpRun cgp_run(std::span<const DataSegment> segments, const GpModel& model,
               const Inputs& test_X);

/// Continues a run from an existing state.
CgpRun cgp_run(CgpState state, std::span<const DataSegment> segments, const GpModel& model);

/// Fisher-information-weighted fusion accumulators:
/// lambda = sum J_k, s = sum J_k theta_k.
struct FusionState {
  PsdMatrix lambda;
  Vector s;
  std::size_t k = 0;

  static FusionState empty(Index dim);
};

FusionState fusion_update(const FusionState& fs, const Eigen::Ref<const Vector>& theta_hat,
                          const FisherInfo& fim);

/// Combines two partial accumulations; associative and commutative.
FusionState fusion_merge(const FusionState& a, const FusionState& b);

/// lambda^{-1} s. Throws FactorizationFailure if lambda is not invertible.
Vector fused_theta(const FusionState& fs);

/// lambda^{-1}, the approximate covariance of fused_theta.
Matrix fused_covariance(const FusionState& fs);

}  // namespace cgpkit
