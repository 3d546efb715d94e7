#include "cgpkit/cgp.hpp"

#include <chrono>
#include <string>

#include "cgpkit/errors.hpp"

namespace cgpkit {

CgpState::CgpState(GaussianBelief prior, Inputs test_X)
    : test_X_(std::make_shared<const Inputs>(std::move(test_X))) {
  if (prior.dim() != test_X_->rows() || prior.cov.dim() != prior.dim()) {
    throw DimensionMismatch("CgpState: prior dimension does not match test inputs");
  }
  prior_factor_ = std::make_shared<const Cholesky>(cholesky_jittered(prior.cov));
  if (prior_factor_->jitter() > 0.0) {
    Matrix shifted = prior.cov.matrix();
    shifted.diagonal().array() += prior_factor_->jitter();
    prior.cov = PsdMatrix(std::move(shifted));
  }
  prior_ = std::move(prior);
  current_ = prior_;
}

CgpState CgpState::resume(GaussianBelief prior, Inputs test_X, GaussianBelief current,
                          std::size_t segments_seen) {
  CgpState state(std::move(prior), std::move(test_X));
  if (current.dim() != state.prior_.dim() || current.cov.dim() != state.prior_.dim()) {
    throw DimensionMismatch("CgpState::resume: checkpoint dimension does not match prior");
  }
  state.current_ = std::move(current);
  state.k_ = segments_seen;
  return state;
}

CgpState cgp_start(const GpModel& model, const Inputs& test_X) {
  return CgpState(prior_belief(model, test_X), test_X);
}

CgpState cgp_update(const CgpState& state, const GpModel& model, const DataSegment& segment) {
  segment.validate();
  check_input_dim(model.kernel, segment.X, "cgp_update");
  const Inputs& test_X = state.test_inputs();
  if (segment.X.cols() != test_X.cols()) {
    throw DimensionMismatch("cgp_update: segment inputs and test inputs differ in dimension");
  }

  const Matrix S_yz = cross_covariance(model.kernel, segment.X, test_X);     // N x M
  const Matrix H = state.prior_factor_->solve(S_yz.transpose()).transpose();  // N x M

  Matrix S_y_given_z = cross_covariance(model.kernel, segment.X, segment.X) - H * S_yz.transpose();
  S_y_given_z.diagonal().array() += model.kernel.params.noise_var();

  const Matrix& P = state.current_.cov.matrix();
  const Matrix PHt = P * H.transpose();  // M x N
  const Cholesky G = cholesky_jittered(PsdMatrix(S_y_given_z + H * PHt));

  const Vector innovation = segment.y - model.mean.evaluate(segment.X) -
                            H * (state.current_.mean - state.prior_.mean);

  CgpState next = state;
  next.current_.mean = state.current_.mean + PHt * G.solve(innovation);
  next.current_.cov = PsdMatrix(P - PHt * G.solve(PHt.transpose()));
  next.k_ = state.k_ + 1;
  return next;
}

namespace {

template <class E>
[[noreturn]] void rethrow_at(const E& e, std::size_t index) {
  throw E("segment " + std::to_string(index) + ": " + e.what());
}

}  // namespace

CgpRun cgp_run(CgpState state, std::span<const DataSegment> segments, const GpModel& model) {
  if (segments.empty()) throw InvalidInput("cgp_run: no segments");
  CgpRun run{std::move(state), {}};
  run.step_seconds.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      run.state = cgp_update(run.state, model, segments[i]);
    } catch (const FactorizationFailure& e) {
      rethrow_at(e, i);
    } catch (const DimensionMismatch& e) {
      rethrow_at(e, i);
    } catch (const InvalidInput& e) {
      rethrow_at(e, i);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    run.step_seconds.push_back(elapsed.count());
  }
  return run;
}

CgpRun cgp_run(std::span<const DataSegment> segments, const GpModel& model,
               const Inputs& test_X) {
  return cgp_run(cgp_start(model, test_X), segments, model);
}

FusionState FusionState::empty(Index dim) {
  return {PsdMatrix::zero(dim), Vector::Zero(dim), 0};
}

FusionState fusion_update(const FusionState& fs, const Eigen::Ref<const Vector>& theta_hat,
                          const FisherInfo& fim) {
  const Index dim = fs.s.size();
  if (theta_hat.size() != dim || fim.matrix.dim() != dim || fs.lambda.dim() != dim) {
    throw DimensionMismatch("fusion_update: accumulator has dimension " + std::to_string(dim) +
                            ", estimate " + std::to_string(theta_hat.size()) + ", FIM " +
                            std::to_string(fim.matrix.dim()));
  }
  return {PsdMatrix(fs.lambda.matrix() + fim.matrix.matrix()),
          fs.s + fim.matrix.matrix() * theta_hat, fs.k + 1};
}

FusionState fusion_merge(const FusionState& a, const FusionState& b) {
  if (a.s.size() != b.s.size()) throw DimensionMismatch("fusion_merge: dimension mismatch");
  return {PsdMatrix(a.lambda.matrix() + b.lambda.matrix()), a.s + b.s, a.k + b.k};
}

Vector fused_theta(const FusionState& fs) {
  if (fs.k == 0) throw FactorizationFailure("fused_theta: no segments accumulated");
  return solve_psd(fs.lambda, fs.s);
}

Matrix fused_covariance(const FusionState& fs) {
  if (fs.k == 0) throw FactorizationFailure("fused_covariance: no segments accumulated");
  return solve_psd(fs.lambda, Matrix::Identity(fs.s.size(), fs.s.size()));
}

}  // namespace cgpkit
