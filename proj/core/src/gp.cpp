#include "cgpkit/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cgpkit/errors.hpp"

namespace cgpkit {

void DataSegment::validate() const {
  if (y.size() == 0) throw InvalidInput("data segment is empty");
  if (X.rows() != y.size()) {
    throw DimensionMismatch("data segment has " + std::to_string(X.rows()) + " inputs and " +
                            std::to_string(y.size()) + " observations");
  }
  if (!X.allFinite() || !y.allFinite()) throw InvalidInput("data segment has non-finite values");
}

GaussianBelief prior_belief(const GpModel& model, const Inputs& test_X) {
  check_input_dim(model.kernel, test_X, "prior_belief");
  return {model.mean.evaluate(test_X),
          PsdMatrix(cross_covariance(model.kernel, test_X, test_X))};
}

GaussianBelief gp_posterior(const GaussianBelief& prior, const GpModel& model,
                            const DataSegment& segment, const Inputs& test_X) {
  if (prior.dim() != test_X.rows() || prior.cov.dim() != test_X.rows()) {
    throw DimensionMismatch("gp_posterior: prior dimension does not match test inputs");
  }
  if (segment.empty()) return prior;
  segment.validate();
  check_input_dim(model.kernel, segment.X, "gp_posterior");
  check_input_dim(model.kernel, test_X, "gp_posterior");

  const Cholesky factor = cholesky_jittered(training_covariance(model.kernel, segment.X));
  const Matrix cross = cross_covariance(model.kernel, segment.X, test_X);  // N x M
  const Vector residual = segment.y - model.mean.evaluate(segment.X);

  const Matrix whitened = factor.solve_lower(cross);
  GaussianBelief post;
  post.mean = prior.mean + cross.transpose() * factor.solve(residual);
  post.cov = PsdMatrix(prior.cov.matrix() - whitened.transpose() * whitened);
  return post;
}

namespace {

struct Workspace {
  Cholesky factor;
  Vector residual;
  Vector alpha;  // S^{-1} r
};

Workspace factorize(const GpModel& model, const DataSegment& segment) {
  segment.validate();
  check_input_dim(model.kernel, segment.X, "log_marginal_likelihood");
  Cholesky factor = cholesky_jittered(training_covariance(model.kernel, segment.X));
  Vector residual = segment.y - model.mean.evaluate(segment.X);
  Vector alpha = factor.solve(residual);
  return {std::move(factor), std::move(residual), std::move(alpha)};
}

}  // namespace

LogLikelihood log_marginal_likelihood(const GpModel& model, const DataSegment& segment) {
  const Workspace ws = factorize(model, segment);
  const double n = static_cast<double>(segment.size());

  LogLikelihood out;
  out.value = -0.5 * ws.residual.dot(ws.alpha) - 0.5 * ws.factor.logdet() -
              0.5 * n * std::log(2.0 * std::numbers::pi);

  // d/dθ = 1/2 tr((α α^T - S^{-1}) dS) + dμ^T α
  const Index n_idx = segment.size();
  const Matrix inner = ws.alpha * ws.alpha.transpose() -
                       ws.factor.solve(Matrix::Identity(n_idx, n_idx));
  const std::vector<Matrix> dS = kernel_grad(model.kernel, segment.X);
  const std::vector<Vector> dmu = mean_grad(model.mean, segment.X);

  out.gradient.resize(parameter_count(model));
  Index p = 0;
  for (const Matrix& d : dS) out.gradient[p++] = 0.5 * inner.cwiseProduct(d).sum();
  for (const Vector& d : dmu) out.gradient[p++] = d.dot(ws.alpha);
  return out;
}

MlEstimate ml_estimate(const GpModel& init, const DataSegment& segment,
                       const BfgsOptions& options) {
  segment.validate();
  const Objective objective = [&](const Vector& theta, Vector& grad) {
    try {
      const LogLikelihood ll = log_marginal_likelihood(with_parameters(init, theta), segment);
      grad = -ll.gradient;
      return -ll.value;
    } catch (const FactorizationFailure&) {
      return std::numeric_limits<double>::infinity();
    } catch (const InvalidInput&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const BfgsResult r = minimize_bfgs(objective, parameters(init), options);

  MlEstimate est;
  est.model = with_parameters(init, r.x);
  est.theta = r.x;
  est.log_likelihood = -r.value;
  est.gradient_norm = r.gradient.norm();
  est.iterations = r.iterations;
  est.status = r.status;
  return est;
}

FisherInfo fisher_information(const GpModel& model, const DataSegment& segment) {
  segment.validate();
  check_input_dim(model.kernel, segment.X, "fisher_information");
  const Cholesky factor = cholesky_jittered(training_covariance(model.kernel, segment.X));
  const std::vector<Matrix> dS = kernel_grad(model.kernel, segment.X);
  const std::vector<Vector> dmu = mean_grad(model.mean, segment.X);

  const Index n_cov = static_cast<Index>(dS.size());
  const Index n_par = n_cov + static_cast<Index>(dmu.size());

  std::vector<Matrix> solved;  // S^{-1} dS_i
  solved.reserve(dS.size());
  for (const Matrix& d : dS) solved.push_back(factor.solve(d));

  Matrix J = Matrix::Zero(n_par, n_par);
  for (Index i = 0; i < n_cov; ++i) {
    for (Index j = i; j < n_cov; ++j) {
      // tr(A B) = sum(A .* B^T)
      const double t = solved[static_cast<std::size_t>(i)]
                           .cwiseProduct(solved[static_cast<std::size_t>(j)].transpose())
                           .sum();
      J(i, j) = J(j, i) = 0.5 * t;
    }
  }
  for (Index i = 0; i < static_cast<Index>(dmu.size()); ++i) {
    const Vector si = factor.solve(dmu[static_cast<std::size_t>(i)]);
    for (Index j = i; j < static_cast<Index>(dmu.size()); ++j) {
      J(n_cov + i, n_cov + j) = J(n_cov + j, n_cov + i) =
          si.dot(dmu[static_cast<std::size_t>(j)]);
    }
  }
  return {PsdMatrix(J), parameters(model)};
}

}  // namespace cgpkit
