#include "cgpkit/fitc.hpp"

#include <cmath>
#include <string>

#include "cgpkit/errors.hpp"

namespace cgpkit {

InducingSet::InducingSet(Inputs locations) : locations_(std::move(locations)) {
  if (locations_.rows() == 0) throw InvalidInput("inducing set is empty");
  if (!locations_.allFinite()) throw InvalidInput("inducing set has non-finite locations");
  for (Index i = 0; i < locations_.rows(); ++i) {
    for (Index j = i + 1; j < locations_.rows(); ++j) {
      if ((locations_.row(i) - locations_.row(j)).norm() <= 1e-9) {
        throw DegenerateInducing("inducing locations " + std::to_string(i) + " and " +
                                 std::to_string(j) + " coincide");
      }
    }
  }
}

GaussianBelief fitc_posterior(const GpModel& model, const DataSegment& train,
                              const InducingSet& inducing, const Inputs& test_X) {
  train.validate();
  check_input_dim(model.kernel, train.X, "fitc_posterior");
  check_input_dim(model.kernel, test_X, "fitc_posterior");
  check_input_dim(model.kernel, inducing.locations(), "fitc_posterior");
  const Inputs& U = inducing.locations();

  const Cholesky Luu = cholesky_jittered(PsdMatrix(cross_covariance(model.kernel, U, U)));
  const Matrix V = Luu.solve_lower(cross_covariance(model.kernel, U, train.X));      // Mu x N
  const Matrix W = Luu.solve_lower(cross_covariance(model.kernel, U, test_X));       // Mu x M

  // Lambda = diag(K_ff - Q_ff) + noise
  Vector lambda(train.size());
  for (Index i = 0; i < train.size(); ++i) {
    const double kii = kernel_eval(model.kernel, train.X.row(i), train.X.row(i));
    lambda[i] = std::max(kii - V.col(i).squaredNorm(), 0.0) + model.kernel.params.noise_var();
  }
  const Vector inv_lambda = lambda.cwiseInverse();

  // A = I + V Lambda^{-1} V^T in the whitened inducing coordinates.
  Matrix A = V * inv_lambda.asDiagonal() * V.transpose();
  A.diagonal().array() += 1.0;
  const Cholesky La = cholesky_jittered(PsdMatrix(A));

  const Vector residual = train.y - model.mean.evaluate(train.X);
  const Vector b = V * inv_lambda.cwiseProduct(residual);
  const Matrix Wa = La.solve_lower(W);

  GaussianBelief post;
  post.mean = model.mean.evaluate(test_X) + W.transpose() * La.solve(b);
  post.cov = PsdMatrix(cross_covariance(model.kernel, test_X, test_X) -
                       W.transpose() * W + Wa.transpose() * Wa);
  return post;
}

InducingSet place_uniform(const InputRange& range, std::size_t count) {
  const Index dim = range.lower.size();
  if (count == 0) throw InvalidRange("place_uniform: count must be at least 1");
  if (dim == 0 || range.upper.size() != dim || dim > 2) {
    throw InvalidRange("place_uniform: range must be 1-D or 2-D with matching bounds");
  }
  if (!range.lower.allFinite() || !range.upper.allFinite() ||
      (range.upper.array() < range.lower.array()).any()) {
    throw InvalidRange("place_uniform: bounds must be finite with lower <= upper");
  }

  auto axis = [](double lo, double hi, std::size_t n) {
    Vector v(static_cast<Index>(n));
    if (n == 1) {
      v[0] = 0.5 * (lo + hi);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        v[static_cast<Index>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      }
      v[static_cast<Index>(n - 1)] = hi;
    }
    return v;
  };

  if (dim == 1) {
    if (count > 1 && !(range.upper[0] > range.lower[0])) {
      throw InvalidRange("place_uniform: empty interval cannot hold several points");
    }
    return InducingSet(axis(range.lower[0], range.upper[0], count));
  }

  const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t ny = (count + nx - 1) / nx;
  if ((nx > 1 && !(range.upper[0] > range.lower[0])) ||
      (ny > 1 && !(range.upper[1] > range.lower[1]))) {
    throw InvalidRange("place_uniform: degenerate box for a multi-point grid");
  }
  const Vector gx = axis(range.lower[0], range.upper[0], nx);
  const Vector gy = axis(range.lower[1], range.upper[1], ny);
  Inputs U(static_cast<Index>(nx * ny), 2);
  Index r = 0;
  for (Index i = 0; i < gx.size(); ++i) {
    for (Index j = 0; j < gy.size(); ++j, ++r) U.row(r) << gx[i], gy[j];
  }
  return InducingSet(std::move(U));
}

}  // namespace cgpkit
