#pragma once

// Independent reference implementations used as test oracles. Everything here
// goes through dense inverses or eigen-decompositions on purpose, never through
// the library's factorization helpers.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "cgpkit/gp.hpp"
#include "cgpkit/kernels.hpp"

namespace oracle {

using cgpkit::Index;
using cgpkit::Inputs;
using cgpkit::Matrix;
using cgpkit::Vector;

inline double kernel(const cgpkit::KernelSpec& spec, const Eigen::RowVectorXd& a,
                     const Eigen::RowVectorXd& b) {
  const auto p = [&](Index i) { return std::exp(spec.params.values[i]); };
  switch (spec.family) {
    case cgpkit::KernelFamily::SquaredExponential: {
      const double d = a[0] - b[0];
      return p(0) * p(0) * std::exp(-std::pow(d / p(1), 2));
    }
    case cgpkit::KernelFamily::PeriodicPlusSE: {
      const double d = a[0] - b[0];
      const double s = std::sin(std::numbers::pi * d / p(4));
      return p(0) * p(0) * std::exp(-2.0 * s * s / (p(1) * p(1))) +
             p(2) * p(2) * std::exp(-std::pow(d / p(3), 2));
    }
    case cgpkit::KernelFamily::SE2DArd:
      return p(0) * p(0) *
             std::exp(-std::pow((a[0] - b[0]) / p(1), 2) - std::pow((a[1] - b[1]) / p(2), 2));
  }
  return 0.0;
}

inline Matrix gram(const cgpkit::KernelSpec& spec, const Inputs& X, const Inputs& Y) {
  Matrix K(X.rows(), Y.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < Y.rows(); ++j) K(i, j) = kernel(spec, X.row(i), Y.row(j));
  }
  return K;
}

inline Vector mean(const cgpkit::MeanSpec& m, const Inputs& X) {
  if (m.family == cgpkit::MeanFamily::Zero) return Vector::Zero(X.rows());
  return (m.slope * X.col(0).array() + m.intercept).matrix();
}

struct Dense {
  Vector mean;
  Matrix cov;
};

/// Joint-Gaussian conditioning with an explicit inverse.
inline Dense gp_posterior(const cgpkit::GpModel& model, const Inputs& X, const Vector& y,
                          const Inputs& Z) {
  Matrix S = gram(model.kernel, X, X);
  S.diagonal().array() += model.kernel.params.noise_var();
  const Matrix Sinv = S.inverse();
  const Matrix C = gram(model.kernel, Z, X);
  return {mean(model.mean, Z) + C * Sinv * (y - mean(model.mean, X)),
          gram(model.kernel, Z, Z) - C * Sinv * C.transpose()};
}

/// Log-determinant from eigenvalues.
inline double logdet(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  return es.eigenvalues().array().log().sum();
}

inline double log_likelihood(const cgpkit::GpModel& model, const Inputs& X, const Vector& y) {
  Matrix S = gram(model.kernel, X, X);
  S.diagonal().array() += model.kernel.params.noise_var();
  const Vector r = y - mean(model.mean, X);
  return -0.5 * r.dot(S.inverse() * r) - 0.5 * logdet(S) -
         0.5 * static_cast<double>(X.rows()) * std::log(2.0 * std::numbers::pi);
}

/// Deterministic random instances for property-style tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<>()(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(rng_); }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Inputs inputs(Index n, Index dim, double lo, double hi) {
    Inputs X(n, dim);
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < dim; ++c) X(i, c) = uniform(lo, hi);
    }
    return X;
  }

  Matrix spd(Index n) {
    const Matrix A = Matrix::NullaryExpr(n, n, [&] { return normal(); });
    return A * A.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
  }

  /// Random model of the given family with well-conditioned hyperparameters.
  cgpkit::GpModel model(cgpkit::KernelFamily family, bool linear_mean = false) {
    cgpkit::GpModel m;
    const double noise = uniform(0.05, 0.5);
    switch (family) {
      case cgpkit::KernelFamily::SquaredExponential:
        m.kernel = cgpkit::make_squared_exponential(uniform(0.5, 2.0), uniform(0.5, 3.0), noise);
        break;
      case cgpkit::KernelFamily::PeriodicPlusSE:
        m.kernel = cgpkit::make_periodic_plus_se(uniform(0.5, 1.5), uniform(0.5, 2.0),
                                                 uniform(0.5, 1.5), uniform(2.0, 10.0),
                                                 uniform(3.0, 8.0), noise);
        break;
      case cgpkit::KernelFamily::SE2DArd:
        m.kernel = cgpkit::make_se2d_ard(uniform(0.5, 2.0), uniform(0.5, 3.0),
                                         uniform(0.5, 3.0), noise);
        break;
    }
    if (linear_mean && family != cgpkit::KernelFamily::SE2DArd) {
      m.mean = {cgpkit::MeanFamily::Linear, uniform(-0.5, 0.5), uniform(-1.0, 1.0)};
    }
    return m;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline constexpr cgpkit::KernelFamily kFamilies[] = {cgpkit::KernelFamily::SquaredExponential,
                                                     cgpkit::KernelFamily::PeriodicPlusSE,
                                                     cgpkit::KernelFamily::SE2DArd};

/// Largest |a - b| scaled by max(1, |b|) elementwise.
template <class A, class B>
double rel_err(const A& a, const B& b) {
  return ((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff();
}

/// Central-difference derivative of f at x along each coordinate.
template <class F>
Vector finite_diff(F&& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
