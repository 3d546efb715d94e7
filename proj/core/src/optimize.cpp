#include "cgpkit/optimize.hpp"

#include <cmath>

#include "cgpkit/errors.hpp"

namespace cgpkit {

namespace {

bool converged(const Vector& g, double f, double tol) {
  return g.norm() <= tol * (1.0 + std::abs(f));
}

}  // namespace

BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options) {
  const Index n = x0.size();
  BfgsResult r;
  r.x = std::move(x0);
  r.gradient = Vector::Zero(n);
  r.value = f(r.x, r.gradient);
  if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
    throw OptimizerDiverged("objective is not finite at the initial point");
  }

  Matrix inv_hessian = Matrix::Identity(n, n);
  bool scaled = false;
  int idle = 0;  // consecutive steps whose decrease is at roundoff level
  Vector trial_grad(n);

  while (r.iterations < options.max_iterations) {
    if (converged(r.gradient, r.value, options.gradient_tolerance)) {
      r.status = BfgsStatus::Converged;
      return r;
    }
    ++r.iterations;

    bool stepped = false;
    for (int attempt = 0; attempt < 2 && !stepped; ++attempt) {
      Vector direction = -inv_hessian * r.gradient;
      double slope = direction.dot(r.gradient);
      if (!(slope < 0.0)) {
        inv_hessian.setIdentity();
        scaled = false;
        direction = -r.gradient;
        slope = -r.gradient.squaredNorm();
      }
      double step = 1.0;
      const double longest = direction.cwiseAbs().maxCoeff();
      if (longest > options.max_step) step = options.max_step / longest;

      for (int k = 0; k < 40; ++k, step *= 0.5) {
        const Vector trial = r.x + step * direction;
        const double value = f(trial, trial_grad);
        if (!std::isfinite(value) || !trial_grad.allFinite()) continue;
        if (value > r.value + 1e-4 * step * slope) continue;

        const Vector s = trial - r.x;
        const Vector y = trial_grad - r.gradient;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
          if (!scaled) {
            inv_hessian *= sy / y.squaredNorm();
            scaled = true;
          }
          const double rho = 1.0 / sy;
          const Matrix I = Matrix::Identity(n, n);
          inv_hessian = (I - rho * s * y.transpose()) * inv_hessian *
                            (I - rho * y * s.transpose()) +
                        rho * s * s.transpose();
        }
        idle = r.value - value <= 1e-12 * (1.0 + std::abs(value)) ? idle + 1 : 0;
        r.x = trial;
        r.value = value;
        r.gradient = trial_grad;
        stepped = true;
        break;
      }
      if (!stepped) {
        // Retry once along steepest descent before giving up.
        inv_hessian.setIdentity();
        scaled = false;
      }
    }
    if (!stepped || idle >= 3) {
      r.status = converged(r.gradient, r.value, options.gradient_tolerance) ? BfgsStatus::Converged
                                                                            : BfgsStatus::Stalled;
      return r;
    }
  }
  r.status = converged(r.gradient, r.value, options.gradient_tolerance)
                 ? BfgsStatus::Converged
                 : BfgsStatus::MaxIterations;
  return r;
}

}  // namespace cgpkit
