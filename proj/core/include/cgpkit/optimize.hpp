#pragma once

#include <functional>

#include "cgpkit/psd.hpp"

namespace cgpkit {

/// Objective returning f(x) and writing its gradient. A non-finite return
/// marks x as infeasible; the line search backs away from it.
using Objective = std::function<double(const Vector& x, Vector& gradient)>;

struct BfgsOptions {
  int max_iterations = 200;
  /// Converged when ||g|| <= gradient_tolerance * (1 + |f|).
  double gradient_tolerance = 1e-6;
  /// Largest infinity-norm step tried by the line search.
  double max_step = 2.0;
};

enum class BfgsStatus { Converged, MaxIterations, Stalled };

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  BfgsStatus status = BfgsStatus::MaxIterations;
};

/// Quasi-Newton minimization with an Armijo backtracking line search.
/// Stops early (Stalled) after three accepted steps whose decrease is at
/// roundoff level, or when no step along the search or steepest-descent
/// direction decreases f.
/// Throws OptimizerDiverged if the objective is non-finite at x0.
BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options = {});

}  // namespace cgpkit
