#include <doctest/doctest.h>

#include <cmath>
#include <limits>

#include "cgpkit/errors.hpp"
#include "cgpkit/optimize.hpp"

using namespace cgpkit;

TEST_CASE("BFGS minimizes a quadratic") {
  Matrix A(2, 2);
  A << 3.0, 1.0, 1.0, 2.0;
  Vector b(2);
  b << 1.0, -1.0;
  const Objective f = [&](const Vector& x, Vector& g) {
    g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  const BfgsResult r = minimize_bfgs(f, Vector::Zero(2));
  CHECK(r.status == BfgsStatus::Converged);
  CHECK((r.x - A.inverse() * b).norm() < 1e-6);
}

TEST_CASE("BFGS handles Rosenbrock") {
  const Objective f = [](const Vector& x, Vector& g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g.resize(2);
    g << -2.0 * a - 400.0 * x[0] * b, 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  BfgsOptions opt;
  opt.max_iterations = 500;
  const BfgsResult r = minimize_bfgs(f, x0, opt);
  CHECK(r.status == BfgsStatus::Converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
}

TEST_CASE("BFGS steps around regions where the objective is undefined") {
  // log barrier: infinite for x <= 0, minimum at x = 1
  const Objective f = [](const Vector& x, Vector& g) {
    g.resize(1);
    if (x[0] <= 0.0) return std::numeric_limits<double>::infinity();
    g[0] = 1.0 - 1.0 / x[0];
    return x[0] - std::log(x[0]);
  };
  Vector x0(1);
  x0 << 5.0;
  const BfgsResult r = minimize_bfgs(f, x0);
  CHECK(r.status == BfgsStatus::Converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("BFGS rejects a non-finite start and respects the iteration cap") {
  const Objective bad = [](const Vector&, Vector& g) {
    g = Vector::Zero(1);
    return std::nan("");
  };
  CHECK_THROWS_AS(minimize_bfgs(bad, Vector::Zero(1)), OptimizerDiverged);

  const Objective slow = [](const Vector& x, Vector& g) {
    g = 2.0 * x;
    g[0] *= 1e4;
    return x.squaredNorm() + (1e4 - 1.0) * x[0] * x[0];
  };
  BfgsOptions opt;
  opt.max_iterations = 1;
  const BfgsResult r = minimize_bfgs(slow, Vector::Ones(3), opt);
  CHECK(r.iterations == 1);
  CHECK(r.status == BfgsStatus::MaxIterations);
}
