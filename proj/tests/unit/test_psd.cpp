#include <doctest/doctest.h>

#include <cmath>

#include "cgpkit/errors.hpp"
#include "cgpkit/kernels.hpp"
#include "cgpkit/psd.hpp"
#include "support.hpp"

using namespace cgpkit;

TEST_CASE("PsdMatrix symmetrizes and rejects non-square input") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  const PsdMatrix p(m);
  CHECK(p.matrix()(0, 1) == doctest::Approx(1.0));
  CHECK(p.matrix()(1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(PsdMatrix(Matrix(2, 3)), DimensionMismatch);
  CHECK(PsdMatrix::identity(3).trace() == 3.0);
}

TEST_CASE("cholesky of the identity needs no jitter") {
  const Cholesky c = cholesky_jittered(PsdMatrix::identity(3));
  CHECK(c.jitter() == 0.0);
  CHECK((c.lower() - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("zero matrix exhausts the ladder") {
  // trace/dim is 0, so every rung adds 0 and the eigenvalues stay at 0.
  for (const double level : kJitterLadder) {
    const Matrix shifted = Matrix::Identity(2, 2) * level * 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
    CHECK(es.eigenvalues().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(cholesky_jittered(PsdMatrix::zero(2)), FactorizationFailure);
}

TEST_CASE("SE Gram of 5 distinct points factors with at most 1e-8 relative jitter") {
  const KernelSpec k = make_squared_exponential(1.0, 2.0, 0.1);
  Inputs X(5, 1);
  X << 0.0, 0.7, 1.9, 3.2, 4.0;
  const PsdMatrix K(cross_covariance(k, X, X));
  const Cholesky c = cholesky_jittered(K);
  const double scale = K.trace() / 5.0;
  CHECK(c.jitter() <= 1e-8 * scale);
  // The jitter level chosen is the first rung whose shifted spectrum clears the floor.
  const Vector ev = symmetric_eigenvalues(K.matrix());
  CHECK(ev.minCoeff() + c.jitter() > 0.0);
  Matrix shifted = K.matrix();
  shifted.diagonal().array() += c.jitter();
  CHECK((c.lower() * c.lower().transpose() - shifted).norm() < 1e-12);
}

TEST_CASE("non-finite entries fail to factor") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = std::nan("");
  CHECK_THROWS_AS(cholesky_jittered(PsdMatrix(m)), FactorizationFailure);
}

TEST_CASE("solve_psd") {
  const Matrix b = Matrix::Random(4, 2);
  CHECK((solve_psd(PsdMatrix::identity(4), b) - b).norm() == 0.0);

  Vector rhs(2);
  rhs << 2.0, 4.0;
  const Matrix x = solve_psd(PsdMatrix(2.0 * Matrix::Identity(2, 2)), rhs);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(solve_psd(PsdMatrix::identity(3), Matrix::Ones(2, 1)), DimensionMismatch);

  oracle::Gen gen(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix A = gen.spd(6);
    const Matrix B = Matrix::NullaryExpr(6, 3, [&] { return gen.normal(); });
    const Matrix X = solve_psd(PsdMatrix(A), B);
    CHECK(oracle::rel_err(X, Matrix(A.inverse() * B)) < 1e-9);
    CHECK((A * X - B).norm() / B.norm() < 1e-10);
  }
}

TEST_CASE("logdet_psd") {
  CHECK(logdet_psd(PsdMatrix::identity(5)) == doctest::Approx(0.0));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 3.0;
  CHECK(logdet_psd(PsdMatrix(d)) == doctest::Approx(std::log(6.0)).epsilon(1e-14));

  oracle::Gen gen(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix A = gen.spd(8);
    CHECK(std::abs(logdet_psd(PsdMatrix(A)) - oracle::logdet(A)) < 1e-9);
    // log det(L L^T) = 2 log det L
    const Cholesky c = cholesky_jittered(PsdMatrix(A));
    const double l = c.lower().diagonal().array().log().sum();
    CHECK(std::abs(c.logdet() - 2.0 * l) < 1e-10);
  }
}

TEST_CASE("block_inverse_2x2") {
  SUBCASE("block diagonal") {
    Matrix a11(2, 2), a22(1, 1);
    a11 << 2.0, 0.5, 0.5, 1.0;
    a22 << 4.0;
    const BlockInverse inv = block_inverse_2x2(a11, Matrix::Zero(2, 1), Matrix::Zero(1, 2), a22);
    CHECK(oracle::rel_err(inv.a, Matrix(a11.inverse())) < 1e-14);
    CHECK(inv.d(0, 0) == doctest::Approx(0.25));
    CHECK(inv.b.norm() == 0.0);
    CHECK(inv.c.norm() == 0.0);
  }
  SUBCASE("identity blocks") {
    const Matrix I = Matrix::Identity(2, 2);
    const BlockInverse inv = block_inverse_2x2(I, Matrix::Zero(2, 2), Matrix::Zero(2, 2), I);
    CHECK((inv.assemble() - Matrix::Identity(4, 4)).norm() == 0.0);
  }
  SUBCASE("random SPD against dense inverse") {
    oracle::Gen gen(13);
    for (const Index n : {6, 10, 24, 50}) {
      const Matrix A = gen.spd(n);
      const Index h = n / 2;
      const BlockInverse inv = block_inverse_2x2(A.topLeftCorner(h, h), A.topRightCorner(h, n - h),
                                                 A.bottomLeftCorner(n - h, h),
                                                 A.bottomRightCorner(n - h, n - h));
      CHECK(oracle::rel_err(inv.assemble(), Matrix(A.inverse())) < (n == 6 ? 1e-9 : 1e-8));
    }
  }
  CHECK_THROWS_AS(block_inverse_2x2(Matrix::Identity(2, 2), Matrix::Zero(3, 1),
                                    Matrix::Zero(1, 2), Matrix::Identity(1, 1)),
                  DimensionMismatch);
}
