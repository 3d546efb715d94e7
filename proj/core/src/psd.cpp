#include "cgpkit/psd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cgpkit/errors.hpp"

namespace cgpkit {

PsdMatrix::PsdMatrix(Matrix m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("PsdMatrix: matrix is " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
  }
  m_ = 0.5 * (m + m.transpose());
}

PsdMatrix PsdMatrix::identity(Index n) { return PsdMatrix(Matrix::Identity(n, n)); }

PsdMatrix PsdMatrix::zero(Index n) { return PsdMatrix(Matrix::Zero(n, n)); }

double Cholesky::logdet() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

namespace {

bool factor_is_usable(const Eigen::LLT<Matrix>& llt, double max_diag) {
  if (llt.info() != Eigen::Success) return false;
  const auto pivots = llt.matrixLLT().diagonal().array().square();
  if (!pivots.allFinite()) return false;
  const double floor = static_cast<double>(llt.rows()) *
                       std::numeric_limits<double>::epsilon() * max_diag;
  return pivots.minCoeff() > floor;
}

}  // namespace

Cholesky cholesky_jittered(const PsdMatrix& m) {
  const Matrix& a = m.matrix();
  const Index n = a.rows();
  if (n == 0) return Cholesky(Eigen::LLT<Matrix>(a), 0.0);
  if (!a.allFinite()) throw FactorizationFailure("cholesky: non-finite entries");

  const double scale = a.trace() / static_cast<double>(n);
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();

  Eigen::LLT<Matrix> llt(a);
  if (factor_is_usable(llt, max_diag)) return Cholesky(std::move(llt), 0.0);

  if (scale > 0.0) {
    for (const double level : kJitterLadder) {
      const double jitter = level * scale;
      Matrix shifted = a;
      shifted.diagonal().array() += jitter;
      llt.compute(shifted);
      if (factor_is_usable(llt, max_diag + jitter)) {
        return Cholesky(std::move(llt), jitter);
      }
    }
  }
  throw FactorizationFailure("cholesky: jitter ladder exhausted for " +
                             std::to_string(n) + "x" + std::to_string(n) +
                             " matrix (trace/dim = " + std::to_string(scale) + ")");
}

Matrix solve_psd(const PsdMatrix& m, const Eigen::Ref<const Matrix>& b) {
  if (b.rows() != m.dim()) {
    throw DimensionMismatch("solve_psd: rhs has " + std::to_string(b.rows()) +
                            " rows, matrix has dim " + std::to_string(m.dim()));
  }
  return cholesky_jittered(m).solve(b);
}

double logdet_psd(const PsdMatrix& m) { return cholesky_jittered(m).logdet(); }

Matrix BlockInverse::assemble() const {
  Matrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

BlockInverse block_inverse_2x2(const Matrix& a11, const Matrix& a12,
                               const Matrix& a21, const Matrix& a22) {
  if (a11.rows() != a11.cols() || a22.rows() != a22.cols() ||
      a12.rows() != a11.rows() || a12.cols() != a22.cols() ||
      a21.rows() != a22.rows() || a21.cols() != a11.cols()) {
    throw DimensionMismatch("block_inverse_2x2: inconsistent block shapes");
  }
  const Cholesky f11 = cholesky_jittered(PsdMatrix(a11));
  const Matrix a11_inv_a12 = f11.solve(a12);          // a11^{-1} a12
  const Matrix a21_a11_inv = f11.solve(a21.transpose()).transpose();  // a21 a11^{-1}
  const PsdMatrix schur(a22 - a21 * a11_inv_a12);
  const Cholesky fs = cholesky_jittered(schur);

  BlockInverse out;
  out.d = fs.solve(Matrix::Identity(a22.rows(), a22.rows()));
  out.c = -out.d * a21_a11_inv;
  out.b = -a11_inv_a12 * out.d;
  out.a = f11.solve(Matrix::Identity(a11.rows(), a11.rows())) - a11_inv_a12 * out.c;
  return out;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace cgpkit
