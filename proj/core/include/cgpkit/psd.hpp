#pragma once

#include <Eigen/Dense>

namespace cgpkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense symmetric matrix that is expected to be positive semidefinite.
/// The input is symmetrized as (m + m^T) / 2 on construction; definiteness is
/// only checked when the matrix is factorized.
class PsdMatrix {
 public:
  PsdMatrix() = default;
  explicit PsdMatrix(Matrix m);

  static PsdMatrix identity(Index n);
  static PsdMatrix zero(Index n);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double trace() const { return m_.trace(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Relative jitter levels tried after a plain factorization fails; each is
/// scaled by trace / dim of the input.
inline constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

/// Lower Cholesky factor of m + jitter * I.
class Cholesky {
 public:
  Cholesky(Eigen::LLT<Matrix> llt, double jitter)
      : llt_(std::move(llt)), jitter_(jitter) {}

  Index dim() const { return llt_.rows(); }
  double jitter() const noexcept { return jitter_; }
  Matrix lower() const { return llt_.matrixL(); }

  /// x with (m + jitter I) x = b.
  template <class Rhs>
  typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& b) const {
    return llt_.solve(b);
  }

  /// L^{-1} b, the whitening half-solve.
  template <class Rhs>
  typename Rhs::PlainObject solve_lower(const Eigen::MatrixBase<Rhs>& b) const {
    return llt_.matrixL().solve(b);
  }

  double logdet() const;

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_;
};

/// Factorizes m, escalating through kJitterLadder when the plain factorization
/// breaks down or produces a pivot below the round-off floor
/// dim * eps * max|diag|. Throws FactorizationFailure when the ladder is
/// exhausted.
Cholesky cholesky_jittered(const PsdMatrix& m);

Matrix solve_psd(const PsdMatrix& m, const Eigen::Ref<const Matrix>& b);

double logdet_psd(const PsdMatrix& m);

/// Blocks of the inverse of [a11 a12; a21 a22], built from the inverse of
/// a11 and of the Schur complement a22 - a21 a11^{-1} a12.
struct BlockInverse {
  Matrix a;
  Matrix b;
  Matrix c;
  Matrix d;

  Matrix assemble() const;
};

/// The assembled matrix must be symmetric positive definite (a21 = a12^T); both
/// a11 and the Schur complement go through the jittered Cholesky.
BlockInverse block_inverse_2x2(const Matrix& a11, const Matrix& a12,
                               const Matrix& a21, const Matrix& a22);

/// Eigenvalues of the symmetric part of m, ascending.
Vector symmetric_eigenvalues(const Matrix& m);

}  // namespace cgpkit
