#pragma once

#include <Eigen/Dense>

#include "arinfo/error.hpp"

namespace arinfo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance: singular values below kRankTol * sigma_max are
/// treated as zero.
inline constexpr double kRankTol = 1e-12;
/// Relative PSD tolerance: eigenvalues above -kPsdTol * ||A|| count as >= 0.
inline constexpr double kPsdTol = 1e-10;

/// Dense real symmetric matrix. Construction checks symmetry to 1e-12
/// relative and finiteness, then stores the exact symmetric part.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a);

  static SymMatrix Identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix Zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }
  /// Takes (A + A^T)/2 without the symmetry check; A must still be finite.
  static SymMatrix FromSymmetricPart(const Matrix& a);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Matrix& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

 private:
  Matrix a_;
};

/// Symmetric matrix [[P11, P12], [P12^T, P22]] with P11 of size q and P22 of
/// size r.
class PartitionedSym {
 public:
  PartitionedSym() = default;
  PartitionedSym(const SymMatrix& full, int q);
  PartitionedSym(const Matrix& p11, const Matrix& p12, const Matrix& p22);

  int q() const { return q_; }
  int r() const { return full_.dim() - q_; }
  const SymMatrix& full() const { return full_; }
  const Matrix& matrix() const { return full_.matrix(); }

  Matrix p11() const { return full_.matrix().topLeftCorner(q_, q_); }
  Matrix p12() const { return full_.matrix().topRightCorner(q_, r()); }
  Matrix p21() const { return full_.matrix().bottomLeftCorner(r(), q_); }
  Matrix p22() const { return full_.matrix().bottomRightCorner(r(), r()); }

 private:
  SymMatrix full_;
  int q_ = 0;
};

bool all_finite(const Matrix& a);

/// Moore-Penrose pseudoinverse; symmetric input uses the eigendecomposition,
/// anything else the SVD.
Matrix pseudoinverse(const Matrix& a);

/// Generalized Schur complement P11 - P12 P22^+ P21.
SymMatrix schur_complement(const PartitionedSym& p);

/// Symmetric PSD square root. Throws kNotPsd below -kPsdTol * ||A||.
SymMatrix psd_sqrt(const SymMatrix& a);

/// True iff every v with ||Av|| <= tol also has ||Bv|| <= tol * kappa,
/// kappa = ||B|| / max(||A||, 1).
bool kernel_inclusion(const Matrix& a, const Matrix& b, double tol);

double spectral_radius(const Matrix& a);
double spectral_norm(const Matrix& a);
double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);
Eigen::VectorXd symmetric_eigenvalues(const Matrix& symmetric);

/// Inverse of a symmetric positive definite matrix via its eigendecomposition.
/// Throws kCertificateFailed if the matrix is not PD or its condition number
/// exceeds max_condition.
Matrix spd_inverse(const Matrix& a, double max_condition = 1e12,
                   double* condition = nullptr);

}  // namespace arinfo
