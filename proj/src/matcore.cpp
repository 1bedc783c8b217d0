#include "arinfo/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace arinfo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kNotInPiClass: return "NotInPiClass";
    case ErrorCode::kSNotContractive: return "SNotContractive";
    case ErrorCode::kStrictSetEmpty: return "StrictSetEmpty";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kHorizonTooShort: return "HorizonTooShort";
    case ErrorCode::kRankDeficientHankel: return "RankDeficientHankel";
    case ErrorCode::kNotStrictlyProperClass: return "NotStrictlyProperClass";
    case ErrorCode::kQLNotZero: return "QLNotZero";
    case ErrorCode::kIncompatibleData: return "IncompatibleData";
    case ErrorCode::kCertificateFailed: return "CertificateFailed";
    case ErrorCode::kMalformedProblem: return "MalformedProblem";
    case ErrorCode::kSingularMassMatrix: return "SingularMassMatrix";
    case ErrorCode::kEigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

namespace {

bool nearly_symmetric(const Matrix& a, double rel) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

Eigen::SelfAdjointEigenSolver<Matrix> sym_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "symmetric eigensolver");
  }
  return es;
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& a) {
  if (!a.allFinite()) throw Error(ErrorCode::kNonFinite, "SymMatrix entries");
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "SymMatrix must be square");
  }
  if (!nearly_symmetric(a, 1e-12)) {
    throw Error(ErrorCode::kNotSymmetric, "max |A - A^T| > 1e-12 ||A||");
  }
  a_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::FromSymmetricPart(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "SymMatrix must be square");
  }
  return SymMatrix(Matrix(0.5 * (a + a.transpose())));
}

PartitionedSym::PartitionedSym(const SymMatrix& full, int q)
    : full_(full), q_(q) {
  if (q < 0 || q > full.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "partition size out of range");
  }
}

PartitionedSym::PartitionedSym(const Matrix& p11, const Matrix& p12,
                               const Matrix& p22) {
  const auto q = p11.rows();
  const auto r = p22.rows();
  if (p11.cols() != q || p22.cols() != r || p12.rows() != q ||
      p12.cols() != r) {
    throw Error(ErrorCode::kShapeMismatch, "inconsistent block sizes");
  }
  Matrix full(q + r, q + r);
  full << p11, p12, p12.transpose(), p22;
  full_ = SymMatrix(full);
  q_ = static_cast<int>(q);
}

Matrix pseudoinverse(const Matrix& a) {
  if (!a.allFinite()) throw Error(ErrorCode::kNonFinite, "pseudoinverse input");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  if (nearly_symmetric(a, 1e-12)) {
    auto es = sym_eig(0.5 * (a + a.transpose()));
    const Vector& lam = es.eigenvalues();
    const double cutoff = kRankTol * lam.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lam.size());
    for (int i = 0; i < lam.size(); ++i) {
      if (std::abs(lam(i)) > cutoff) inv(i) = 1.0 / lam(i);
    }
    const Matrix& v = es.eigenvectors();
    return v * inv.asDiagonal() * v.transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = kRankTol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

SymMatrix schur_complement(const PartitionedSym& p) {
  const Matrix s = p.p11() - p.p12() * pseudoinverse(p.p22()) * p.p21();
  return SymMatrix::FromSymmetricPart(s);
}

SymMatrix psd_sqrt(const SymMatrix& a) {
  if (a.dim() == 0) return a;
  auto es = sym_eig(a.matrix());
  Vector lam = es.eigenvalues();
  const double norm = lam.cwiseAbs().maxCoeff();
  if (lam.minCoeff() < -kPsdTol * norm) {
    throw Error(ErrorCode::kNotPsd, "psd_sqrt: eigenvalue " +
                                        std::to_string(lam.minCoeff()));
  }
  for (int i = 0; i < lam.size(); ++i) lam(i) = std::sqrt(std::max(lam(i), 0.0));
  const Matrix& v = es.eigenvectors();
  return SymMatrix::FromSymmetricPart(v * lam.asDiagonal() * v.transpose());
}

bool kernel_inclusion(const Matrix& a, const Matrix& b, double tol) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "kernel_inclusion column counts");
  }
  const auto n = a.cols();
  if (n == 0 || b.rows() == 0) return true;
  const double norm_a = a.size() ? spectral_norm(a) : 0.0;
  const double norm_b = spectral_norm(b);
  // Nullspace of A: right singular vectors with sigma <= tol (full V so a
  // wide or zero A still yields a complete basis).
  Matrix null;
  if (a.rows() == 0) {
    null = Matrix::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) {
      if (s(i) > tol) ++rank;
    }
    null = svd.matrixV().rightCols(n - rank);
  }
  if (null.cols() == 0) return true;
  const double kappa = norm_b / std::max(norm_a, 1.0);
  return spectral_norm(b * null) <= tol * kappa;
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "spectral_radius needs square");
  }
  if (!a.allFinite()) throw Error(ErrorCode::kNonFinite, "spectral_radius");
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "spectral_radius");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

Eigen::VectorXd symmetric_eigenvalues(const Matrix& symmetric) {
  if (symmetric.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      0.5 * (symmetric + symmetric.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "symmetric eigenvalues");
  }
  return es.eigenvalues();
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return std::numeric_limits<double>::infinity();
  return symmetric_eigenvalues(symmetric).minCoeff();
}

double max_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return -std::numeric_limits<double>::infinity();
  return symmetric_eigenvalues(symmetric).maxCoeff();
}

Matrix spd_inverse(const Matrix& a, double max_condition, double* condition) {
  auto es = sym_eig(0.5 * (a + a.transpose()));
  const Vector& lam = es.eigenvalues();
  const double lo = lam.minCoeff();
  const double hi = lam.maxCoeff();
  const double cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (condition) *condition = cond;
  if (!(lo > 0) || cond > max_condition) {
    throw Error(ErrorCode::kCertificateFailed,
                "matrix not safely invertible (condition " +
                    std::to_string(cond) + ")");
  }
  const Matrix& v = es.eigenvectors();
  return v * lam.cwiseInverse().asDiagonal() * v.transpose();
}

}  // namespace arinfo
