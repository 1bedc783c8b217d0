#include "arinfo/qdf.hpp"

#include <algorithm>
#include <string>

namespace arinfo {

Qdf::Qdf(int q, int degree_bound, const SymMatrix& phi)
    : q_(q), n_(degree_bound), phi_(phi) {
  if (q < 1 || degree_bound < 0 || phi.dim() != (degree_bound + 1) * q) {
    throw Error(ErrorCode::kShapeMismatch,
                "Phi must have size (N+1)q = " +
                    std::to_string((degree_bound + 1) * q));
  }
}

double evaluate(const Qdf& f, const Matrix& w, int t) {
  const int q = f.q();
  const int n = f.degree_bound();
  if (w.rows() != q) throw Error(ErrorCode::kShapeMismatch, "signal dimension");
  if (t < 0 || t + n >= w.cols()) {
    throw Error(ErrorCode::kHorizonTooShort, "signal too short for QDF");
  }
  Vector stacked((n + 1) * q);
  for (int k = 0; k <= n; ++k) stacked.segment(k * q, q) = w.col(t + k);
  return stacked.dot(f.phi().matrix() * stacked);
}

Qdf rate_of_change(const Qdf& f) {
  const int q = f.q();
  const int d = f.phi().dim();
  Matrix nabla = Matrix::Zero(d + q, d + q);
  nabla.bottomRightCorner(d, d) += f.phi().matrix();
  nabla.topLeftCorner(d, d) -= f.phi().matrix();
  return Qdf(q, f.degree_bound() + 1, SymMatrix(nabla));
}

Qdf reduce_degree(const Qdf& f, const std::vector<Matrix>& p) {
  const int q = f.q();
  const int L = static_cast<int>(p.size());
  if (L < 1) throw Error(ErrorCode::kShapeMismatch, "empty AR coefficient list");
  for (const auto& pi : p) {
    if (pi.rows() != q || pi.cols() != q) {
      throw Error(ErrorCode::kShapeMismatch, "P_i must be q x q");
    }
  }
  if (f.degree_bound() <= L - 1) return f;
  Matrix phi = f.phi().matrix();
  for (int k = f.degree_bound(); k >= L; --k) {
    // y(t+k) = -sum_i P_i y(t+k-L+i); columns k-L .. k-1 of the substitution.
    Matrix s = Matrix::Zero((k + 1) * q, k * q);
    s.topRows(k * q).setIdentity();
    for (int i = 0; i < L; ++i) {
      s.block(k * q, (k - L + i) * q, q, q) = -p[i];
    }
    phi = s.transpose() * phi * s;
  }
  return Qdf(q, L - 1, SymMatrix::FromSymmetricPart(phi));
}

bool sign_on_behavior(const Qdf& f, const std::vector<Matrix>& p, Sign mode) {
  const int L = static_cast<int>(p.size());
  const Qdf reduced = reduce_degree(f, p);
  const int q = f.q();
  // Pad to the full initial window of L samples.
  Matrix phi = Matrix::Zero(L * q, L * q);
  const int d = reduced.phi().dim();
  phi.topLeftCorner(d, d) = reduced.phi().matrix();
  const Vector lam = symmetric_eigenvalues(phi);
  const double tol = kPsdTol * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  switch (mode) {
    case Sign::kNonneg: return lam.minCoeff() >= -tol;
    case Sign::kPos: return lam.minCoeff() > tol;
    case Sign::kNonpos: return lam.maxCoeff() <= tol;
    case Sign::kNeg: return lam.maxCoeff() < -tol;
  }
  return false;
}

}  // namespace arinfo
