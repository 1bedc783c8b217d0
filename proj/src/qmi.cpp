#include "arinfo/qmi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace arinfo {

namespace {

double psd_tolerance(const Matrix& a) {
  return kPsdTol * std::max(spectral_norm(a), 1e-300);
}

void check_z_shape(const Matrix& z, const QmiMatrix& p) {
  if (z.rows() != p.r() || z.cols() != p.q()) {
    throw Error(ErrorCode::kShapeMismatch,
                "Z must be " + std::to_string(p.r()) + "x" +
                    std::to_string(p.q()));
  }
}

}  // namespace

PiClassCertificate in_pi_class(const QmiMatrix& p) {
  PiClassCertificate cert;
  const double tol = psd_tolerance(p.matrix());
  const Matrix p22 = p.p22();
  cert.pi22_negsemidef = p.r() == 0 || max_eigenvalue(p22) <= tol;
  cert.schur_psd = p.q() == 0 ||
                   min_eigenvalue(schur_complement(p).matrix()) >= -tol;
  cert.kernel_ok =
      kernel_inclusion(p22, p.p12(), kPsdTol * std::max(spectral_norm(p.matrix()), 1.0));
  return cert;
}

Matrix qmi_value(const Matrix& z, const QmiMatrix& p) {
  check_z_shape(z, p);
  const Matrix p12z = p.p12() * z;
  Matrix v = p.p11() + p12z + p12z.transpose() + z.transpose() * p.p22() * z;
  return 0.5 * (v + v.transpose());
}

bool member_zr(const Matrix& z, const QmiMatrix& p, bool strict,
               double margin) {
  const double lam = min_eigenvalue(qmi_value(z, p));
  return strict ? lam > margin : lam >= -margin;
}

bool nonempty(const QmiMatrix& p, bool strict) {
  const auto cert = in_pi_class(p);
  if (!cert.member()) {
    throw Error(ErrorCode::kNotInPiClass,
                std::string("Pi22<=0: ") + (cert.pi22_negsemidef ? "ok" : "fail") +
                    ", schur>=0: " + (cert.schur_psd ? "ok" : "fail") +
                    ", ker: " + (cert.kernel_ok ? "ok" : "fail"));
  }
  const double lam = min_eigenvalue(schur_complement(p).matrix());
  const double tol = psd_tolerance(p.matrix());
  return strict ? lam > tol : lam >= -tol;
}

Matrix qmi_center(const QmiMatrix& p) {
  return -pseudoinverse(p.p22()) * p.p21();
}

Matrix parametrize_strict(const QmiMatrix& p, const Matrix& s,
                          const Matrix& t) {
  check_z_shape(s, p);
  check_z_shape(t, p);
  if (!nonempty(p, true)) {
    throw Error(ErrorCode::kStrictSetEmpty, "P|P22 is not positive definite");
  }
  if (s.size() > 0 && spectral_norm(s) >= 1.0) {
    throw Error(ErrorCode::kSNotContractive,
                "||S|| = " + std::to_string(spectral_norm(s)));
  }
  const Matrix p22 = p.p22();
  const Matrix p22_pinv = pseudoinverse(p22);
  const Matrix left = psd_sqrt(SymMatrix::FromSymmetricPart(pseudoinverse(-p22))).matrix();
  const Matrix right = psd_sqrt(schur_complement(p)).matrix();
  const Matrix proj = Matrix::Identity(p.r(), p.r()) - p22_pinv * p22;
  return -p22_pinv * p.p21() + left * s * right + proj * t;
}

Matrix contraction_factor(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "A and B need equal column counts");
  }
  Eigen::JacobiSVD<Matrix> svd(b);
  const auto& sv = svd.singularValues();
  if (b.rows() < b.cols() ||
      (sv.size() > 0 && sv(sv.size() - 1) <= kRankTol * sv(0)) ||
      (sv.size() > 0 && sv(0) == 0.0)) {
    throw Error(ErrorCode::kPreconditionViolated, "B is not full column rank");
  }
  const Matrix gap = b.transpose() * b - a.transpose() * a;
  if (min_eigenvalue(gap) <= kPsdTol * spectral_norm(b.transpose() * b)) {
    throw Error(ErrorCode::kPreconditionViolated, "A^T A < B^T B is violated");
  }
  const Matrix s = a * pseudoinverse(b);
  const double scale = std::max(a.norm(), 1.0);
  if ((s * b - a).norm() > 1e-8 * scale || spectral_norm(s) >= 1.0) {
    throw Error(ErrorCode::kPreconditionViolated,
                "factor check failed (A = SB, S^T S < I)");
  }
  return s;
}

QmiMatrix project(const QmiMatrix& p, const Matrix& w) {
  if (w.rows() != p.q()) {
    throw Error(ErrorCode::kShapeMismatch, "W must have q rows");
  }
  const Matrix p11 = w.transpose() * p.p11() * w;
  return QmiMatrix(0.5 * (p11 + p11.transpose()), w.transpose() * p.p12(),
                   p.p22());
}

std::optional<double> slemma_find_alpha(const QmiMatrix& m,
                                        const QmiMatrix& n) {
  if (m.matrix().rows() != n.matrix().rows()) {
    throw Error(ErrorCode::kShapeMismatch, "M and N sizes differ");
  }
  const Matrix& mm = m.matrix();
  const Matrix& nn = n.matrix();
  auto f = [&](double alpha) { return min_eigenvalue(mm - alpha * nn); };

  // f is concave, so doubling until it stops increasing brackets a maximizer.
  double hi = 1.0;
  double f_hi = f(hi);
  for (int k = 0; k < 60; ++k) {
    const double f_next = f(2.0 * hi);
    if (f_next < f_hi) break;
    hi *= 2.0;
    f_hi = f_next;
  }
  hi *= 2.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a); fd = f(d);
    }
  }
  double alpha = 0.5 * (a + b);
  double best = f(alpha);
  const double f0 = f(0.0);
  if (f0 >= best) {
    alpha = 0.0;
    best = f0;
  }
  const double tau_feas = 1e-8 * std::max(spectral_norm(mm), 1.0);
  if (best > tau_feas) return alpha;
  return std::nullopt;
}

Matrix random_contraction(int rows, int cols, double norm,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix s(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) s(i, j) = g(rng);
  const double sn = spectral_norm(s);
  if (sn == 0.0) return Matrix::Zero(rows, cols);
  return s * (norm / sn);
}

Matrix sample_strict_member(const QmiMatrix& p, double s_norm,
                            std::mt19937_64& rng) {
  const Matrix s = random_contraction(p.r(), p.q(), s_norm, rng);
  const Matrix t = random_contraction(p.r(), p.q(), 1.0, rng);
  return parametrize_strict(p, s, t);
}

}  // namespace arinfo
