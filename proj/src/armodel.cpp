#include "arinfo/armodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arinfo/qdf.hpp"

namespace arinfo {

namespace {

void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) throw Error(code, what);
}

}  // namespace

ArSystem ArSystem::Autonomous(const std::vector<Matrix>& P) {
  ArSystem s;
  s.L = static_cast<int>(P.size());
  s.p = s.L > 0 ? static_cast<int>(P[0].rows()) : 0;
  s.m = 0;
  s.P = P;
  s.Q.assign(s.L + 1, Matrix::Zero(s.p, 0));
  s.validate();
  return s;
}

void ArSystem::validate() const {
  require(L >= 1 && p >= 1 && m >= 0, ErrorCode::kShapeMismatch,
          "ArSystem needs L >= 1, p >= 1, m >= 0");
  require(static_cast<int>(P.size()) == L && static_cast<int>(Q.size()) == L + 1,
          ErrorCode::kShapeMismatch, "ArSystem list lengths must be L and L+1");
  for (const auto& pi : P) {
    require(pi.rows() == p && pi.cols() == p, ErrorCode::kShapeMismatch,
            "P_i must be p x p");
    require(pi.allFinite(), ErrorCode::kNonFinite, "P_i");
  }
  for (const auto& qi : Q) {
    require(qi.rows() == p && qi.cols() == m, ErrorCode::kShapeMismatch,
            "Q_i must be p x m");
    require(qi.allFinite(), ErrorCode::kNonFinite, "Q_i");
  }
}

bool ArSystem::strictly_proper() const {
  return m == 0 || Q[L].cwiseAbs().maxCoeff() == 0.0;
}

Matrix Controller::coefficient_row() const {
  validate();
  const int q = m + p;
  Matrix c(m, q * L);
  for (int i = 0; i < L; ++i) {
    c.block(0, i * q, m, m) = G[i];
    c.block(0, i * q + m, m, p) = -F[i];
  }
  return c;
}

Controller Controller::FromRow(const Matrix& c, int L, int m, int p) {
  const int q = m + p;
  require(c.rows() == m && c.cols() == q * L, ErrorCode::kShapeMismatch,
          "controller row must be m x qL");
  Controller k;
  k.L = L;
  k.m = m;
  k.p = p;
  for (int i = 0; i < L; ++i) {
    k.G.push_back(c.block(0, i * q, m, m));
    k.F.push_back(-c.block(0, i * q + m, m, p));
  }
  return k;
}

void Controller::validate() const {
  require(L >= 1 && m >= 1 && p >= 1, ErrorCode::kShapeMismatch,
          "Controller needs L, m, p >= 1");
  require(static_cast<int>(G.size()) == L && static_cast<int>(F.size()) == L,
          ErrorCode::kShapeMismatch, "Controller list lengths must be L");
  for (const auto& g : G)
    require(g.rows() == m && g.cols() == m, ErrorCode::kShapeMismatch, "G_i m x m");
  for (const auto& f : F)
    require(f.rows() == m && f.cols() == p, ErrorCode::kShapeMismatch, "F_i m x p");
}

Matrix simulate(const ArSystem& sys, const Matrix& u, const Matrix& v,
                const Matrix& init) {
  sys.validate();
  const int L = sys.L;
  const int steps = static_cast<int>(v.cols());
  require(v.rows() == sys.p, ErrorCode::kShapeMismatch, "v must have p rows");
  require(init.rows() == sys.p && init.cols() == L, ErrorCode::kShapeMismatch,
          "init must be p x L");
  const int horizon = L + steps;
  if (sys.m > 0) {
    require(u.rows() == sys.m, ErrorCode::kShapeMismatch, "u must have m rows");
    const int need = sys.strictly_proper() ? horizon - 1 : horizon;
    require(u.cols() >= need, ErrorCode::kHorizonTooShort,
            "u does not cover the horizon");
  }
  Matrix y = Matrix::Zero(sys.p, horizon);
  y.leftCols(L) = init;
  for (int t = 0; t < steps; ++t) {
    Vector next = v.col(t);
    for (int i = 0; i < L; ++i) next -= sys.P[i] * y.col(t + i);
    if (sys.m > 0) {
      for (int i = 0; i <= L; ++i) {
        if (i == L && sys.strictly_proper()) break;
        next += sys.Q[i] * u.col(t + i);
      }
    }
    y.col(t + L) = next;
  }
  return y;
}

CoefficientRow flatten(const ArSystem& sys, bool strictly_proper) {
  sys.validate();
  if (strictly_proper && !sys.strictly_proper()) {
    throw Error(ErrorCode::kQLNotZero, "Q_L must vanish in strictly proper mode");
  }
  const int q = sys.m + sys.p;
  const int width = q * sys.L + (strictly_proper ? 0 : sys.m);
  CoefficientRow row;
  row.strictly_proper = strictly_proper;
  row.R = Matrix::Zero(sys.p, width);
  for (int i = 0; i < sys.L; ++i) {
    row.R.block(0, i * q, sys.p, sys.m) = -sys.Q[i];
    row.R.block(0, i * q + sys.m, sys.p, sys.p) = sys.P[i];
  }
  if (!strictly_proper) row.R.rightCols(sys.m) = -sys.Q[sys.L];
  return row;
}

ArSystem unflatten(const CoefficientRow& row, int L, int m, int p) {
  const int q = m + p;
  const int width = q * L + (row.strictly_proper ? 0 : m);
  require(row.R.rows() == p && row.R.cols() == width, ErrorCode::kShapeMismatch,
          "coefficient row width");
  ArSystem s;
  s.L = L;
  s.m = m;
  s.p = p;
  for (int i = 0; i < L; ++i) {
    s.Q.push_back(-row.R.block(0, i * q, p, m));
    s.P.push_back(row.R.block(0, i * q + m, p, p));
  }
  s.Q.push_back(row.strictly_proper ? Matrix(Matrix::Zero(p, m))
                                    : Matrix(-row.R.rightCols(m)));
  s.validate();
  return s;
}

Matrix shift_matrix(int n, int L) {
  Matrix j = Matrix::Zero(n * (L - 1), n * L);
  j.rightCols(n * (L - 1)).setIdentity();
  return j;
}

Matrix companion(const std::vector<Matrix>& P) {
  const int L = static_cast<int>(P.size());
  require(L >= 1, ErrorCode::kShapeMismatch, "companion needs L >= 1");
  const int p = static_cast<int>(P[0].rows());
  Matrix a = Matrix::Zero(p * L, p * L);
  a.topRows(p * (L - 1)) = shift_matrix(p, L);
  for (int i = 0; i < L; ++i) a.block(p * (L - 1), i * p, p, p) = -P[i];
  return a;
}

Matrix companion(const ArSystem& autonomous) {
  require(autonomous.m == 0, ErrorCode::kShapeMismatch,
          "companion needs an autonomous system");
  return companion(autonomous.P);
}

double lyapunov_max_eig(const Matrix& a, const Matrix& psi) {
  const Matrix lhs = a.transpose() * psi * a - psi;
  return max_eigenvalue(0.5 * (lhs + lhs.transpose()));
}

LyapunovCheck lyapunov_qmi_check(const std::vector<Matrix>& P,
                                 const SymMatrix& psi) {
  const int L = static_cast<int>(P.size());
  require(L >= 1, ErrorCode::kShapeMismatch, "empty coefficient list");
  const int p = static_cast<int>(P[0].rows());
  require(psi.dim() == p * L, ErrorCode::kShapeMismatch, "Psi must be pL x pL");

  // QMI form: [I; -P]^T nabla(Psi) [I; -P], nabla from the QDF module.
  const Qdf nabla = rate_of_change(Qdf(p, L - 1, psi));
  Matrix ip = Matrix::Zero(p * (L + 1), p * L);
  ip.topRows(p * L).setIdentity();
  for (int i = 0; i < L; ++i) ip.block(p * L, i * p, p, p) = -P[i];
  const Matrix qmi = ip.transpose() * nabla.phi().matrix() * ip;

  const Matrix a = companion(P);
  const Matrix standard = a.transpose() * psi.matrix() * a - psi.matrix();

  LyapunovCheck out;
  out.max_eig = max_eigenvalue(0.5 * (qmi + qmi.transpose()));
  out.standard_max_eig = max_eigenvalue(0.5 * (standard + standard.transpose()));
  out.discrepancy = (qmi - standard).cwiseAbs().maxCoeff();
  const double scale = std::max(psi.matrix().cwiseAbs().maxCoeff() *
                                    std::max(1.0, a.cwiseAbs().maxCoeff() *
                                                      a.cwiseAbs().maxCoeff()),
                                1e-300);
  if (out.discrepancy > 1e-9 * scale) {
    throw Error(ErrorCode::kCertificateFailed,
                "QMI and standard Lyapunov forms disagree");
  }
  const double tol = kPsdTol * std::max(spectral_norm(psi.matrix()), 1e-300);
  out.passes = out.max_eig < -tol;
  out.psi_positive_definite = min_eigenvalue(psi.matrix()) > 0.0;
  return out;
}

ArSystem interconnect(const ArSystem& sys, const Controller& ctrl) {
  sys.validate();
  ctrl.validate();
  if (sys.L != ctrl.L || sys.m != ctrl.m || sys.p != ctrl.p) {
    throw Error(ErrorCode::kShapeMismatch, "plant/controller orders differ");
  }
  if (!sys.strictly_proper()) {
    throw Error(ErrorCode::kNotStrictlyProperClass, "plant needs Q_L = 0");
  }
  const int m = sys.m, p = sys.p, q = m + p;
  std::vector<Matrix> pcl;
  for (int i = 0; i < sys.L; ++i) {
    Matrix k(q, q);
    k << ctrl.G[i], -ctrl.F[i], -sys.Q[i], sys.P[i];
    pcl.push_back(k);
  }
  return ArSystem::Autonomous(pcl);
}

Matrix closed_loop_matrix(const Matrix& plant_row, const Matrix& controller_row,
                          int L, int q) {
  require(plant_row.cols() == q * L && controller_row.cols() == q * L &&
              plant_row.rows() + controller_row.rows() == q,
          ErrorCode::kShapeMismatch, "closed-loop rows must stack to q x qL");
  Matrix a = Matrix::Zero(q * L, q * L);
  a.topRows(q * (L - 1)) = shift_matrix(q, L);
  a.block(q * (L - 1), 0, controller_row.rows(), q * L) = -controller_row;
  a.bottomRows(plant_row.rows()) = -plant_row;
  return a;
}

}  // namespace arinfo
