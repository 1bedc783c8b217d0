#pragma once

#include <vector>

#include "arinfo/matcore.hpp"

namespace arinfo {

/// y(t+L) + P_{L-1} y(t+L-1) + ... + P_0 y(t)
///   = Q_L u(t+L) + ... + Q_0 u(t) + v(t).
struct ArSystem {
  int L = 0;
  int m = 0;
  int p = 0;
  std::vector<Matrix> P;  // P_0 .. P_{L-1}, each p x p
  std::vector<Matrix> Q;  // Q_0 .. Q_L, each p x m

  static ArSystem Autonomous(const std::vector<Matrix>& P);
  void validate() const;
  bool strictly_proper() const;
};

/// G(sigma) u = F(sigma) y with G monic of degree L and deg F <= L-1.
struct Controller {
  int L = 0;
  int m = 0;
  int p = 0;
  std::vector<Matrix> G;  // G_0 .. G_{L-1}, each m x m
  std::vector<Matrix> F;  // F_0 .. F_{L-1}, each m x p

  /// Row [G_0 -F_0 G_1 -F_1 ... G_{L-1} -F_{L-1}].
  Matrix coefficient_row() const;
  static Controller FromRow(const Matrix& c, int L, int m, int p);
  void validate() const;
};

/// Interleaved row [-Q_0 P_0 -Q_1 P_1 ... (-Q_L)].
struct CoefficientRow {
  Matrix R;
  bool strictly_proper = true;
};

/// Runs the recursion for t = 0 .. v.cols()-1; returns y with L + v.cols()
/// samples. u needs every sample the recursion touches.
Matrix simulate(const ArSystem& sys, const Matrix& u, const Matrix& v,
                const Matrix& init);

CoefficientRow flatten(const ArSystem& sys, bool strictly_proper);
ArSystem unflatten(const CoefficientRow& row, int L, int m, int p);

/// Block companion matrix [J; -P] of size pL.
Matrix companion(const std::vector<Matrix>& P);
Matrix companion(const ArSystem& autonomous);

/// J = [0_{n(L-1) x n}  I_{n(L-1)}].
Matrix shift_matrix(int n, int L);

struct LyapunovCheck {
  bool passes = false;
  /// Largest eigenvalue of [I; -P]^T (nabla Psi) [I; -P]; negative passes.
  double max_eig = 0.0;
  /// Same quantity from [J; -P]^T Psi [J; -P] - Psi.
  double standard_max_eig = 0.0;
  double discrepancy = 0.0;
  bool psi_positive_definite = false;
};

/// Lyapunov QMI for the autonomous system P with QDF matrix Psi (size pL).
/// Both forms are evaluated and must agree.
LyapunovCheck lyapunov_qmi_check(const std::vector<Matrix>& P,
                                 const SymMatrix& psi);

/// max eig(A^T Psi A - Psi) for a general state matrix.
double lyapunov_max_eig(const Matrix& a, const Matrix& psi);

/// Closed loop over w = col(u, y): coefficient rows [G_i -F_i; -Q_i P_i].
ArSystem interconnect(const ArSystem& sys, const Controller& ctrl);

/// Companion matrix of the closed loop in state (w(t), ..., w(t+L-1)).
Matrix closed_loop_matrix(const Matrix& plant_row, const Matrix& controller_row,
                          int L, int q);

}  // namespace arinfo
