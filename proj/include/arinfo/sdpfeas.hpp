#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "arinfo/matcore.hpp"

namespace arinfo {

/// F(x) = constant + sum_i x_{id_i} basis_i, all symmetric of size dim.
struct AffineLmi {
  int dim = 0;
  Matrix constant;
  std::vector<std::pair<int, Matrix>> basis;
  std::string name;

  Matrix evaluate(const Vector& x) const;
  void validate(int num_vars) const;
};

/// Probes an affine map f at 0 and at unit vectors. Exact for affine f.
AffineLmi linearize(int num_vars, const std::function<Matrix(const Vector&)>& f,
                    std::string name = {});

/// Scalar layout of a symmetric n x n matrix variable (upper triangle, row
/// major) starting at `offset`.
struct SymVar {
  int offset = 0;
  int n = 0;
  int count() const { return n * (n + 1) / 2; }
  Matrix unpack(const Vector& x) const;
};

/// Scalar layout of a rows x cols matrix variable (column major).
struct MatVar {
  int offset = 0;
  int rows = 0;
  int cols = 0;
  int count() const { return rows * cols; }
  Matrix unpack(const Vector& x) const;
};

enum class FeasStatus { kFeasible, kInfeasible, kIndeterminate };
const char* to_string(FeasStatus s);

struct FeasOptions {
  /// Relative margin: Feasible needs lambda_min(F_k) > eps max(||F_k0||, ||F_k(x)||).
  double eps = 1e-7;
  /// Norm-ball bound on the normalized variables.
  double ball_radius = 1e4;
  double gap_tol = 1e-10;
  int max_newton_steps = 4000;
  bool parallel = false;
  std::string dump_path;
};

struct FeasResult {
  FeasStatus status = FeasStatus::kIndeterminate;
  Vector x;
  double margin = 0.0;
  std::vector<double> lmi_margins;
  double relative_margin = 0.0;
  double normalized_t = 0.0;
  double upper_bound = 0.0;
  bool ball_active = false;
  int newton_steps = 0;
};

/// Maximizes t subject to F_k(x) >= t I for all k (log-barrier interior
/// point on normalized data), then certifies the answer by eigenvalues of
/// the unnormalized F_k(x).
FeasResult solve_feasibility(const std::vector<AffineLmi>& lmis, int num_vars,
                             const FeasOptions& options = {});

/// One line per nonzero upper-triangle entry: lmi row col var value
/// (var = -1 for the constant term).
void dump_triplets(std::ostream& out, const std::vector<AffineLmi>& lmis);

/// Barrier derivatives of one block: with M_i = G^{-1} B_i,
///   grad_i -= tr(M_i),  hess_ij += tr(M_i M_j).
/// `vars` maps local bases to global variable indices.
void accumulate_block_serial(const Matrix& ginv,
                             const std::vector<const Matrix*>& bases,
                             const std::vector<int>& vars, Vector& grad,
                             Matrix& hess);
void accumulate_block_parallel(const Matrix& ginv,
                               const std::vector<const Matrix*>& bases,
                               const std::vector<int>& vars, Vector& grad,
                               Matrix& hess);

}  // namespace arinfo
