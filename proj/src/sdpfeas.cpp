#include "arinfo/sdpfeas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>

namespace arinfo {

Matrix AffineLmi::evaluate(const Vector& x) const {
  Matrix f = constant;
  for (const auto& [id, b] : basis) f += x(id) * b;
  return f;
}

void AffineLmi::validate(int num_vars) const {
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::kMalformedProblem, (name.empty() ? "lmi" : name) + ": " + why);
  };
  if (dim < 1 || constant.rows() != dim || constant.cols() != dim) bad("constant size");
  if (!constant.allFinite()) bad("non-finite constant");
  const double tol = 1e-12;
  auto asym = [&](const Matrix& m) {
    const double s = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    return (m - m.transpose()).cwiseAbs().maxCoeff() > tol * s;
  };
  if (asym(constant)) bad("constant not symmetric");
  std::vector<char> seen(std::max(num_vars, 0), 0);
  for (const auto& [id, b] : basis) {
    if (id < 0 || id >= num_vars) bad("variable id out of range");
    if (seen[id]) bad("duplicate variable id");
    seen[id] = 1;
    if (b.rows() != dim || b.cols() != dim) bad("basis size");
    if (!b.allFinite()) bad("non-finite basis");
    if (asym(b)) bad("basis not symmetric");
  }
}

AffineLmi linearize(int num_vars, const std::function<Matrix(const Vector&)>& f,
                    std::string name) {
  AffineLmi lmi;
  lmi.name = std::move(name);
  Vector x = Vector::Zero(num_vars);
  const Matrix c = f(x);
  lmi.dim = static_cast<int>(c.rows());
  lmi.constant = 0.5 * (c + c.transpose());
  for (int i = 0; i < num_vars; ++i) {
    x.setZero();
    x(i) = 1.0;
    Matrix b = f(x) - c;
    b = 0.5 * (b + b.transpose());
    if (b.cwiseAbs().maxCoeff() > 0.0) lmi.basis.emplace_back(i, std::move(b));
  }
  return lmi;
}

Matrix SymVar::unpack(const Vector& x) const {
  Matrix m(n, n);
  int k = offset;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m(i, j) = x(k);
      m(j, i) = x(k);
      ++k;
    }
  return m;
}

Matrix MatVar::unpack(const Vector& x) const {
  Matrix m(rows, cols);
  int k = offset;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = x(k++);
  return m;
}

const char* to_string(FeasStatus s) {
  switch (s) {
    case FeasStatus::kFeasible: return "Feasible";
    case FeasStatus::kInfeasible: return "Infeasible";
    case FeasStatus::kIndeterminate: return "Indeterminate";
  }
  return "Unknown";
}

void dump_triplets(std::ostream& out, const std::vector<AffineLmi>& lmis) {
  out.precision(17);
  for (size_t k = 0; k < lmis.size(); ++k) {
    const auto& l = lmis[k];
    auto emit = [&](const Matrix& m, int var) {
      for (int i = 0; i < l.dim; ++i)
        for (int j = i; j < l.dim; ++j)
          if (m(i, j) != 0.0) out << k << ' ' << i << ' ' << j << ' ' << var << ' ' << m(i, j) << '\n';
    };
    emit(l.constant, -1);
    for (const auto& [id, b] : l.basis) emit(b, id);
  }
}

namespace {

inline double trace_product(const Matrix& a, const Matrix& b) {
  // tr(A B) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum();
}

}  // namespace

void accumulate_block_serial(const Matrix& ginv,
                             const std::vector<const Matrix*>& bases,
                             const std::vector<int>& vars, Vector& grad,
                             Matrix& hess) {
  const int nb = static_cast<int>(bases.size());
  std::vector<Matrix> m(nb);
  for (int i = 0; i < nb; ++i) m[i] = ginv * (*bases[i]);
  for (int i = 0; i < nb; ++i) {
    grad(vars[i]) -= m[i].trace();
    for (int j = i; j < nb; ++j) {
      const double h = trace_product(m[i], m[j]);
      hess(vars[i], vars[j]) += h;
      if (j != i) hess(vars[j], vars[i]) += h;
    }
  }
}

void accumulate_block_parallel(const Matrix& ginv,
                               const std::vector<const Matrix*>& bases,
                               const std::vector<int>& vars, Vector& grad,
                               Matrix& hess) {
  const int nb = static_cast<int>(bases.size());
  std::vector<Matrix> m(nb);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nb; ++i) m[i] = ginv * (*bases[i]);
  // Each (i, j) entry is written by exactly one iteration, so the result is
  // independent of the schedule.
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < nb; ++i) {
    grad(vars[i]) -= m[i].trace();
    for (int j = i; j < nb; ++j) {
      const double h = trace_product(m[i], m[j]);
      hess(vars[i], vars[j]) += h;
      if (j != i) hess(vars[j], vars[i]) += h;
    }
  }
}

namespace {

struct Block {
  Matrix constant;
  std::vector<Matrix> bases;
  std::vector<int> vars;                 // global ids, t last
  std::vector<const Matrix*> base_ptrs;  // into bases, plus -I for t
  Matrix minus_identity;
};

class Barrier {
 public:
  Barrier(std::vector<Block>& blocks, int n, double radius, bool parallel)
      : blocks_(blocks), n_(n), r2_(radius * radius), parallel_(parallel) {}

  // z = (x, t). Returns false if z is outside the domain.
  bool value(const Vector& z, double s, double& out) const {
    const double t = z(n_);
    double v = -s * t;
    const double slack = r2_ - z.head(n_).squaredNorm();
    if (!(slack > 0)) return false;
    v -= std::log(slack);
    for (const auto& b : blocks_) {
      Eigen::LLT<Matrix> llt(assemble(b, z));
      if (llt.info() != Eigen::Success) return false;
      const auto d = llt.matrixLLT().diagonal();
      if ((d.array() <= 0).any()) return false;
      v -= 2.0 * d.array().log().sum();
    }
    out = v;
    return std::isfinite(v);
  }

  void derivatives(const Vector& z, double s, Vector& grad, Matrix& hess) const {
    const int nz = n_ + 1;
    grad = Vector::Zero(nz);
    hess = Matrix::Zero(nz, nz);
    grad(n_) = -s;
    const Vector x = z.head(n_);
    const double slack = r2_ - x.squaredNorm();
    grad.head(n_) += 2.0 * x / slack;
    hess.topLeftCorner(n_, n_) += 2.0 / slack * Matrix::Identity(n_, n_) +
                                  4.0 / (slack * slack) * x * x.transpose();
    for (const auto& b : blocks_) {
      const Matrix g = assemble(b, z);
      Eigen::LLT<Matrix> llt(g);
      const Matrix ginv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
      if (parallel_) {
        accumulate_block_parallel(ginv, b.base_ptrs, b.vars, grad, hess);
      } else {
        accumulate_block_serial(ginv, b.base_ptrs, b.vars, grad, hess);
      }
    }
  }

  Matrix assemble(const Block& b, const Vector& z) const {
    Matrix g = b.constant;
    for (size_t i = 0; i + 1 < b.vars.size(); ++i) g += z(b.vars[i]) * b.bases[i];
    g.diagonal().array() -= z(n_);
    return g;
  }

 private:
  std::vector<Block>& blocks_;
  int n_;
  double r2_;
  bool parallel_;
};

}  // namespace

FeasResult solve_feasibility(const std::vector<AffineLmi>& lmis, int num_vars,
                             const FeasOptions& options) {
  if (lmis.empty()) throw Error(ErrorCode::kMalformedProblem, "no LMIs");
  if (num_vars < 0) throw Error(ErrorCode::kMalformedProblem, "negative variable count");
  for (const auto& l : lmis) l.validate(num_vars);
  if (!options.dump_path.empty()) {
    std::ofstream out(options.dump_path);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + options.dump_path);
    dump_triplets(out, lmis);
  }

  const int n = num_vars;
  // Block scaling, then variable scaling, so every normalized block and every
  // normalized coefficient has Frobenius norm at most one.
  std::vector<double> cscale(lmis.size(), 1.0);
  for (size_t k = 0; k < lmis.size(); ++k) {
    double s = lmis[k].constant.norm();
    for (const auto& [id, b] : lmis[k].basis) s = std::max(s, b.norm());
    cscale[k] = s > 0 ? 1.0 / s : 1.0;
  }
  Vector dscale = Vector::Zero(n);
  for (size_t k = 0; k < lmis.size(); ++k)
    for (const auto& [id, b] : lmis[k].basis)
      dscale(id) = std::max(dscale(id), cscale[k] * b.norm());
  for (int i = 0; i < n; ++i) dscale(i) = dscale(i) > 0 ? 1.0 / dscale(i) : 1.0;

  std::vector<Block> blocks(lmis.size());
  for (size_t k = 0; k < lmis.size(); ++k) {
    Block& b = blocks[k];
    b.constant = cscale[k] * lmis[k].constant;
    for (const auto& [id, m] : lmis[k].basis) {
      b.bases.push_back(cscale[k] * dscale(id) * m);
      b.vars.push_back(id);
    }
    b.minus_identity = -Matrix::Identity(lmis[k].dim, lmis[k].dim);
    for (auto& m : b.bases) b.base_ptrs.push_back(&m);
    b.base_ptrs.push_back(&b.minus_identity);
    b.vars.push_back(n);
  }

  int total_dim = 1;
  double t0 = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    total_dim += static_cast<int>(b.constant.rows());
    t0 = std::min(t0, min_eigenvalue(b.constant));
  }

  const double radius = options.ball_radius;
  Barrier barrier(blocks, n, radius, options.parallel);
  Vector z = Vector::Zero(n + 1);
  z(n) = t0 - 1.0;

  FeasResult res;
  double s = 1.0;
  int steps = 0;
  double upper = std::numeric_limits<double>::infinity();
  bool ball_active = false;
  while (steps < options.max_newton_steps) {
    // Centering by damped Newton.
    for (; steps < options.max_newton_steps; ++steps) {
      Vector g;
      Matrix h;
      barrier.derivatives(z, s, g, h);
      Eigen::LDLT<Matrix> ldlt(h);
      Vector dz = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
        const double reg = 1e-12 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<Matrix> ldlt2(h + reg * Matrix::Identity(h.rows(), h.cols()));
        dz = -ldlt2.solve(g);
      }
      const double dec2 = -g.dot(dz);
      if (!(dec2 > 1e-10)) break;
      double f0 = 0.0;
      barrier.value(z, s, f0);
      double alpha = 1.0, f1 = 0.0;
      bool moved = false;
      while (alpha > 1e-14) {
        const Vector zn = z + alpha * dz;
        if (barrier.value(zn, s, f1) && f1 <= f0 - 0.25 * alpha * dec2) {
          z = zn;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      if (dec2 < 1e-9) {
        ++steps;
        break;
      }
    }
    upper = z(n) + static_cast<double>(total_dim) / s;
    ball_active = z.head(n).norm() > 0.9 * radius;
    const double gap = static_cast<double>(total_dim) / s;
    if (gap < options.gap_tol * std::max(1.0, std::abs(z(n)))) break;
    if (upper < -options.eps && !ball_active) break;
    s *= 10.0;
  }

  res.newton_steps = steps;
  res.normalized_t = z(n);
  res.upper_bound = upper;
  res.ball_active = ball_active;
  res.x = z.head(n).cwiseProduct(dscale);

  // Solver-independent certificate on the original data.
  bool all_ok = true;
  res.margin = std::numeric_limits<double>::infinity();
  res.relative_margin = std::numeric_limits<double>::infinity();
  for (const auto& l : lmis) {
    const Matrix f = l.evaluate(res.x);
    const double lam = min_eigenvalue(f);
    const double scale = std::max({l.constant.norm(), f.norm(), 1e-300});
    res.lmi_margins.push_back(lam);
    res.margin = std::min(res.margin, lam);
    res.relative_margin = std::min(res.relative_margin, lam / scale);
    if (!(lam > options.eps * scale)) all_ok = false;
  }
  if (all_ok) {
    res.status = FeasStatus::kFeasible;
  } else if (upper < -options.eps && !ball_active) {
    res.status = FeasStatus::kInfeasible;
  } else {
    res.status = FeasStatus::kIndeterminate;
  }
  return res;
}

}  // namespace arinfo
