#include "arinfo/informativity.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "arinfo/qmi.hpp"

namespace arinfo {

const char* to_string(Method m) {
  return m == Method::kFull ? "full" : "reduced";
}

namespace {

// Robust Lyapunov problem around the least-squares center:
//   A(R) = a_known + e_c K + sel^T (R - R_c),   R^T in Z(N).
struct Setup {
  HankelPair h;
  CompatibleSet set;
  int n = 0;
  int p = 0;
  int m = 0;
  int block = 0;   // size of one lag block of the state
  int c = -1;      // first controller row (synthesis only)
  Matrix a_known;  // n x n
  Matrix e_c;      // n x m
  Matrix sel;      // p x n
  Matrix s_clip;   // N|N22 with rounding-level negative eigenvalues removed
};

std::string eig_string(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Setup make_setup(const TimeSeriesData& data, const NoiseModel& noise, int L,
                 HankelMode mode) {
  data.validate();
  Setup s;
  s.h = hankel(data, L, mode);
  if (!full_row_rank(s.h.H1)) {
    throw Error(ErrorCode::kRankDeficientHankel,
                "H1 lacks full row rank; N22 is not negative definite");
  }
  s.set = compatible_set(s.h, noise);
  if (!s.set.nonempty()) {
    throw Error(ErrorCode::kIncompatibleData,
                "lambda_min(N|N22) = " + eig_string(s.set.schur_min_eig) +
                    " < -" + eig_string(s.set.tolerance) +
                    ": no system explains the data under this noise model");
  }
  s.p = data.p();
  s.m = mode == HankelMode::kSynthesis ? data.m() : 0;
  s.n = static_cast<int>(s.h.H1.rows());
  s.block = s.m + s.p;
  s.sel = output_selector(s.p, s.n);

  Eigen::SelfAdjointEigenSolver<Matrix> es(s.set.schur);
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  s.s_clip = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();

  const Matrix rc = s.set.center.transpose();
  const Matrix j = shift_matrix(s.block, L);
  s.a_known = Matrix::Zero(s.n, s.n);
  s.a_known.topRows(j.rows()) = j;
  s.a_known.bottomRows(s.p) = -rc;
  s.e_c = Matrix::Zero(s.n, s.m);
  if (mode == HankelMode::kSynthesis) {
    s.c = s.block * (L - 1);
    s.e_c.block(s.c, 0, s.m, s.m) = Matrix::Identity(s.m, s.m);
  }
  return s;
}

// Finite differences between consecutive lag blocks, rows equilibrated
// against H1. Column c keeps only its diagonal entry.
Matrix initial_transform(const Setup& s, int L) {
  Matrix t = Matrix::Identity(s.n, s.n);
  for (int k = 1; k < L; ++k) {
    t.block(k * s.block, (k - 1) * s.block, s.block, s.block) =
        -Matrix::Identity(s.block, s.block);
  }
  const Matrix th = t * s.h.H1;
  const double cols = std::max<double>(1.0, static_cast<double>(th.cols()));
  for (int i = 0; i < s.n; ++i) {
    const double rms = th.row(i).norm() / std::sqrt(cols);
    if (rms > 0.0) t.row(i) /= rms;
  }
  return t;
}

struct Balanced {
  Matrix t;
  Matrix t_inv;
  Matrix ak;
  Matrix ec;
  Matrix u;
  Matrix n11;
  Matrix n22;  // -N22' >= 0
  // -N22' = w^T w with w = R_a T^T; g = w^{-1} weights the N22 block row so
  // that it reads I - g^T Phi g. -N22' grows with rebalancing while the
  // Lyapunov blocks stay O(1).
  Matrix g;
};

Balanced balance(const Setup& s, const Matrix& t) {
  Balanced b;
  b.t = t;
  b.t_inv = t.partialPivLu().inverse();
  b.ak = t * s.a_known * b.t_inv;
  b.ec = t * s.e_c;
  b.u = t * s.sel.transpose();
  b.n11 = b.u * s.s_clip * b.u.transpose();
  b.n11 = 0.5 * (b.n11 + b.n11.transpose());
  const Matrix w = s.set.weight * t.transpose();
  b.n22 = w.transpose() * w;
  const Matrix ra_inv = s.set.weight.triangularView<Eigen::Upper>().solve(
      Matrix::Identity(s.n, s.n));
  b.g = b.t_inv.transpose() * ra_inv;
  return b;
}

// P Phi P^T = L L^T with the controller rows ordered last, T <- P^T L^{-1} P T.
// The last m columns of L^{-1} only touch the last m rows, so T e_c stays
// supported on the controller rows.
std::optional<Matrix> rebalance(const Setup& s, const Matrix& t, const Matrix& phi) {
  std::vector<int> order;
  for (int i = 0; i < s.n; ++i) {
    if (s.c < 0 || i < s.c || i >= s.c + s.m) order.push_back(i);
  }
  for (int i = 0; i < (s.c < 0 ? 0 : s.m); ++i) order.push_back(s.c + i);
  Matrix perm = Matrix::Zero(s.n, s.n);
  for (int i = 0; i < s.n; ++i) perm(i, order[i]) = 1.0;
  const Matrix phi_p = perm * phi * perm.transpose();
  Eigen::LLT<Matrix> llt(0.5 * (phi_p + phi_p.transpose()));
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix linv = llt.matrixL().solve(Matrix::Identity(s.n, s.n));
  Matrix next = perm.transpose() * linv * perm * t;
  if (!next.allFinite()) return std::nullopt;
  return next;
}

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// [[Phi - A Phi A^T - N11, -A Phi], [-Phi A^T, -Phi - N22]], congruence
// diag(I, g).
Matrix analysis_block(const Matrix& phi, const Balanced& b) {
  const int n = static_cast<int>(phi.rows());
  Matrix f(2 * n, 2 * n);
  const Matrix aphi = b.ak * phi;
  f.topLeftCorner(n, n) = phi - aphi * b.ak.transpose() - b.n11;
  f.topRightCorner(n, n) = -aphi * b.g;
  f.bottomLeftCorner(n, n) = -b.g.transpose() * aphi.transpose();
  f.bottomRightCorner(n, n) = Matrix::Identity(n, n) - b.g.transpose() * phi * b.g;
  return sym(f);
}

// [[Phi - N11, -X, X], [-X^T, -Phi - N22, 0], [X^T, 0, Phi]],  X = A Phi + E D,
// congruence diag(I, g, I).
Matrix full_block(const Matrix& phi, const Matrix& d, const Balanced& b) {
  const int n = static_cast<int>(phi.rows());
  const Matrix x = b.ak * phi + b.ec * d;
  Matrix f = Matrix::Zero(3 * n, 3 * n);
  f.block(0, 0, n, n) = phi - b.n11;
  f.block(0, n, n, n) = -x * b.g;
  f.block(0, 2 * n, n, n) = x;
  f.block(n, 0, n, n) = -b.g.transpose() * x.transpose();
  f.block(n, n, n, n) = Matrix::Identity(n, n) - b.g.transpose() * phi * b.g;
  f.block(2 * n, 0, n, n) = x.transpose();
  f.block(2 * n, 2 * n, n, n) = phi;
  return sym(f);
}

// Pi11' = [[Phi - N11, 0], [0, -N22]]
Matrix pi11(const Matrix& phi, const Balanced& b) {
  const int n = static_cast<int>(phi.rows());
  Matrix f = Matrix::Zero(2 * n, 2 * n);
  f.topLeftCorner(n, n) = phi - b.n11;
  f.bottomRightCorner(n, n) = b.n22;
  return sym(f);
}

// Any basis of the same column space gives the same controller; the second
// block of W is g instead of I.
struct Reduced {
  Matrix w;  // 2n x (2n - m), identity without the controller columns
  Matrix y;  // n x (2n - m), the known columns of Z = [A^T I]
};

Reduced reduced_data(const Setup& s, const Balanced& b) {
  const int n = s.n;
  Reduced r;
  r.w = Matrix::Zero(2 * n, 2 * n - s.m);
  Matrix z = Matrix::Zero(n, 2 * n);
  z.leftCols(n) = b.ak.transpose();
  z.rightCols(n) = Matrix::Identity(n, n);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i >= s.c && i < s.c + s.m) continue;
    r.w(i, col++) = 1.0;
  }
  r.w.bottomRightCorner(n, n) = b.g;
  r.y = z * r.w;
  return r;
}

double alternative_qmi_margin(const Matrix& phi, const Matrix& a, const Balanced& b) {
  const int n = static_cast<int>(phi.rows());
  Matrix z(n, 2 * n);
  z << a.transpose(), Matrix::Identity(n, n);
  return min_eigenvalue(sym(pi11(phi, b) - z.transpose() * phi * z));
}

BalancedCertificate make_certificate(const Setup& s, const Balanced& b,
                                     const Matrix& phi, const Matrix& a_nominal,
                                     double max_condition) {
  BalancedCertificate cert;
  cert.t = b.t;
  cert.t_inv = b.t_inv;
  cert.a_nominal = a_nominal;
  cert.u_unc = b.u;
  cert.phi = phi;
  cert.psi = sym(spd_inverse(phi, max_condition));
  cert.set = s.set;
  return cert;
}

struct Attempt {
  Balanced bal;
  FeasResult res;
  Matrix phi;
};

// Solves in balanced coordinates, rebalancing on the solved Phi. Returns the
// feasible attempt with the largest relative margin, or the last attempt
// when none was feasible.
template <typename Build, typename PhiOf>
std::pair<Attempt, bool> solve_balanced(const Setup& s, int L,
                                        const PipelineOptions& options,
                                        Build build, PhiOf phi_of,
                                        std::vector<std::string>& diag) {
  Matrix t = initial_transform(s, L);
  std::optional<Attempt> feasible;
  Attempt last;
  for (int pass = 0; pass <= options.balance_passes; ++pass) {
    Attempt a;
    a.bal = balance(s, t);
    auto [lmis, num_vars] = build(a.bal);
    a.res = solve_feasibility(lmis, num_vars, options.solver);
    a.phi = phi_of(a.res.x);
    diag.push_back("pass " + std::to_string(pass) + ": " + to_string(a.res.status) +
                   ", margin " + eig_string(a.res.margin) + ", relative " +
                   eig_string(a.res.relative_margin));
    const bool ok = a.res.status == FeasStatus::kFeasible;
    if (ok && (!feasible || a.res.relative_margin > feasible->res.relative_margin)) {
      feasible = a;
    }
    last = a;
    if (!ok && (feasible || a.res.status == FeasStatus::kInfeasible)) break;
    if (pass == options.balance_passes) break;
    auto next = rebalance(s, t, a.phi);
    if (!next) break;
    t = *next;
  }
  if (feasible) return {*feasible, true};
  return {last, false};
}

}  // namespace

StabilityReport analyze_stability(const TimeSeriesData& data,
                                  const NoiseModel& noise, int L,
                                  const PipelineOptions& options) {
  if (data.m() != 0) {
    throw Error(ErrorCode::kPreconditionViolated,
                "stability analysis needs autonomous data (no inputs)");
  }
  const Setup s = make_setup(data, noise, L, HankelMode::kAnalysis);
  StabilityReport rep;
  rep.L = L;
  rep.p = s.p;
  rep.h1_full_rank = true;
  rep.lmi_size = 2 * s.n;
  rep.unknowns = s.n * (s.n + 1) / 2;
  const SymVar phi_var{0, s.n};

  auto build = [&](const Balanced& b) {
    std::vector<AffineLmi> lmis;
    lmis.push_back(linearize(phi_var.count(), [&](const Vector& x) {
      return analysis_block(phi_var.unpack(x), b);
    }, "lyapunov"));
    lmis.push_back(linearize(phi_var.count(), [&](const Vector& x) {
      return phi_var.unpack(x);
    }, "phi"));
    return std::make_pair(lmis, phi_var.count());
  };
  auto phi_of = [&](const Vector& x) { return phi_var.unpack(x); };
  auto [att, ok] = solve_balanced(s, L, options, build, phi_of, rep.diagnostics);

  rep.status = att.res.status;
  rep.lmi_margin = att.res.margin;
  rep.lmi_relative_margin = att.res.relative_margin;
  if (!ok) return rep;

  rep.cert = make_certificate(s, att.bal, att.phi, att.bal.ak, options.max_condition);
  rep.Phi = sym(att.bal.t_inv * att.phi * att.bal.t_inv.transpose());
  rep.Psi = sym(att.bal.t.transpose() * rep.cert.psi * att.bal.t);
  const Vector lam = symmetric_eigenvalues(rep.Phi);
  rep.phi_condition = lam.minCoeff() > 0 ? lam.maxCoeff() / lam.minCoeff()
                                         : std::numeric_limits<double>::infinity();
  rep.informative = true;
  return rep;
}

namespace {

void finish_synthesis(SynthesisResult& r, const Setup& s, const Balanced& b,
                      const Matrix& phi, const Matrix& k, int L,
                      const PipelineOptions& options) {
  const Matrix a_nom = b.ak + b.ec * k;
  r.margins.alternative_qmi = alternative_qmi_margin(phi, a_nom, b);
  if (!(r.margins.alternative_qmi > 0.0)) {
    throw Error(ErrorCode::kCertificateFailed,
                "closed-loop QMI margin " + eig_string(r.margins.alternative_qmi) +
                    " is not positive");
  }
  r.cert = make_certificate(s, b, phi, a_nom, options.max_condition);
  r.C = -k * b.t;
  r.Phi = sym(b.t_inv * phi * b.t_inv.transpose());
  r.D = -r.C * r.Phi;
  r.controller = Controller::FromRow(r.C, L, s.m, s.p);
  const Vector lam = symmetric_eigenvalues(phi);
  r.margins.phi_min_eig = lam.minCoeff();
  r.margins.phi_condition = lam.maxCoeff() / lam.minCoeff();
  r.informative = true;
}

SynthesisResult synthesis_header(const Setup& s, int L, Method method) {
  SynthesisResult r;
  r.method = method;
  r.L = L;
  r.m = s.m;
  r.p = s.p;
  if (s.m < 1) {
    throw Error(ErrorCode::kPreconditionViolated, "synthesis needs at least one input");
  }
  return r;
}

}  // namespace

SynthesisResult synthesize_full(const TimeSeriesData& data,
                                const NoiseModel& noise, int L,
                                const PipelineOptions& options) {
  const Setup s = make_setup(data, noise, L, HankelMode::kSynthesis);
  SynthesisResult r = synthesis_header(s, L, Method::kFull);
  const SymVar phi_var{0, s.n};
  const MatVar d_var{phi_var.count(), s.m, s.n};
  const int num_vars = phi_var.count() + d_var.count();
  r.lmi_sizes = {3 * s.n};
  r.unknowns = num_vars;

  auto build = [&](const Balanced& b) {
    std::vector<AffineLmi> lmis;
    lmis.push_back(linearize(num_vars, [&](const Vector& x) {
      return full_block(phi_var.unpack(x), d_var.unpack(x), b);
    }, "synthesis"));
    return std::make_pair(lmis, num_vars);
  };
  auto phi_of = [&](const Vector& x) { return phi_var.unpack(x); };
  auto [att, ok] = solve_balanced(s, L, options, build, phi_of, r.diagnostics);
  r.status = att.res.status;
  r.margins.lmi = att.res.margin;
  r.margins.lmi_relative = att.res.relative_margin;
  if (!ok) return r;

  const Matrix phi_inv = spd_inverse(att.phi, options.max_condition);
  const Matrix k = d_var.unpack(att.res.x) * phi_inv;
  finish_synthesis(r, s, att.bal, att.phi, k, L, options);
  return r;
}

SynthesisResult synthesize_reduced(const TimeSeriesData& data,
                                   const NoiseModel& noise, int L,
                                   const PipelineOptions& options) {
  const Setup s = make_setup(data, noise, L, HankelMode::kSynthesis);
  SynthesisResult r = synthesis_header(s, L, Method::kReduced);
  const SymVar phi_var{0, s.n};
  const int num_vars = phi_var.count();
  r.lmi_sizes = {s.n, 2 * s.n - s.m};
  r.unknowns = num_vars;

  // The controller rows of A never meet the uncertainty: Nbar e_c = 0.
  {
    const QmiMatrix nbar = build_Nbar(build_N(s.h, noise), s.p);
    const double scale = std::max(spectral_norm(nbar.matrix()), 1e-300);
    const double leak = nbar.matrix().middleCols(s.c, s.m).norm();
    if (leak > 1e-12 * scale) {
      throw Error(ErrorCode::kCertificateFailed,
                  "Nbar e_c != 0 (" + eig_string(leak / scale) + ")");
    }
  }

  auto build = [&](const Balanced& b) {
    const Reduced red = reduced_data(s, b);
    std::vector<AffineLmi> lmis;
    lmis.push_back(linearize(num_vars, [&](const Vector& x) {
      return sym(phi_var.unpack(x) - b.n11);
    }, "phi"));
    lmis.push_back(linearize(num_vars, [&, red](const Vector& x) {
      const Matrix phi = phi_var.unpack(x);
      return sym(red.w.transpose() * pi11(phi, b) * red.w -
                 red.y.transpose() * phi * red.y);
    }, "projected"));
    return std::make_pair(lmis, num_vars);
  };
  auto phi_of = [&](const Vector& x) { return phi_var.unpack(x); };
  auto [att, ok] = solve_balanced(s, L, options, build, phi_of, r.diagnostics);
  r.status = att.res.status;
  r.margins.lmi = att.res.margin;
  r.margins.lmi_relative = att.res.relative_margin;
  if (!ok) return r;

  // Z = Y Delta W^T Pi11,  Delta = (W^T Pi11 W)^{-1}.
  const Balanced& b = att.bal;
  const Reduced red = reduced_data(s, b);
  const Matrix p11 = pi11(att.phi, b);
  const Matrix delta =
      spd_inverse(sym(red.w.transpose() * p11 * red.w), options.max_condition);
  const Matrix z = red.y * delta * red.w.transpose() * p11;
  const double fit = (z * red.w - red.y).norm();
  if (fit > 1e-8 * std::max(red.y.norm(), 1.0)) {
    throw Error(ErrorCode::kCertificateFailed,
                "recovered Z does not interpolate Y (" + eig_string(fit) + ")");
  }
  const Matrix a = z.leftCols(s.n).transpose();
  const Matrix ecc = b.ec.middleRows(s.c, s.m);
  const Matrix k = ecc.partialPivLu().solve(Matrix(a.middleRows(s.c, s.m) -
                                                   b.ak.middleRows(s.c, s.m)));
  finish_synthesis(r, s, b, att.phi, k, L, options);
  return r;
}

namespace {

struct Trial {
  bool pass = false;
  double lyapunov = 0.0;
  double radius = 0.0;
};

Trial run_trial(const BalancedCertificate& cert, const Matrix& root, int k,
                std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(k)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double norm = (k % 10 == 9) ? 1.0 - 1e-3 : (1.0 - 1e-6) * std::pow(unif(rng), 0.25);
  const Matrix s = random_contraction(cert.set.r(), cert.set.p(), norm, rng);
  const Matrix x = cert.set.weight.triangularView<Eigen::Upper>().solve(s * root);
  const Matrix a = cert.a_nominal + cert.u_unc * x.transpose() * cert.t_inv;
  Trial t;
  t.lyapunov = lyapunov_max_eig(a, cert.psi);
  t.radius = spectral_radius(a);
  t.pass = t.lyapunov < -1e-10 && t.radius < 1.0;
  return t;
}

}  // namespace

VerificationReport verify_robust(const BalancedCertificate& cert, int trials,
                                 std::uint64_t seed, bool parallel) {
  if (trials < 0) throw Error(ErrorCode::kPreconditionViolated, "negative trial count");
  if (cert.a_nominal.size() == 0) {
    throw Error(ErrorCode::kPreconditionViolated, "no certificate to verify");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cert.set.schur);
  const Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix root = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  std::vector<Trial> out(trials);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < trials; ++k) out[k] = run_trial(cert, root, k, seed);
  } else {
    for (int k = 0; k < trials; ++k) out[k] = run_trial(cert, root, k, seed);
  }
  VerificationReport rep;
  rep.trials = trials;
  for (const auto& t : out) {
    rep.passed += t.pass ? 1 : 0;
    rep.worst_lyapunov = std::max(rep.worst_lyapunov, t.lyapunov);
    rep.worst_spectral_radius = std::max(rep.worst_spectral_radius, t.radius);
  }
  rep.pass_fraction = trials > 0 ? static_cast<double>(rep.passed) / trials : 1.0;
  return rep;
}

VerificationReport verify_robust(const SynthesisResult& result, int trials,
                                 std::uint64_t seed, bool parallel) {
  if (!result.informative) {
    throw Error(ErrorCode::kPreconditionViolated, "no controller to verify");
  }
  return verify_robust(result.cert, trials, seed, parallel);
}

double closed_loop_radius(const SynthesisResult& result, const Matrix& plant_row) {
  const auto& cert = result.cert;
  const Matrix rc = cert.set.center.transpose();
  if (plant_row.rows() != rc.rows() || plant_row.cols() != rc.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "plant row must be p x qL");
  }
  return spectral_radius(cert.a_nominal + cert.u_unc * (plant_row - rc) * cert.t_inv);
}

}  // namespace arinfo
