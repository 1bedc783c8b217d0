#include "arinfo/sdpfeas.hpp"

#include <sstream>

#include "arinfo/error.hpp"
#include "test_util.hpp"

using namespace arinfo;
using arinfo::testing::gaussian;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Independent certification: re-assemble every LMI and check its spectrum.
double certified_margin(const std::vector<AffineLmi>& lmis, const Vector& x) {
  double worst = INFINITY;
  for (const auto& l : lmis) {
    Matrix f = l.constant;
    for (const auto& [id, b] : l.basis) f += x(id) * b;
    Eigen::SelfAdjointEigenSolver<Matrix> es(f);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

// Lyapunov LMIs for x(t+1) = A x(t): P > 0, P - A^T P A > 0.
// With normalized set, P >= I replaces P > 0. Both describe the same cone up
// to scaling, but only the normalized form has a strictly negative optimal
// margin when no P exists.
std::vector<AffineLmi> lyapunov_lmis(const Matrix& a, bool normalized = false) {
  const int n = static_cast<int>(a.rows());
  const SymVar p{0, n};
  const Matrix shift = (normalized ? 1.0 : 0.0) * Matrix::Identity(n, n);
  auto pos = [&](const Vector& x) { return Matrix(p.unpack(x) - shift); };
  auto dec = [&](const Vector& x) {
    const Matrix pp = p.unpack(x);
    return Matrix(pp - a.transpose() * pp * a);
  };
  return {linearize(p.count(), pos, "P"), linearize(p.count(), dec, "decrease")};
}

}  // namespace

TEST(SymVar, UnpackLayout) {
  const SymVar v{2, 3};
  EXPECT_EQ(v.count(), 6);
  Vector x = Vector::LinSpaced(8, 0, 7);
  const Matrix m = v.unpack(x);
  EXPECT_EQ(m(0, 0), 2);
  EXPECT_EQ(m(0, 1), 3);
  EXPECT_EQ(m(1, 0), 3);
  EXPECT_EQ(m(1, 1), 5);
  EXPECT_EQ(m(2, 2), 7);
}

TEST(MatVar, UnpackColumnMajor) {
  const MatVar v{1, 2, 2};
  Vector x = Vector::LinSpaced(5, 0, 4);
  const Matrix m = v.unpack(x);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(1, 0), 2);
  EXPECT_EQ(m(0, 1), 3);
}

TEST(Linearize, ExactForAffineMaps) {
  std::mt19937_64 rng(1);
  const Matrix a = gaussian(3, 3, rng);
  const auto lmis = lyapunov_lmis(a);
  const Vector x = gaussian(6, 1, rng);
  const Matrix p = SymVar{0, 3}.unpack(x);
  EXPECT_LE((lmis[1].evaluate(x) - (p - a.transpose() * p * a)).norm(), 1e-12);
}

TEST(SolveFeasibility, ScalarPositive) {
  const std::vector<AffineLmi> lmis{{1, Matrix::Zero(1, 1), {{0, scalar(1.0)}}, "x"}};
  const FeasResult r = solve_feasibility(lmis, 1);
  ASSERT_EQ(r.status, FeasStatus::kFeasible);
  EXPECT_GT(r.x(0), 0.0);
  EXPECT_GT(r.margin, 0.0);
}

TEST(SolveFeasibility, ConstantNegativeIsInfeasible) {
  const std::vector<AffineLmi> lmis{{1, scalar(-1.0), {}, "const"}};
  EXPECT_EQ(solve_feasibility(lmis, 0).status, FeasStatus::kInfeasible);
}

TEST(SolveFeasibility, ScalarLyapunov) {
  const auto stable = lyapunov_lmis(scalar(0.5));
  const FeasResult r = solve_feasibility(stable, 1);
  ASSERT_EQ(r.status, FeasStatus::kFeasible);
  EXPECT_GT(certified_margin(stable, r.x), 0.0);
  // homogeneous form: the optimal margin is exactly 0 at P = 0
  EXPECT_NE(solve_feasibility(lyapunov_lmis(scalar(2.0)), 1).status, FeasStatus::kFeasible);
  EXPECT_EQ(solve_feasibility(lyapunov_lmis(scalar(2.0), true), 1).status,
            FeasStatus::kInfeasible);
  EXPECT_EQ(solve_feasibility(lyapunov_lmis(scalar(0.5), true), 1).status,
            FeasStatus::kFeasible);
}

TEST(SolveFeasibility, FeasibleAnswersAreCertified) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    Matrix a = gaussian(4, 4, rng);
    a *= (k % 2 ? 0.9 : 1.1) / spectral_radius(a);
    const auto lmis = lyapunov_lmis(a);
    const FeasResult r = solve_feasibility(lmis, 10);
    if (k % 2) {
      ASSERT_EQ(r.status, FeasStatus::kFeasible);
      double worst = INFINITY;
      for (const auto& l : lmis) {
        const Matrix f = l.evaluate(r.x);
        worst = std::min(worst, min_eigenvalue(f) / std::max(l.constant.norm(), f.norm()));
      }
      EXPECT_GT(worst, FeasOptions{}.eps);
      EXPECT_NEAR(certified_margin(lmis, r.x), r.margin, 1e-9 * std::max(1.0, r.x.norm()));
    } else {
      EXPECT_NE(r.status, FeasStatus::kFeasible);
    }
  }
}

TEST(SolveFeasibility, ScaleEquivariance) {
  std::mt19937_64 rng(3);
  Matrix a = gaussian(3, 3, rng);
  a *= 0.95 / spectral_radius(a);
  auto lmis = lyapunov_lmis(a);
  const FeasResult base = solve_feasibility(lmis, 6);
  for (double s : {1e-6, 1e3}) {
    auto scaled = lmis;
    for (auto& l : scaled) {
      l.constant *= s;
      for (auto& [id, b] : l.basis) b *= s;
    }
    EXPECT_EQ(solve_feasibility(scaled, 6).status, base.status) << s;
  }
}

TEST(SolveFeasibility, Deterministic) {
  std::mt19937_64 rng(4);
  Matrix a = gaussian(3, 3, rng);
  a *= 0.8 / spectral_radius(a);
  const auto lmis = lyapunov_lmis(a);
  const FeasResult r1 = solve_feasibility(lmis, 6);
  const FeasResult r2 = solve_feasibility(lmis, 6);
  EXPECT_EQ(r1.x, r2.x);
  FeasOptions par;
  par.parallel = true;
  const FeasResult r3 = solve_feasibility(lmis, 6, par);
  EXPECT_EQ(r3.status, r1.status);
  EXPECT_LE((r3.x - r1.x).norm(), 1e-8 * std::max(1.0, r1.x.norm()));
}

TEST(SolveFeasibility, MalformedProblems) {
  EXPECT_THROW(solve_feasibility({}, 1), Error);
  const std::vector<AffineLmi> bad_id{{1, Matrix::Zero(1, 1), {{3, scalar(1.0)}}, "x"}};
  EXPECT_THROW(solve_feasibility(bad_id, 1), Error);
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  const std::vector<AffineLmi> bad_sym{{2, asym, {}, "asym"}};
  EXPECT_THROW(solve_feasibility(bad_sym, 0), Error);
  const std::vector<AffineLmi> bad_dim{{2, Matrix::Zero(1, 1), {}, "dim"}};
  EXPECT_THROW(solve_feasibility(bad_dim, 0), Error);
}

TEST(DumpTriplets, ListsUpperTriangle) {
  Matrix c(2, 2);
  c << 1, 2, 2, 0;
  const std::vector<AffineLmi> lmis{{2, c, {{0, Matrix::Identity(2, 2)}}, "f"}};
  std::ostringstream os;
  dump_triplets(os, lmis);
  const std::string s = os.str();
  EXPECT_NE(s.find("0 0 0 -1 1"), std::string::npos);
  EXPECT_NE(s.find("0 0 1 -1 2"), std::string::npos);
  EXPECT_NE(s.find("0 1 1 0 1"), std::string::npos);
  std::istringstream in(s);
  int lmi, i, j, var, lines = 0;
  double v;
  while (in >> lmi >> i >> j >> var >> v) {
    EXPECT_LE(i, j);
    EXPECT_NE(v, 0.0);
    ++lines;
  }
  EXPECT_EQ(lines, 4);
}

TEST(AccumulateBlock, SerialAndParallelAgree) {
  std::mt19937_64 rng(5);
  const int n = 12, k = 30;
  const Matrix g = gaussian(n, n, rng);
  const Matrix ginv = (g * g.transpose() + Matrix::Identity(n, n)).inverse();
  std::vector<Matrix> store;
  for (int i = 0; i < k; ++i) {
    const Matrix b = gaussian(n, n, rng);
    store.push_back(b + b.transpose());
  }
  std::vector<const Matrix*> bases;
  std::vector<int> vars;
  for (int i = 0; i < k; ++i) {
    bases.push_back(&store[i]);
    vars.push_back((7 * i) % k);
  }
  Vector g1 = Vector::Zero(k), g2 = Vector::Zero(k);
  Matrix h1 = Matrix::Zero(k, k), h2 = Matrix::Zero(k, k);
  accumulate_block_serial(ginv, bases, vars, g1, h1);
  accumulate_block_parallel(ginv, bases, vars, g2, h2);
  EXPECT_LE((g1 - g2).norm(), 1e-12 * g1.norm());
  EXPECT_LE((h1 - h2).norm(), 1e-12 * h1.norm());
  // spot check against the definition
  const Matrix m0 = ginv * store[0], m1 = ginv * store[1];
  EXPECT_NEAR(h1(vars[0], vars[1]), (m0 * m1).trace(), 1e-9 * std::abs((m0 * m1).trace()) + 1e-12);
  EXPECT_NEAR(g1(vars[0]), -m0.trace(), 1e-9 * std::abs(m0.trace()) + 1e-12);
}
