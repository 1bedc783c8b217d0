#include "arinfo/datahankel.hpp"

#include <cmath>
#include <sstream>

#include "arinfo/error.hpp"
#include "arinfo/pendulum.hpp"
#include "arinfo/qmi.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace arinfo;
using arinfo::testing::gaussian;

namespace {

// Random strictly proper plant and a trajectory with per-sample noise
// |v(t)|^2 <= eps.
struct Generated {
  ArSystem sys;
  TimeSeriesData data;
  Matrix v;
};

Generated generate(int p, int m, int L, int T, double eps, std::mt19937_64& rng) {
  Generated g;
  g.sys.L = L;
  g.sys.m = m;
  g.sys.p = p;
  for (int i = 0; i < L; ++i) g.sys.P.push_back(gaussian(p, p, rng, 0.3));
  for (int i = 0; i < L; ++i) g.sys.Q.push_back(gaussian(p, m, rng));
  g.sys.Q.push_back(Matrix::Zero(p, m));
  const int n = T - L + 1;
  g.v = gaussian(p, n, rng);
  for (int t = 0; t < n; ++t) g.v.col(t) *= std::sqrt(eps) * 0.9 / g.v.col(t).norm();
  g.data.u = gaussian(m, T + 1, rng);
  g.data.y = simulate(g.sys, g.data.u, g.v, gaussian(p, L, rng));
  return g;
}

}  // namespace

TEST(NoiseModels, AllInPiClass) {
  const int p = 2, n = 7;
  Matrix bound = Matrix::Identity(2, 2);
  EXPECT_TRUE(in_pi_class(noise_energy(p, n, SymMatrix(bound)).pi).member());
  EXPECT_TRUE(in_pi_class(noise_per_sample(p, n, 0.1).pi).member());
  EXPECT_TRUE(in_pi_class(noise_per_sample_aggregate(p, n, 0.1).pi).member());
  EXPECT_TRUE(in_pi_class(noise_exact(p, n).pi).member());
  const NoiseModel cov = noise_covariance(p, n, SymMatrix(bound));
  EXPECT_TRUE(in_pi_class(cov.pi).member());
  EXPECT_TRUE(cov.regularized);
  EXPECT_LT(max_eigenvalue(cov.pi.p22()), 0.0);
}

TEST(NoiseModels, ExactAdmitsOnlyZero) {
  const NoiseModel e = noise_exact(2, 4);
  EXPECT_TRUE(member_zr(Matrix::Zero(4, 2), e.pi, false));
  Matrix v = Matrix::Zero(4, 2);
  v(1, 0) = 1e-6;
  EXPECT_FALSE(member_zr(v, e.pi, false));
}

TEST(NoiseModels, PerSampleAdmitsBoundedColumns) {
  std::mt19937_64 rng(1);
  const int p = 2, n = 9;
  const double eps = 0.3;
  const NoiseModel model = noise_per_sample(p, n, eps);
  for (int k = 0; k < 50; ++k) {
    Matrix v = gaussian(p, n, rng);
    for (int t = 0; t < n; ++t) v.col(t) *= std::sqrt(eps) / v.col(t).norm();
    EXPECT_TRUE(member_zr(v.transpose(), model.pi, false, 1e-12));
  }
}

TEST(NoiseModels, PendulumAggregateEps) {
  const double delta = 0.01;
  const NoiseModel m = noise_per_sample_aggregate(2, 19, 1e-2 * std::pow(delta, 4));
  EXPECT_LE((m.pi.p11() - 1e-10 * Matrix::Identity(2, 2)).norm(), 1e-24);
}

TEST(NoiseModels, RejectBadParameters) {
  EXPECT_THROW(noise_per_sample(2, 3, -1.0), Error);
  Matrix bad = Eigen::Vector2d(1, -1).asDiagonal();
  EXPECT_THROW(noise_energy(2, 3, SymMatrix(bad)), Error);
}

TEST(Hankel, ConstantSignal) {
  TimeSeriesData d{Matrix::Constant(1, 6, 2.0), Matrix::Constant(1, 6, 3.0)};
  const HankelPair h = hankel(d, 2, HankelMode::kSynthesis);
  EXPECT_EQ(h.H1.rows(), 4);
  EXPECT_EQ(h.H2.rows(), 1);
  EXPECT_EQ(h.columns(), 4);
  for (int j = 1; j < h.columns(); ++j) EXPECT_EQ(h.H1.col(j), h.H1.col(0));
  EXPECT_FALSE(full_row_rank(h.H1));
}

TEST(Hankel, SingleColumnWhenTEqualsL) {
  std::mt19937_64 rng(2);
  TimeSeriesData d{Matrix(0, 3), gaussian(2, 3, rng)};
  const HankelPair h = hankel(d, 2, HankelMode::kAnalysis);
  EXPECT_EQ(h.columns(), 1);
  EXPECT_EQ(h.H1.rows(), 4);
  EXPECT_EQ(h.H2.col(0), d.y.col(2));
  TimeSeriesData shorter{Matrix(0, 2), gaussian(2, 2, rng)};
  EXPECT_THROW(hankel(shorter, 2, HankelMode::kAnalysis), Error);
}

TEST(Hankel, AnalysisLayoutWithInputs) {
  std::mt19937_64 rng(3);
  TimeSeriesData d{gaussian(1, 8, rng), gaussian(2, 8, rng)};
  const HankelPair h = hankel(d, 2, HankelMode::kAnalysis);
  EXPECT_EQ(h.H1.rows(), 3 * 2 + 1);  // qL + m
  EXPECT_EQ(h.H2.rows(), 2);
  // column t: u(t) y(t) u(t+1) y(t+1) u(t+2) | y(t+2)
  EXPECT_EQ(h.H1(6, 1), d.u(0, 3));
  EXPECT_EQ(h.H2.col(1), d.y.col(3));
}

TEST(Hankel, PendulumShape) {
  const auto f = pendulum::fixture("paper-A");
  const HankelPair h = hankel(f.data, 2, HankelMode::kSynthesis);
  EXPECT_EQ(h.H1.rows() + h.H2.rows(), 8);
  EXPECT_EQ(h.columns(), 19);
  EXPECT_TRUE(full_row_rank(h.H1));
}

TEST(FullRowRank, Examples) {
  EXPECT_TRUE(full_row_rank(Matrix::Identity(3, 3)));
  Matrix r(2, 3);
  r << 1, 2, 3, 1, 2, 3;
  EXPECT_FALSE(full_row_rank(r));
}

TEST(BuildN, GeneratorIsExactlyCompatible) {
  std::mt19937_64 rng(4);
  Generated g = generate(2, 1, 2, 20, 0.0, rng);
  g.data.y = simulate(g.sys, g.data.u, Matrix::Zero(2, 19), g.data.y.leftCols(2));
  const HankelPair h = hankel(g.data, 2, HankelMode::kSynthesis);
  const NoiseModel e = noise_exact(2, h.columns());
  const QmiMatrix n = build_N(h, e);
  const Matrix r = flatten(g.sys, true).R;
  const Matrix val = qmi_value(r.transpose(), n);
  EXPECT_LE(val.norm(), 1e-10 * n.matrix().norm());
  EXPECT_TRUE(member_zr(r.transpose(), n, false, 1e-10 * n.matrix().norm()));
}

TEST(BuildN, TrueSystemAlwaysCompatible) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const double eps = 1e-3;
    const Generated g = generate(2, 1, 2, 20, eps, rng);
    const HankelPair h = hankel(g.data, 2, HankelMode::kSynthesis);
    const NoiseModel model = noise_per_sample_aggregate(2, h.columns(), eps * h.columns());
    const auto rep = is_compatible(flatten(g.sys, true).R, h, model);
    EXPECT_TRUE(rep.compatible);
    const QmiMatrix n = build_N(h, model);
    EXPECT_TRUE(in_pi_class(n).member());
    EXPECT_LT(max_eigenvalue(n.p22()), 0.0);
    EXPECT_TRUE(compatible_set(h, model).nonempty());
  }
}

TEST(BuildN, LargePerturbationIsRejected) {
  std::mt19937_64 rng(6);
  const Generated g = generate(2, 1, 2, 20, 1e-8, rng);
  const HankelPair h = hankel(g.data, 2, HankelMode::kSynthesis);
  const NoiseModel model = noise_per_sample_aggregate(2, h.columns(), 1e-6);
  Matrix r = flatten(g.sys, true).R + Matrix::Constant(2, 6, 10.0);
  EXPECT_FALSE(is_compatible(r, h, model).compatible);
}

TEST(BuildNbar, EmbeddingPattern) {
  const int p = 1, r = 2;
  const QmiMatrix n(SymMatrix::Identity(p + r), p);
  const QmiMatrix nb = build_Nbar(n, p);
  EXPECT_EQ(nb.q(), r);
  EXPECT_EQ(nb.r(), r);
  Matrix expect = Matrix::Zero(4, 4);
  expect(1, 1) = 1.0;  // sel^T I sel with sel = [0 -1]
  expect(2, 2) = 1.0;
  expect(3, 3) = 1.0;
  EXPECT_EQ(nb.matrix(), expect);
  EXPECT_EQ(output_selector(2, 4), (Matrix(2, 4) << 0, 0, -1, 0, 0, 0, 0, -1).finished());
}

TEST(BuildNbar, PendulumSize) {
  const auto f = pendulum::fixture("paper-A");
  const HankelPair h = hankel(f.data, 2, HankelMode::kSynthesis);
  const QmiMatrix nb = build_Nbar(build_N(h, f.noise()), 2);
  EXPECT_EQ(nb.full().dim(), 12);
}

TEST(BuildNbar, SelectorProjectionEquality) {
  // Z(N) sel = Z(Nbar) sampled in both directions for p = 1, L = 2.
  std::mt19937_64 rng(7);
  const ArSystem sys = oracle::stable_autonomous(1, 2, 0.8, rng);
  const Matrix v = gaussian(1, 12, rng, 0.05);
  TimeSeriesData d{Matrix(0, 14), simulate(sys, Matrix(0, 0), v, gaussian(1, 2, rng))};
  const HankelPair h = hankel(d, 2, HankelMode::kAnalysis);
  const QmiMatrix n = build_N(h, noise_per_sample_aggregate(1, h.columns(), 0.05));
  const Matrix sel = output_selector(1, 2);
  const QmiMatrix nb = build_Nbar(n, 1);
  ASSERT_TRUE(nonempty(n, true));
  int bad = 0;
  for (int k = 0; k < 100; ++k) {
    const Matrix z = parametrize_strict(n, oracle::contraction(2, 1, rng, k), Matrix::Zero(2, 1));
    const Matrix zs = z * sel;
    if (!member_zr(zs, nb, false, oracle::qmi_tol(nb, zs))) ++bad;
    // backward: nonstrict members of Nbar built from its own center and
    // Schur root (the strict set is empty) must factor as Z sel, Z in Z(N)
    const Matrix s = oracle::contraction(2, 2, rng, k);
    const Matrix zb = qmi_center(nb) + oracle::sym_power(-nb.p22(), -0.5) * s *
                                          psd_sqrt(schur_complement(nb)).matrix();
    const Matrix lifted = -zb.rightCols(1);
    if ((lifted * sel - zb).norm() > 1e-9 * std::max(1.0, zb.norm()) ||
        !member_zr(lifted, n, false, oracle::qmi_tol(n, lifted)))
      ++bad;
  }
  EXPECT_EQ(bad, 0);
  // A matrix outside the selector pattern is not in Z(Nbar) (first column nonzero).
  Matrix off = Matrix::Zero(2, 2);
  off(0, 0) = 1e3;
  EXPECT_FALSE(member_zr(off, nb, false));
}

TEST(IsCompatible, TwoRoutesAgree) {
  std::mt19937_64 rng(8);
  EXPECT_LE(oracle::two_route_worst(rng, 50), 1e-10);
}

TEST(IsCompatible, ExactNoiseRejectsPerturbation) {
  std::mt19937_64 rng(9);
  Generated g = generate(1, 1, 1, 10, 0.0, rng);
  g.data.y = simulate(g.sys, g.data.u, Matrix::Zero(1, 10), g.data.y.leftCols(1));
  const HankelPair h = hankel(g.data, 1, HankelMode::kSynthesis);
  const NoiseModel e = noise_exact(1, h.columns());
  const Matrix r = flatten(g.sys, true).R;
  EXPECT_TRUE(is_compatible(r, h, e, 1e-12).compatible);
  EXPECT_FALSE(is_compatible(r + Matrix::Constant(1, 2, 1e-3), h, e, 1e-12).compatible);
}

TEST(CompatibleSet, MembersSatisfyTheQmi) {
  std::mt19937_64 rng(10);
  const Generated g = generate(2, 1, 2, 20, 1e-3, rng);
  const HankelPair h = hankel(g.data, 2, HankelMode::kSynthesis);
  const NoiseModel model = noise_per_sample_aggregate(2, h.columns(), 0.02);
  const CompatibleSet set = compatible_set(h, model);
  ASSERT_TRUE(set.nonempty());
  const QmiMatrix n = build_N(h, model);
  // -N22 = W^T W and the center is the least-squares fit
  EXPECT_LE((set.weight.transpose() * set.weight + n.p22()).norm(), 1e-9 * n.p22().norm());
  EXPECT_LE((set.center - qmi_center(n)).norm(), 1e-8 * std::max(1.0, set.center.norm()));
  for (int k = 0; k < 50; ++k) {
    const Matrix z = compatible_member(set, oracle::contraction(6, 2, rng, k));
    EXPECT_TRUE(member_zr(z, n, false, oracle::qmi_tol(n, z)));
    EXPECT_TRUE(is_compatible(z.transpose(), h, model, 1e-10).compatible);
  }
}

TEST(CompatibleSet, RankDeficientDataThrows) {
  TimeSeriesData d{Matrix::Constant(1, 12, 1.0), Matrix::Constant(1, 12, 2.0)};
  const HankelPair h = hankel(d, 2, HankelMode::kSynthesis);
  try {
    compatible_set(h, noise_exact(1, h.columns()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficientHankel);
  }
}

TEST(Csv, RoundTripWithMissingInput) {
  std::mt19937_64 rng(11);
  TimeSeriesData d{gaussian(1, 5, rng), gaussian(2, 5, rng)};
  d.u(0, 4) = std::nan("");
  std::stringstream ss;
  write_csv(ss, d);
  const TimeSeriesData back = read_csv(ss);
  EXPECT_EQ(back.m(), 1);
  EXPECT_EQ(back.p(), 2);
  EXPECT_TRUE(std::isnan(back.u(0, 4)));
  EXPECT_EQ(back.u.leftCols(4), d.u.leftCols(4));
  EXPECT_EQ(back.y, d.y);
}

TEST(Csv, MalformedInputThrows) {
  for (const char* text : {"t,u1,y1\n0,1\n", "x,y\n0,1\n", "t,u1,y1\n0,abc,1\n",
                           "t,y1\n0,1,2\n", ""}) {
    std::stringstream ss(text);
    EXPECT_THROW(read_csv(ss), Error) << text;
  }
}

TEST(Csv, FixtureFilesMatchEmbeddedTables) {
  for (const auto& [file, name] : {std::pair{"paper_a.csv", "paper-A"},
                                   std::pair{"paper_b.csv", "paper-B"}}) {
    const TimeSeriesData d = read_csv_file(std::string(ARINFO_DATA_DIR) + "/" + file);
    const auto f = pendulum::fixture(name);
    EXPECT_EQ(d.y, f.data.y) << file;
    EXPECT_EQ(d.u.leftCols(20), f.data.u.leftCols(20)) << file;
    EXPECT_TRUE(std::isnan(d.u(0, 20)));
  }
}
