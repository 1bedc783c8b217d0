#include "arinfo/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "arinfo/sdpfeas.hpp"

namespace arinfo::pendulum {

void PendulumParams::validate() const {
  const bool finite = std::isfinite(M) && std::isfinite(m) && std::isfinite(b) &&
                      std::isfinite(g) && std::isfinite(l) && std::isfinite(delta);
  if (!finite) throw Error(ErrorCode::kNonFinite, "pendulum parameters");
  if (!(M > 0 && m > 0 && l > 0 && delta > 0)) {
    throw Error(ErrorCode::kPreconditionViolated, "M, m, l, delta must be positive");
  }
}

ArSystem linearized_system(const PendulumParams& p, GravityEntry entry) {
  p.validate();
  const double d = p.delta;
  const double grav = entry == GravityEntry::kDerived
                          ? d * d * p.g * (p.M + p.m) / (p.M * p.l)
                          : d * d * p.g * (p.M + p.m) / p.M;
  ArSystem sys;
  sys.L = 2;
  sys.m = 1;
  sys.p = 2;
  Matrix p0(2, 2), p1(2, 2), q0(2, 1);
  p1 << -2.0 + d * p.b / p.M, 0.0,
        d * p.b / (p.M * p.l), -2.0;
  p0 << 1.0 - d * p.b / p.M, -d * d * p.g * p.m / p.M,
        -d * p.b / (p.M * p.l), 1.0 - grav;
  q0 << d * d / p.M, d * d / (p.M * p.l);
  sys.P = {p0, p1};
  sys.Q = {q0, Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  return sys;
}

Eigen::Vector2d nonlinear_step(const PendulumState& s, double u,
                               const PendulumParams& p) {
  if (!s.prev.allFinite() || !s.curr.allFinite() || !std::isfinite(u)) {
    throw Error(ErrorCode::kNonFinite, "pendulum state");
  }
  const double d = p.delta;
  const double phi = s.prev(1);
  const double xdot = (s.curr(0) - s.prev(0)) / d;
  const double phidot = (s.curr(1) - s.prev(1)) / d;
  const double c = std::cos(phi), sn = std::sin(phi);
  // [[M+m, -m l cos], [-cos, l]] (xdd, phidd) = rhs
  const double a11 = p.M + p.m, a12 = -p.m * p.l * c, a21 = -c, a22 = p.l;
  const double det = a11 * a22 - a12 * a21;  // l (M + m sin^2)
  if (!(std::abs(det) > 1e-12 * std::abs(a11 * a22))) {
    throw Error(ErrorCode::kSingularMassMatrix, "mass matrix determinant " +
                                                    std::to_string(det));
  }
  const double r1 = u - p.b * xdot - p.m * p.l * phidot * phidot * sn;
  const double r2 = p.g * sn;
  const double xdd = (a22 * r1 - a12 * r2) / det;
  const double phidd = (a11 * r2 - a21 * r1) / det;
  return 2.0 * s.curr - s.prev + d * d * Eigen::Vector2d(xdd, phidd);
}

Matrix step_jacobian(const PendulumParams& p, double h) {
  p.validate();
  Matrix jac(2, 5);
  for (int k = 0; k < 5; ++k) {
    auto eval = [&](double step) {
      Eigen::Matrix<double, 5, 1> z = Eigen::Matrix<double, 5, 1>::Zero();
      z(k) = step;
      PendulumState s;
      s.prev = z.head<2>();
      s.curr = z.segment<2>(2);
      return nonlinear_step(s, z(4), p);
    };
    jac.col(k) = (eval(h) - eval(-h)) / (2.0 * h);
  }
  return jac;
}

Matrix linear_step_matrix(const ArSystem& sys) {
  Matrix out(sys.p, sys.p * sys.L + sys.m);
  for (int i = 0; i < sys.L; ++i) out.block(0, i * sys.p, sys.p, sys.p) = -sys.P[i];
  out.rightCols(sys.m) = sys.Q[0];
  return out;
}

NoiseModel Fixture::noise() const {
  return noise_per_sample_aggregate(data.p(), data.T() - 1, eps);
}

NoiseModel Experiment::noise() const {
  return noise_per_sample_aggregate(data.p(), data.T() - 1, eps);
}

namespace {

constexpr double kDelta4 = 1e-8;  // delta^4 at delta = 0.01

// Measurement tables, 4 decimals. Row 0 is x, row 1 is phi.
const double kYA[2][21] = {
    {0.1000, 0.1010, 0.1020, 0.1029, 0.1039, 0.1050, 0.1061, 0.1072, 0.1084, 0.1096, 0.1108,
     0.1121, 0.1134, 0.1149, 0.1165, 0.1182, 0.1200, 0.1219, 0.1238, 0.1258, 0.1277},
    {0.1000, 0.0990, 0.0981, 0.0974, 0.0969, 0.0969, 0.0970, 0.0974, 0.0982, 0.0991, 0.1003,
     0.1017, 0.1035, 0.1058, 0.1085, 0.1116, 0.1153, 0.1192, 0.1235, 0.1279, 0.1327}};
const double kUA[20] = {-0.9960, -0.7388, -0.6322, 0.6612, -0.8090, -0.2520, 0.1023,
                        -0.7179, -0.0428, -0.8528, 0.4309, 0.6413, 0.6225, 0.2019,
                        0.7475, -0.1559, -0.5855, -0.7585, -0.3562, -0.6643};
const double kYB[2][21] = {
    {0.1000, 0.1010, 0.1020, 0.1029, 0.1040, 0.1050, 0.1061, 0.1070, 0.1081, 0.1090, 0.1100,
     0.1111, 0.1121, 0.1132, 0.1143, 0.1155, 0.1167, 0.1180, 0.1192, 0.1205, 0.1218},
    {0.0400, 0.0390, 0.0380, 0.0371, 0.0364, 0.0358, 0.0353, 0.0347, 0.0342, 0.0337, 0.0333,
     0.0332, 0.0331, 0.0330, 0.0332, 0.0336, 0.0340, 0.0346, 0.0352, 0.0361, 0.0370}};
const double kUB[20] = {-0.6358, -0.2516, 0.6150, -0.1941, -0.4534, -0.8523, 0.1926,
                        -0.6554, -0.0237, 0.3687, -0.0440, -0.2577, 0.3739, 0.5910,
                        -0.1870, 0.2488, -0.6610, 0.7050, -0.3602, 0.1016};

Fixture table_fixture(const std::string& name, const double (&y)[2][21],
                      const double (&u)[20], double eps) {
  Fixture f;
  f.name = name;
  f.eps = eps;
  f.data.y.resize(2, 21);
  f.data.u.resize(1, 21);
  for (int t = 0; t < 21; ++t) {
    f.data.y(0, t) = y[0][t];
    f.data.y(1, t) = y[1][t];
    f.data.u(0, t) = t < 20 ? u[t] : std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"paper-A", "paper-B", "paper-A-recon", "paper-B-recon"};
}

Fixture fixture(const std::string& name) {
  if (name == "paper-A") return table_fixture(name, kYA, kUA, 1e-2 * kDelta4);
  if (name == "paper-B") return table_fixture(name, kYB, kUB, 1e-4 * kDelta4);
  if (name == "paper-A-recon" || name == "paper-B-recon") {
    static std::mutex mu;
    static std::map<std::string, Fixture> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    Fixture base = fixture(name.substr(0, 7));
    Fixture out = base;
    out.name = name;
    out.data = reconstruct(base).data;
    cache.emplace(name, out);
    return out;
  }
  throw Error(ErrorCode::kPreconditionViolated, "unknown fixture '" + name + "'");
}

Reconstruction reconstruct(const Fixture& table, const PendulumParams& p, double shrink) {
  const ArSystem sys = linearized_system(p);
  const TimeSeriesData& d = table.data;
  const int T = d.T();
  const int cols = T - 1;  // noise samples
  if (d.p() != 2 || d.m() != 1 || cols < 1) {
    throw Error(ErrorCode::kShapeMismatch, "pendulum table must be 2 outputs, 1 input");
  }
  const double vscale = std::sqrt(shrink * table.eps);
  // x = (offsets of y(0), y(1) from the table; Vt), V = vscale * Vt.
  const int nv = 4 + 2 * cols;
  auto trajectory = [&](const Vector& x) {
    Matrix init(2, 2);
    init << d.y(0, 0) + x(0), d.y(0, 1) + x(2),
            d.y(1, 0) + x(1), d.y(1, 1) + x(3);
    Matrix v(2, cols);
    for (int j = 0; j < cols; ++j) v.col(j) = vscale * x.segment<2>(4 + 2 * j);
    return simulate(sys, d.u.leftCols(T), v, init);
  };
  // Residuals y_sim - table, affine in x.
  const Matrix base = trajectory(Vector::Zero(nv)) - d.y;
  std::vector<Matrix> grads;
  for (int i = 0; i < nv; ++i) {
    Vector e = Vector::Zero(nv);
    e(i) = 1.0;
    grads.push_back(trajectory(e) - d.y - base);
  }
  auto build = [&](double s) {
    std::vector<AffineLmi> lmis;
    for (int t = 0; t < T + 1; ++t) {
      for (int r = 0; r < 2; ++r) {
        for (int sign : {1, -1}) {
          AffineLmi l;
          l.dim = 1;
          l.constant = Matrix::Constant(1, 1, s - sign * base(r, t));
          for (int i = 0; i < nv; ++i) {
            const double c = -sign * grads[i](r, t);
            if (c != 0.0) l.basis.emplace_back(i, Matrix::Constant(1, 1, c));
          }
          lmis.push_back(std::move(l));
        }
      }
    }
    // [[I_2, Vt], [Vt^T, I]] >= 0
    AffineLmi ball;
    ball.dim = 2 + cols;
    ball.name = "noise";
    ball.constant = Matrix::Identity(ball.dim, ball.dim);
    for (int j = 0; j < cols; ++j) {
      for (int r = 0; r < 2; ++r) {
        Matrix b = Matrix::Zero(ball.dim, ball.dim);
        b(r, 2 + j) = b(2 + j, r) = 1.0;
        ball.basis.emplace_back(4 + 2 * j + r, b);
      }
    }
    lmis.push_back(std::move(ball));
    return lmis;
  };

  FeasOptions opt;
  double lo = 0.0, hi = 5e-5;
  FeasResult best = solve_feasibility(build(hi), nv, opt);
  if (best.status != FeasStatus::kFeasible) {
    throw Error(ErrorCode::kIncompatibleData,
                "no admissible trajectory within 5e-5 of the table");
  }
  for (int it = 0; it < 14; ++it) {
    const double mid = 0.5 * (lo + hi);
    FeasResult r = solve_feasibility(build(mid), nv, opt);
    if (r.status == FeasStatus::kFeasible) {
      hi = mid;
      best = r;
    } else {
      lo = mid;
    }
  }
  Reconstruction out;
  out.data = d;
  out.data.y = trajectory(best.x);
  Matrix v(2, cols);
  for (int j = 0; j < cols; ++j) v.col(j) = vscale * best.x.segment<2>(4 + 2 * j);
  out.V = v;
  out.max_deviation = (out.data.y - d.y).cwiseAbs().maxCoeff();
  out.noise_ratio = max_eigenvalue(v * v.transpose()) / table.eps;
  return out;
}

Experiment experiment(ExperimentKind kind, std::uint64_t seed, const PendulumParams& p,
                      const PendulumState& init) {
  p.validate();
  constexpr int T = 20;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Experiment e;
  e.data.u.resize(1, T + 1);
  for (int t = 0; t < T; ++t) e.data.u(0, t) = unif(rng);
  e.data.u(0, T) = std::numeric_limits<double>::quiet_NaN();
  const ArSystem sys = linearized_system(p);
  const double d4 = std::pow(p.delta, 4);
  Matrix y(2, T + 1);
  y.col(0) = init.prev;
  y.col(1) = init.curr;
  if (kind == ExperimentKind::kLinearized) {
    e.eps = 1e-2 * d4;
    Matrix v(2, T - 1);
    for (int j = 0; j < v.cols(); ++j)
      for (int r = 0; r < 2; ++r) v(r, j) = unif(rng);
    v *= std::sqrt(0.9 * e.eps / max_eigenvalue(v * v.transpose()));
    e.V = v;
    y = simulate(sys, e.data.u.leftCols(T), v, y.leftCols(2));
  } else {
    e.eps = 1e-4 * d4;
    for (int t = 0; t + 2 <= T; ++t) {
      PendulumState s{y.col(t), y.col(t + 1)};
      y.col(t + 2) = nonlinear_step(s, e.data.u(0, t), p);
    }
    // Residual of the linear model along the nonlinear trajectory.
    e.V.resize(2, T - 1);
    const Matrix lin = linear_step_matrix(sys);
    for (int t = 0; t + 2 <= T; ++t) {
      Vector z(5);
      z << y.col(t), y.col(t + 1), e.data.u(0, t);
      e.V.col(t) = y.col(t + 2) - lin * z;
    }
  }
  e.data.y = y;
  e.admissible = max_eigenvalue(e.V * e.V.transpose()) <= e.eps;
  return e;
}

Matrix simulate_linear(const ArSystem& plant, const Controller& c, const Matrix& init,
                       int steps) {
  if (steps < 0) throw Error(ErrorCode::kPreconditionViolated, "negative step count");
  const ArSystem loop = interconnect(plant, c);
  const int q = plant.m + plant.p;
  Matrix w0 = Matrix::Zero(q, plant.L);
  w0.bottomRows(plant.p) = init;
  const Matrix w = simulate(loop, Matrix(0, plant.L + steps), Matrix::Zero(q, steps), w0);
  return w.bottomRows(plant.p);
}

Matrix simulate_nonlinear(const Controller& c, const PendulumState& init, int steps,
                          const PendulumParams& p) {
  c.validate();
  if (c.L != 2 || c.m != 1 || c.p != 2) {
    throw Error(ErrorCode::kShapeMismatch, "pendulum controller must be L=2, m=1, p=2");
  }
  Matrix y = Matrix::Zero(2, steps + 2);
  Vector u = Vector::Zero(steps + 2);
  y.col(0) = init.prev;
  y.col(1) = init.curr;
  for (int t = 0; t < steps; ++t) {
    PendulumState s{y.col(t), y.col(t + 1)};
    y.col(t + 2) = nonlinear_step(s, u(t), p);
    // u(t+2) = -G1 u(t+1) - G0 u(t) + F1 y(t+1) + F0 y(t)
    u(t + 2) = (-c.G[1] * u.segment<1>(t + 1) - c.G[0] * u.segment<1>(t) +
                c.F[1] * y.col(t + 1) + c.F[0] * y.col(t))(0);
  }
  return y;
}

Controller printed_controller(const std::string& fixture_name) {
  Matrix c(1, 6);
  if (fixture_name.rfind("paper-A", 0) == 0) {
    c << 0.76, 29168.72, -18360.21, 0.68, -29515.03, 19264.40;
  } else if (fixture_name.rfind("paper-B", 0) == 0) {
    c << 1.03, 27778.78, -19129.66, 0.85, -27967.57, 20120.40;
  } else {
    throw Error(ErrorCode::kPreconditionViolated, "no printed controller for " + fixture_name);
  }
  return Controller::FromRow(c, 2, 1, 2);
}

}  // namespace arinfo::pendulum
