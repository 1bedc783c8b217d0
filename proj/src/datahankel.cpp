#include "arinfo/datahankel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/QR>

namespace arinfo {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_value(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                            ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void TimeSeriesData::validate() const {
  if (y.rows() < 1 || y.cols() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "data needs p >= 1 and T >= 0");
  }
  if (u.cols() != y.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "u and y need T+1 samples each");
  }
  if (!y.allFinite()) throw Error(ErrorCode::kNonFinite, "y samples");
  if (u.rows() > 0 && u.cols() > 1 && !u.leftCols(u.cols() - 1).allFinite()) {
    throw Error(ErrorCode::kNonFinite, "u samples (only u(T) may be missing)");
  }
}

TimeSeriesData read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  const auto header = split_csv_line(line);
  if (header.empty() || trim(header[0]) != "t") {
    throw Error(ErrorCode::kParseError, "header must start with 't'");
  }
  std::vector<int> ucols, ycols;
  for (size_t j = 1; j < header.size(); ++j) {
    const std::string h = trim(header[j]);
    if (h.size() >= 2 && h[0] == 'u') {
      ucols.push_back(static_cast<int>(j));
    } else if (h.size() >= 2 && h[0] == 'y') {
      ycols.push_back(static_cast<int>(j));
    } else {
      throw Error(ErrorCode::kParseError, "unknown column '" + h + "'");
    }
  }
  if (ycols.empty()) throw Error(ErrorCode::kParseError, "no output columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    const double t = parse_value(fields[0], line_no);
    if (std::isnan(t) || t != static_cast<double>(rows.size())) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": t must count 0,1,2,...");
    }
    std::vector<double> r;
    for (size_t j = 1; j < fields.size(); ++j) r.push_back(parse_value(fields[j], line_no));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::kParseError, "no data rows");

  TimeSeriesData d;
  const int n = static_cast<int>(rows.size());
  d.u.resize(static_cast<int>(ucols.size()), n);
  d.y.resize(static_cast<int>(ycols.size()), n);
  for (int t = 0; t < n; ++t) {
    for (size_t k = 0; k < ucols.size(); ++k) d.u(k, t) = rows[t][ucols[k] - 1];
    for (size_t k = 0; k < ycols.size(); ++k) d.y(k, t) = rows[t][ycols[k] - 1];
  }
  try {
    d.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return d;
}

TimeSeriesData read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return read_csv(in);
}

namespace {

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_csv(std::ostream& out, const TimeSeriesData& data) {
  out << "t";
  for (int i = 0; i < data.m(); ++i) out << ",u" << (i + 1);
  for (int i = 0; i < data.p(); ++i) out << ",y" << (i + 1);
  out << "\n";
  for (int t = 0; t <= data.T(); ++t) {
    out << t;
    for (int i = 0; i < data.m(); ++i) {
      out << ",";
      if (std::isfinite(data.u(i, t))) out << format_double(data.u(i, t));
    }
    for (int i = 0; i < data.p(); ++i) out << "," << format_double(data.y(i, t));
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Noise models

namespace {

void check_noise_dims(int p, int n) {
  if (p < 1 || n < 1) {
    throw Error(ErrorCode::kShapeMismatch, "noise model needs p, n >= 1");
  }
}

NoiseModel make_noise(std::string kind, std::map<std::string, double> params,
                      const Matrix& p11, const Matrix& p22) {
  NoiseModel nm;
  nm.kind = std::move(kind);
  nm.parameters = std::move(params);
  nm.pi = PartitionedSym(p11, Matrix::Zero(p11.rows(), p22.rows()), p22);
  return nm;
}

void require_psd(const SymMatrix& a, const char* what) {
  if (a.dim() > 0 &&
      min_eigenvalue(a.matrix()) < -kPsdTol * spectral_norm(a.matrix())) {
    throw Error(ErrorCode::kNotPsd, what);
  }
}

}  // namespace

NoiseModel noise_energy(int p, int n, const SymMatrix& bound) {
  check_noise_dims(p, n);
  if (bound.dim() != p) throw Error(ErrorCode::kShapeMismatch, "bound must be p x p");
  require_psd(bound, "energy bound must be PSD");
  return make_noise("energy", {}, bound.matrix(), -Matrix::Identity(n, n));
}

NoiseModel noise_per_sample(int p, int n, double eps) {
  check_noise_dims(p, n);
  if (!(eps > 0)) throw Error(ErrorCode::kPreconditionViolated, "eps must be > 0");
  return make_noise("per-sample", {{"eps", eps}},
                    eps * n * Matrix::Identity(p, p), -Matrix::Identity(n, n));
}

NoiseModel noise_per_sample_aggregate(int p, int n, double eps) {
  check_noise_dims(p, n);
  if (!(eps > 0)) throw Error(ErrorCode::kPreconditionViolated, "eps must be > 0");
  return make_noise("per-sample-aggregate", {{"eps", eps}},
                    eps * Matrix::Identity(p, p), -Matrix::Identity(n, n));
}

NoiseModel noise_covariance(int p, int n, const SymMatrix& m, double mu) {
  check_noise_dims(p, n);
  if (m.dim() != p) throw Error(ErrorCode::kShapeMismatch, "M must be p x p");
  require_psd(m, "covariance bound must be PSD");
  if (!(mu > 0)) throw Error(ErrorCode::kPreconditionViolated, "mu must be > 0");
  const Matrix ones = Matrix::Constant(n, n, 1.0 / n);
  NoiseModel nm = make_noise("covariance", {{"mu", mu}}, n * m.matrix(),
                             ones - (1.0 + mu) * Matrix::Identity(n, n));
  nm.regularized = true;
  return nm;
}

NoiseModel noise_exact(int p, int n) {
  check_noise_dims(p, n);
  return make_noise("exact", {}, Matrix::Zero(p, p), -Matrix::Identity(n, n));
}

// ---------------------------------------------------------------------------
// Hankel matrices and data QMIs

HankelPair hankel(const TimeSeriesData& data, int L, HankelMode mode) {
  data.validate();
  if (L < 1) throw Error(ErrorCode::kPreconditionViolated, "L must be >= 1");
  if (data.T() < L) {
    throw Error(ErrorCode::kHorizonTooShort,
                "T = " + std::to_string(data.T()) + " < L = " + std::to_string(L));
  }
  const int m = data.m(), p = data.p(), q = m + p;
  const int n = data.T() - L + 1;
  HankelPair h;
  h.mode = mode;
  h.L = L;
  h.m = m;
  h.p = p;
  auto w = [&](int t) {
    Vector v(q);
    v << data.u.col(t), data.y.col(t);
    return v;
  };
  if (mode == HankelMode::kAnalysis) {
    h.H1.resize(q * L + m, n);
    h.H2.resize(p, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < L; ++i) h.H1.block(i * q, j, q, 1) = w(j + i);
      h.H1.block(q * L, j, m, 1) = data.u.col(j + L);
      h.H2.col(j) = data.y.col(j + L);
    }
  } else {
    if (m < 1) throw Error(ErrorCode::kShapeMismatch, "synthesis needs inputs");
    h.H1.resize(q * L, n);
    h.H2.resize(p, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < L; ++i) h.H1.block(i * q, j, q, 1) = w(j + i);
      h.H2.col(j) = data.y.col(j + L);
    }
  }
  if (!h.H1.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "Hankel matrix uses a missing sample");
  }
  return h;
}

QmiMatrix build_N(const HankelPair& h, const NoiseModel& noise) {
  const int n = h.columns();
  if (noise.n() != n || noise.p() != h.p) {
    throw Error(ErrorCode::kShapeMismatch,
                "noise model is " + std::to_string(noise.p()) + "x" +
                    std::to_string(noise.n()) + ", data need " +
                    std::to_string(h.p) + "x" + std::to_string(n));
  }
  const int p = h.p;
  const int r = static_cast<int>(h.H1.rows());
  Matrix e = Matrix::Zero(p + r, p + n);
  e.topLeftCorner(p, p).setIdentity();
  e.topRightCorner(p, n) = h.H2;
  e.bottomRightCorner(r, n) = h.H1;
  const Matrix nn = e * noise.pi.matrix() * e.transpose();
  return QmiMatrix(SymMatrix::FromSymmetricPart(nn), p);
}

Matrix output_selector(int p, int r) {
  Matrix sel = Matrix::Zero(p, r);
  sel.rightCols(p) = -Matrix::Identity(p, p);
  return sel;
}

QmiMatrix build_Nbar(const QmiMatrix& n, int p) {
  if (n.q() != p) throw Error(ErrorCode::kShapeMismatch, "N must have q-block p");
  const int r = n.r();
  if (r < p) throw Error(ErrorCode::kShapeMismatch, "r-block smaller than p");
  Matrix e = Matrix::Zero(p + r, 2 * r);
  e.topLeftCorner(p, r) = output_selector(p, r);
  e.bottomRightCorner(r, r).setIdentity();
  const Matrix nb = e.transpose() * n.matrix() * e;
  return QmiMatrix(SymMatrix::FromSymmetricPart(nb), r);
}

CompatibilityReport is_compatible(const Matrix& r, const HankelPair& h,
                                  const NoiseModel& noise, double margin) {
  if (r.rows() != h.p || r.cols() != h.H1.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "R must be p x rows(H1)");
  }
  CompatibilityReport rep;
  const Matrix v = r * h.H1 + h.H2;
  const Matrix val_v = qmi_value(v.transpose(), noise.pi);
  const Matrix val_n = qmi_value(r.transpose(), build_N(h, noise));
  rep.v_route_min_eig = min_eigenvalue(val_v);
  rep.n_route_min_eig = min_eigenvalue(val_n);
  rep.discrepancy = (val_v - val_n).cwiseAbs().maxCoeff();
  const double scale =
      std::max({1e-300, val_v.cwiseAbs().maxCoeff(),
                noise.pi.matrix().cwiseAbs().maxCoeff() *
                    std::max(1.0, v.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff())});
  if (rep.discrepancy > 1e-8 * scale) {
    throw Error(ErrorCode::kCertificateFailed, "V-route and N-route disagree");
  }
  rep.compatible = rep.v_route_min_eig >= -margin;
  return rep;
}

bool full_row_rank(const Matrix& h1, double tol) {
  if (h1.rows() == 0) return true;
  if (h1.rows() > h1.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(h1);
  const auto& s = svd.singularValues();
  return s(0) > 0 && s(s.size() - 1) > tol * s(0);
}

CompatibleSet compatible_set(const HankelPair& h, const NoiseModel& noise) {
  const int n = h.columns();
  const int r = static_cast<int>(h.H1.rows());
  const int p = h.p;
  if (noise.n() != n || noise.p() != p) {
    throw Error(ErrorCode::kShapeMismatch, "noise model does not match data");
  }
  if (n < r) {
    throw Error(ErrorCode::kRankDeficientHankel,
                "fewer Hankel columns than rows");
  }
  const Matrix p11 = noise.pi.p11();
  const Matrix p21 = noise.pi.p21();
  Eigen::LLT<Matrix> chol(-noise.pi.p22());
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::kPreconditionViolated, "noise Pi22 must be negative definite");
  }
  const Matrix lower = chol.matrixL();
  // Completing the square in V^T: center -Pi22^{-1} Pi21, weight L^T.
  const Matrix k = lower.triangularView<Eigen::Lower>().solve(p21);
  const Matrix vc = lower.transpose().triangularView<Eigen::Upper>().solve(k);
  const Matrix pi_schur = p11 + k.transpose() * k;

  const Matrix a = lower.transpose() * h.H1.transpose();
  const Matrix b = lower.transpose() * (h.H2.transpose() - vc);
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix qfull = qr.householderQ();
  const Matrix ra = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Matrix qtb = qfull.transpose() * b;
  const Matrix top = qtb.topRows(r);
  const Matrix rest = qtb.bottomRows(n - r);

  CompatibleSet set;
  set.weight = ra;
  set.center = -ra.triangularView<Eigen::Upper>().solve(top);
  set.schur = pi_schur - rest.transpose() * rest;
  set.schur = 0.5 * (set.schur + set.schur.transpose());
  set.schur_min_eig = min_eigenvalue(set.schur);
  set.tolerance = kPsdTol * spectral_norm(build_N(h, noise).matrix());
  if (!set.center.allFinite()) {
    throw Error(ErrorCode::kRankDeficientHankel, "H1 is rank deficient");
  }
  return set;
}

Matrix compatible_member(const CompatibleSet& set, const Matrix& s) {
  if (s.rows() != set.r() || s.cols() != set.p()) {
    throw Error(ErrorCode::kShapeMismatch, "S' must be r x p");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(set.schur);
  Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix root = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return set.center + set.weight.triangularView<Eigen::Upper>().solve(s * root);
}

}  // namespace arinfo
