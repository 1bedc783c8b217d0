#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "arinfo/armodel.hpp"
#include "arinfo/qmi.hpp"

namespace arinfo {

/// Input-output samples, one column per time t = 0..T. The last input sample
/// may be NaN (unused by strictly proper synthesis).
struct TimeSeriesData {
  Matrix u;  // m x (T+1)
  Matrix y;  // p x (T+1)

  int T() const { return static_cast<int>(y.cols()) - 1; }
  int m() const { return static_cast<int>(u.rows()); }
  int p() const { return static_cast<int>(y.rows()); }
  void validate() const;
};

TimeSeriesData read_csv(std::istream& in);
TimeSeriesData read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const TimeSeriesData& data);

/// Noise QMI: V^T ranges over Z_n(pi), n = T-L+1 noise columns.
struct NoiseModel {
  std::string kind;
  std::map<std::string, double> parameters;
  PartitionedSym pi;
  bool regularized = false;

  int p() const { return pi.q(); }
  int n() const { return pi.r(); }
};

NoiseModel noise_energy(int p, int n, const SymMatrix& bound);
/// Column-wise bound |v(t)|^2 <= eps, relaxed to the aggregate n eps I.
NoiseModel noise_per_sample(int p, int n, double eps);
/// V V^T <= eps I.
NoiseModel noise_per_sample_aggregate(int p, int n, double eps);
/// Sample covariance bound with the singular Pi22 shifted by -mu I.
NoiseModel noise_covariance(int p, int n, const SymMatrix& m, double mu = 1e-8);
NoiseModel noise_exact(int p, int n);

enum class HankelMode { kAnalysis, kSynthesis };

struct HankelPair {
  Matrix H1;
  Matrix H2;
  HankelMode mode = HankelMode::kAnalysis;
  int L = 0;
  int m = 0;
  int p = 0;

  int columns() const { return static_cast<int>(H1.cols()); }
};

/// Analysis: rows w(t)..w(t+L), split (qL+m | p); with m = 0 this is (pL | p).
/// Synthesis: rows w(t)..w(t+L-1) then y(t+L), split (qL | p).
HankelPair hankel(const TimeSeriesData& data, int L, HankelMode mode);

/// N = [I H2; 0 H1] Pi [I H2; 0 H1]^T with blocks (p | rows(H1)).
QmiMatrix build_N(const HankelPair& h, const NoiseModel& noise);

/// Nbar = E^T N E, E = diag(sel, I), sel = [0 ... 0 -I_p] of width r.
QmiMatrix build_Nbar(const QmiMatrix& n, int p);

/// Selector [0 ... 0 -I_p] of width r.
Matrix output_selector(int p, int r);

struct CompatibilityReport {
  bool compatible = false;
  double v_route_min_eig = 0.0;
  double n_route_min_eig = 0.0;
  double discrepancy = 0.0;
};

/// V = [R I] H tested against Pi, and R^T tested against N.
CompatibilityReport is_compatible(const Matrix& r, const HankelPair& h,
                                  const NoiseModel& noise, double margin = 0.0);

bool full_row_rank(const Matrix& h1, double tol = 1e-10);

/// The compatible set { R : R^T in Z(N) } in centered form,
///   R^T = center + weight^{-1} S' schur^{1/2},  ||S'|| <= 1,
/// computed by a QR factorization of the data without forming N.
struct CompatibleSet {
  Matrix center;  // r x p, least-squares center R_c^T
  Matrix schur;   // p x p, N|N22
  Matrix weight;  // r x r upper triangular, -N22 = weight^T weight
  double schur_min_eig = 0.0;
  double tolerance = 0.0;
  bool nonempty() const { return schur_min_eig >= -tolerance; }
  int r() const { return static_cast<int>(center.rows()); }
  int p() const { return static_cast<int>(center.cols()); }
};

CompatibleSet compatible_set(const HankelPair& h, const NoiseModel& noise);

/// Member R^T of the compatible set for a given contraction S' (r x p).
Matrix compatible_member(const CompatibleSet& set, const Matrix& s);

}  // namespace arinfo
