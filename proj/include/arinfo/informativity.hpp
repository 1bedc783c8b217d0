#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arinfo/armodel.hpp"
#include "arinfo/datahankel.hpp"
#include "arinfo/sdpfeas.hpp"

namespace arinfo {

struct PipelineOptions {
  FeasOptions solver;
  /// Cholesky rebalancing passes after the first feasible solve.
  int balance_passes = 3;
  /// Largest condition number accepted when inverting the solved Phi.
  double max_condition = 1e12;
};

/// Internal coordinates in which the LMIs are solved. With T the state
/// congruence, the closed loop of the compatible plant R is
///   A' = a_nominal + u_unc * (R - R_c) * t_inv,
/// and Q_Psi with psi = phi^{-1} is the common Lyapunov function.
struct BalancedCertificate {
  Matrix t;
  Matrix t_inv;
  Matrix a_nominal;
  Matrix u_unc;
  Matrix phi;
  Matrix psi;
  CompatibleSet set;
};

struct StabilityReport {
  bool informative = false;
  FeasStatus status = FeasStatus::kIndeterminate;
  int L = 0;
  int p = 0;
  Matrix Phi;  // original coordinates
  Matrix Psi;
  double lmi_margin = 0.0;       // balanced coordinates
  double lmi_relative_margin = 0.0;
  double phi_condition = 0.0;
  bool h1_full_rank = false;
  int lmi_size = 0;
  int unknowns = 0;
  BalancedCertificate cert;
  std::vector<std::string> diagnostics;
};

enum class Method { kFull, kReduced };
const char* to_string(Method m);

struct SynthesisMargins {
  double lmi = 0.0;              // smallest eigenvalue over the solved LMIs
  double lmi_relative = 0.0;
  double alternative_qmi = 0.0;  // structured closed-loop QMI
  double phi_min_eig = 0.0;
  double phi_condition = 0.0;
};

struct SynthesisResult {
  bool informative = false;
  FeasStatus status = FeasStatus::kIndeterminate;
  Method method = Method::kFull;
  int L = 0;
  int m = 0;
  int p = 0;
  Matrix Phi;  // original coordinates
  Matrix D;
  Matrix C;
  Controller controller;
  std::vector<int> lmi_sizes;
  int unknowns = 0;
  SynthesisMargins margins;
  BalancedCertificate cert;
  std::vector<std::string> diagnostics;
};

StabilityReport analyze_stability(const TimeSeriesData& data,
                                  const NoiseModel& noise, int L,
                                  const PipelineOptions& options = {});

SynthesisResult synthesize_full(const TimeSeriesData& data,
                                const NoiseModel& noise, int L,
                                const PipelineOptions& options = {});

SynthesisResult synthesize_reduced(const TimeSeriesData& data,
                                   const NoiseModel& noise, int L,
                                   const PipelineOptions& options = {});

struct VerificationReport {
  int trials = 0;
  int passed = 0;
  double pass_fraction = 1.0;
  /// Largest eigenvalue of A'^T Psi A' - Psi over the trials (negative passes).
  double worst_lyapunov = -std::numeric_limits<double>::infinity();
  double worst_spectral_radius = 0.0;
};

/// Samples compatible plants R^T = R_c^T + W^{-1} S' (N|N22)^{1/2} with
/// random contractions S' and checks the closed loop with the common Psi.
/// Trial k draws from its own stream seeded by (seed, k).
VerificationReport verify_robust(const BalancedCertificate& cert, int trials,
                                 std::uint64_t seed, bool parallel = true);
VerificationReport verify_robust(const SynthesisResult& result, int trials,
                                 std::uint64_t seed, bool parallel = true);

/// Spectral radius of the closed loop of `plant_row` (p x qL) with the
/// controller row C, evaluated in the balanced coordinates of `result`.
double closed_loop_radius(const SynthesisResult& result, const Matrix& plant_row);

}  // namespace arinfo
