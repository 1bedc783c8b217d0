// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Lines tagged "info" are supplementary runs on the
// dequantized fixture reconstructions and never change the exit code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "arinfo/error.hpp"
#include "arinfo/informativity.hpp"
#include "arinfo/pendulum.hpp"
#include "oracles.hpp"

using namespace arinfo;
namespace pd = arinfo::pendulum;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void info(const std::string& title, const Outcome& o) {
  std::printf("[info %s] %s -- %s\n", o.pass ? "pass" : "fail", title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const Matrix& true_row() {
  static const Matrix row = flatten(pd::linearized_system({}), true).R;
  return row;
}

double rho_true(const Controller& c) {
  return spectral_radius(closed_loop_matrix(true_row(), c.coefficient_row(), 2, 3));
}

// Closed-loop checks shared by criterion 1 for synthesized and printed
// controllers: spectral radius < 1 - 1e-6 and 200-step decay below 1e-3.
bool linear_checks(const Controller& c, const pd::Fixture& f, std::ostringstream& os,
                   const std::string& tag) {
  const double rho = rho_true(c);
  const Matrix y = pd::simulate_linear(pd::linearized_system({}), c, f.data.y.leftCols(2), 200);
  const double decay = y.col(200).norm() / y.col(0).norm();
  os << tag << ": rho " << fmt("%.6f", rho) << ", |y(200)|/|y(0)| " << fmt("%.3e", decay) << "; ";
  return rho < 1.0 - 1e-6 && decay < 1e-3;
}

// Runs a synthesis and turns library errors into a failed outcome.
bool try_synthesis(const std::function<SynthesisResult()>& run, SynthesisResult& out,
                   std::ostringstream& os) {
  try {
    out = run();
    return true;
  } catch (const Error& e) {
    os << "error: " << e.what() << "; ";
    return false;
  }
}

Outcome criterion1(const std::string& name) {
  std::ostringstream os;
  const pd::Fixture f = pd::fixture(name);
  bool ok = true;
  const bool rank = full_row_rank(hankel(f.data, 2, HankelMode::kSynthesis).H1);
  os << "H1' full row rank " << (rank ? "yes" : "no") << "; ";
  ok &= rank;
  const auto t0 = std::chrono::steady_clock::now();
  SynthesisResult r;
  const bool ran = try_synthesis([&] { return synthesize_full(f.data, f.noise(), 2); }, r, os);
  const double secs = seconds_since(t0);
  os << "synthesize_full " << fmt("%.2f s", secs) << "; ";
  ok &= secs < 10.0;
  if (ran) {
    os << "verdict " << (r.informative ? "informative" : "not informative") << "; ";
    ok &= r.informative;
    if (r.informative) ok &= linear_checks(r.controller, f, os, "synthesized");
  } else {
    ok = false;
  }
  ok &= linear_checks(pd::printed_controller(name), f, os, "printed");
  return {ok, os.str()};
}

Outcome criterion2(const std::string& name) {
  std::ostringstream os;
  const pd::Fixture f = pd::fixture(name);
  SynthesisResult r;
  if (!try_synthesis([&] { return synthesize_full(f.data, f.noise(), 2); }, r, os)) {
    return {false, os.str()};
  }
  os << "verdict " << (r.informative ? "informative" : "not informative") << "; ";
  if (!r.informative) return {false, os.str()};
  const double rho = rho_true(r.controller);
  const pd::PendulumState init{f.data.y.col(0), f.data.y.col(1)};
  const Matrix y = pd::simulate_nonlinear(r.controller, init, 200);
  double peak = 0.0;
  for (int t = 0; t < y.cols(); ++t) peak = std::max(peak, y.col(t).norm());
  const double y0 = y.col(0).norm(), yT = y.col(200).norm();
  const bool bounded = y.allFinite() && peak <= 100.0 * y0;
  os << "rho (linearized) " << fmt("%.6f", rho) << "; nonlinear |y(200)|/|y(0)| "
     << fmt("%.3e", yT / y0) << ", peak/|y(0)| " << fmt("%.2f", peak / y0);
  return {rho < 1.0 && bounded && yT < y0, os.str()};
}

Outcome criterion3(const std::string& name) {
  std::ostringstream os;
  const pd::Fixture f = pd::fixture(name);
  SynthesisResult r;
  if (!try_synthesis([&] { return synthesize_full(f.data, f.noise(), 2); }, r, os)) {
    return {false, os.str()};
  }
  if (!r.informative) {
    os << "not informative, no common Psi to verify";
    return {false, os.str()};
  }
  const VerificationReport v = verify_robust(r, 100, 2024);
  os << v.passed << "/" << v.trials << " sampled plants pass, worst Lyapunov eig "
     << fmt("%.3e", v.worst_lyapunov) << ", worst rho " << fmt("%.6f", v.worst_spectral_radius);
  return {v.trials == 100 && v.passed == 100 && v.worst_lyapunov < -1e-10 &&
              v.worst_spectral_radius < 1.0,
          os.str()};
}

Outcome criterion4(const std::vector<std::string>& names) {
  std::ostringstream os;
  bool ok = true;
  for (const auto& name : names) {
    const pd::Fixture f = pd::fixture(name);
    SynthesisResult full, red;
    os << name << ": ";
    std::ostringstream full_err, red_err;
    const bool ran_full =
        try_synthesis([&] { return synthesize_full(f.data, f.noise(), 2); }, full, full_err);
    const bool ran_red =
        try_synthesis([&] { return synthesize_reduced(f.data, f.noise(), 2); }, red, red_err);
    if (!ran_full) os << "full route " << full_err.str();
    if (!ran_red) os << "reduced route " << red_err.str();
    if (!ran_full || !ran_red) {
      ok = false;
      continue;
    }
    int total = 0;
    for (int s : red.lmi_sizes) total += s;
    os << "full " << (full.informative ? "feasible" : "infeasible") << ", reduced "
       << (red.informative ? "feasible" : "infeasible") << ", reduced LMI total " << total
       << ", unknowns " << red.unknowns;
    ok &= total == 17 && red.unknowns == 21;
    if (full.informative) ok &= red.informative;
    if (red.informative) {
      os << ", alternative-QMI margin " << fmt("%.3e", red.margins.alternative_qmi)
         << ", rho " << fmt("%.6f", rho_true(red.controller));
      ok &= red.margins.alternative_qmi > 0.0 && rho_true(red.controller) < 1.0;
    } else {
      // the reduced-route controller check needs a controller to exist
      ok &= !full.informative;
    }
    os << "; ";
  }
  return {ok, os.str()};
}

Outcome criterion5() {
  std::ostringstream os;
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int p = 2, L = 2, T = 30, n = T - L + 1;
  const double eps = 1e-6;
  int informative = 0, unsound = 0, errors = 0, samples = 0, cert_fail = 0;
  for (int k = 0; k < 50; ++k) {
    const ArSystem sys = oracle::stable_autonomous(p, L, 0.3 + 0.5 * uni(rng), rng);
    Matrix v = oracle::gauss(p, n, rng);
    for (int t = 0; t < n; ++t) v.col(t) *= std::sqrt(0.5 * eps * uni(rng)) / v.col(t).norm();
    const TimeSeriesData d{Matrix(0, T + 1),
                           simulate(sys, Matrix(0, 0), v, oracle::gauss(p, L, rng))};
    const NoiseModel noise = noise_per_sample(p, n, eps);
    try {
      const StabilityReport r = analyze_stability(d, noise, L);
      if (!r.informative) continue;
      ++informative;
      const CompatibleSet set = compatible_set(hankel(d, L, HankelMode::kAnalysis), noise);
      for (int s = 0; s < 100; ++s, ++samples) {
        const Matrix row = compatible_member(set, oracle::contraction(p * L, p, rng, s)).transpose();
        const Matrix a = companion(std::vector<Matrix>{row.leftCols(p), row.rightCols(p)});
        if (spectral_radius(a) >= 1.0 || lyapunov_max_eig(a, r.Psi) >= 0.0) ++unsound;
      }
      const VerificationReport vr = verify_robust(r.cert, 100, 77 + k);
      if (vr.passed != vr.trials) ++cert_fail;
    } catch (const Error& e) {
      ++errors;
      os << "stable #" << k << " error " << e.what() << "; ";
    }
  }
  int unstable_not_informative = 0, unstable_errors = 0;
  for (int k = 0; k < 50; ++k) {
    const ArSystem sys = oracle::stable_autonomous(p, L, 1.1 + 0.5 * uni(rng), rng);
    const TimeSeriesData d{Matrix(0, T + 1), simulate(sys, Matrix(0, 0), Matrix::Zero(p, n),
                                                      oracle::gauss(p, L, rng))};
    try {
      if (!analyze_stability(d, noise_exact(p, n), L).informative) ++unstable_not_informative;
    } catch (const Error& e) {
      ++unstable_errors;
      os << "unstable #" << k << " error " << e.what() << "; ";
    }
  }
  os << "stable class: " << informative << "/50 informative (reported, not gated), " << samples
     << " sampled compatible P, " << unsound << " unsound, " << cert_fail
     << " balanced-certificate failures; unstable class: " << unstable_not_informative
     << "/50 not informative";
  return {unsound == 0 && cert_fail == 0 && errors == 0 && unstable_errors == 0 &&
              unstable_not_informative == 50,
          os.str()};
}

Outcome criterion6() {
  std::ostringstream os;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(6);
  const double penrose = oracle::penrose_worst(rng, 200);
  const double nabla = oracle::nabla_worst(rng, 50);
  const double lemma1 = oracle::lemma1_worst(rng, 30);
  const int proj = oracle::projection_violations(rng, 200);
  const auto sl = oracle::slemma_soundness(rng, 200);
  const double routes = oracle::two_route_worst(rng, 50);
  const double secs = seconds_since(t0);
  os << "Penrose " << fmt("%.1e", penrose) << ", nabla " << fmt("%.1e", nabla)
     << ", degree reduction " << fmt("%.1e", lemma1) << ", projection violations " << proj
     << "/200, S-lemma violations " << sl.violations << "/" << sl.samples
     << ", two-route " << fmt("%.1e", routes) << ", " << fmt("%.2f s", secs);
  return {penrose <= 1e-10 && nabla <= 1e-12 && lemma1 <= 1e-10 && proj == 0 &&
              sl.violations == 0 && sl.samples == 200 && routes <= 1e-10 && secs < 60.0,
          os.str()};
}

Outcome criterion7() {
  std::ostringstream os;
  const Matrix jac = pd::step_jacobian({});
  const double err_derived = (jac - pd::linear_step_matrix(
                                        pd::linearized_system({}, pd::GravityEntry::kDerived)))
                                 .cwiseAbs()
                                 .maxCoeff();
  const double err_printed = (jac - pd::linear_step_matrix(
                                        pd::linearized_system({}, pd::GravityEntry::kPrinted)))
                                 .cwiseAbs()
                                 .maxCoeff();
  // which (2,2) entry reproduces the measurement table: residual noise
  // energy of the table under each model, relative to the rounding floor
  const pd::Fixture a = pd::fixture("paper-A");
  auto residual = [&](pd::GravityEntry e) {
    const ArSystem s = pd::linearized_system({}, e);
    const HankelPair h = hankel(a.data, 2, HankelMode::kSynthesis);
    const Matrix v = flatten(s, true).R * h.H1 + h.H2;
    return max_eigenvalue(v * v.transpose());
  };
  const double res_derived = residual(pd::GravityEntry::kDerived);
  const double res_printed = residual(pd::GravityEntry::kPrinted);
  os << "adopted entry 1 - d^2 g (M+m)/(M l); Jacobian error vs adopted " << fmt("%.1e", err_derived)
     << ", vs printed 1 - d^2 g (M+m)/M " << fmt("%.1e", err_printed)
     << "; table residual lambda_max(VV^T): adopted " << fmt("%.2e", res_derived) << ", printed "
     << fmt("%.2e", res_printed);
  return {err_derived <= 1e-8 && res_derived < res_printed, os.str()};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  report(1, "pendulum linear experiment (paper-A, eps 1e-10)", criterion1("paper-A"));
  info("criterion 1 on paper-A-recon", criterion1("paper-A-recon"));
  report(2, "pendulum nonlinear experiment (paper-B, eps 1e-12)", criterion2("paper-B"));
  info("criterion 2 on paper-B-recon", criterion2("paper-B-recon"));
  report(3, "robustness quantifier (paper-A, 100 plants)", criterion3("paper-A"));
  info("criterion 3 on paper-A-recon", criterion3("paper-A-recon"));
  info("criterion 3 on paper-B-recon", criterion3("paper-B-recon"));
  report(4, "reduced-route equivalence (both fixtures)", criterion4({"paper-A", "paper-B"}));
  info("criterion 4 on reconstructions", criterion4({"paper-A-recon", "paper-B-recon"}));
  report(5, "stability-analysis soundness sweep", criterion5());
  report(6, "mathematical oracle suite", criterion6());
  report(7, "linearization oracle", criterion7());
  std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
