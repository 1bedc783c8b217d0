#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arinfo/armodel.hpp"
#include "arinfo/datahankel.hpp"

namespace arinfo::pendulum {

struct PendulumParams {
  double M = 1.0;     // cart mass, kg
  double m = 0.7;     // pendulum mass, kg
  double b = 0.1;     // friction, N/(m/s)
  double g = 9.8;     // gravity, m/s^2
  double l = 0.5;     // length, m
  double delta = 0.01;  // step, s
  void validate() const;
};

/// Gravity term of the (2,2) entry of P0. kDerived, 1 - delta^2 g (M+m)/(M l),
/// is what the finite-difference scheme produces and what the measurement
/// tables follow; kPrinted drops the 1/l factor.
enum class GravityEntry { kDerived, kPrinted };

/// L = 2, p = 2 (y = (x, phi)), m = 1, strictly proper.
ArSystem linearized_system(const PendulumParams& p,
                           GravityEntry entry = GravityEntry::kDerived);

/// Two-sample window of y = (x, phi): y(t) and y(t+1).
struct PendulumState {
  Eigen::Vector2d prev = Eigen::Vector2d::Zero();
  Eigen::Vector2d curr = Eigen::Vector2d::Zero();
};

/// y(t+2) from the equations of motion with second differences for the
/// accelerations and forward differences for the velocities, all at time t.
Eigen::Vector2d nonlinear_step(const PendulumState& s, double u,
                               const PendulumParams& p);

/// Central-difference Jacobian of nonlinear_step at the origin with respect
/// to (x(t), phi(t), x(t+1), phi(t+1), u(t)); 2 x 5.
Matrix step_jacobian(const PendulumParams& p, double h = 1e-5);

/// The same Jacobian read off the linear model: [-P0  -P1  Q0].
Matrix linear_step_matrix(const ArSystem& sys);

struct Fixture {
  std::string name;
  TimeSeriesData data;  // T = 20, u(20) missing
  double eps = 0.0;     // V V^T <= eps I
  NoiseModel noise() const;
};

/// "paper-A" (noisy linear measurements, eps = 1e-2 delta^4), "paper-B"
/// (nonlinear measurements, eps = 1e-4 delta^4), and their dequantized
/// reconstructions "paper-A-recon", "paper-B-recon".
Fixture fixture(const std::string& name);
std::vector<std::string> fixture_names();

struct Reconstruction {
  TimeSeriesData data;
  Matrix V;                 // 2 x 19 noise of the reconstruction
  double max_deviation = 0.0;  // max |y - table|
  double noise_ratio = 0.0;    // lambda_max(V V^T) / eps
};

/// Full-precision trajectory of linearized_system that rounds to the table:
/// bisection on the smallest s with |y - table| <= s under V V^T <= shrink eps,
/// each step a feasibility solve.
Reconstruction reconstruct(const Fixture& table, const PendulumParams& p = {},
                           double shrink = 0.999);

enum class ExperimentKind { kLinearized, kNonlinear };

struct Experiment {
  TimeSeriesData data;
  double eps = 0.0;
  Matrix V;          // realized noise (nonlinear: linearization residual)
  bool admissible = false;  // V V^T <= eps I
  NoiseModel noise() const;
};

/// T = 20, inputs uniform on [-1, 1], initial window y(0), y(1) as given.
Experiment experiment(ExperimentKind kind, std::uint64_t seed,
                      const PendulumParams& p = {},
                      const PendulumState& init = {Eigen::Vector2d(0.1, 0.1),
                                                   Eigen::Vector2d(0.101, 0.099)});

/// Closed loop of the nonlinear plant with an L = 2 controller; returns y
/// (2 x (steps + 2)) starting from `init` with zero past inputs.
Matrix simulate_nonlinear(const Controller& c, const PendulumState& init, int steps,
                          const PendulumParams& p = {});

/// Closed loop of an AR plant with a controller from the output window
/// `init` (zero past inputs); returns y, p x (steps + L).
Matrix simulate_linear(const ArSystem& plant, const Controller& c,
                       const Matrix& init, int steps);

/// Controllers printed alongside the two experiments.
Controller printed_controller(const std::string& fixture_name);

}  // namespace arinfo::pendulum
