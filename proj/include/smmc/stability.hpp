#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "smmc/controllers.hpp"
#include "smmc/multimodel.hpp"
#include "smmc/trace.hpp"

namespace smmc {

/// Contract ||phi(x, u)|| < m * ||x|| on the unmodelled part of the dynamics.
struct NonlinearBound {
  double m = 0.0;
};

/// Smallest admissible switching gain (||A||_2 + M) / sigma_min(alpha B), the
/// triangle-inequality majorant of ||A + M I||_2 / sigma_min(alpha B).
/// Throws SingularCB when alpha B is singular.
double gain_bound(const SubModel& model, NonlinearBound bound);
double gain_bound(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                  const Eigen::MatrixXd& alpha, NonlinearBound bound);

struct LyapunovResult {
  Eigen::MatrixXd p;
  double min_eig = 0.0;
  double residual = 0.0;  // ||F^T P + P F + I||_F with F = A - B L

  bool ok() const { return min_eig > 0.0; }
};

/// Solves (A - B L)^T P + P (A - B L) = -I through the Kronecker-vectorized
/// linear system. Throws SingularLyapunov when that system is singular, i.e.
/// when two closed-loop eigenvalues sum to zero.
LyapunovResult lyapunov_check(const Eigen::MatrixXd& a_red, const Eigen::MatrixXd& b_red,
                              const Eigen::MatrixXd& l_red);

/// Sliding dynamics of order n - m, obtained by rotating B onto the last m
/// coordinates (regular form) and eliminating the surface constraint s = 0.
/// The reduced closed loop is a_red - b_red * l_red.
struct ReducedDynamics {
  Eigen::MatrixXd a_red;
  Eigen::MatrixXd b_red;
  Eigen::MatrixXd l_red;
};
ReducedDynamics reduce_sliding_dynamics(const SubModel& model);

/// Linear feedback the controller applies inside the boundary layer:
/// equivalent-control gain plus the linearized switching gain on alpha.
Eigen::MatrixXd full_order_feedback(const SubModel& model, const ControllerConfig& cfg);

struct SubModelCertificate {
  int index = 0;
  double omega_op = 0.0;
  double k = 0.0;
  double k_min = 0.0;
  bool gain_ok = false;
  LyapunovResult reduced;
  LyapunovResult full;

  bool ok() const { return gain_ok && reduced.ok() && full.ok(); }
};

struct StabilityCertificate {
  std::vector<SubModelCertificate> models;
  std::optional<double> reaching_violation_fraction;

  bool ok() const;
};

/// Gain check uses k_i > k_min + epsilon.
StabilityCertificate certify_bank(std::span<const SubModel> bank, const ControllerConfig& cfg);

/// V = sum_i P_i s_i^2. Throws NonPositiveWeight for P_i <= 0.
double nonquadratic_V(std::span<const double> p_weights, std::span<const double> surface_values);

struct MonitorOptions {
  double eta = 1.0;
  double omega_layer = 2.0;
  /// Times of reference discontinuities; difference stencils never cross them.
  std::vector<double> break_times;
  double tolerance = 1e-9;
};

struct MonitorReport {
  std::size_t eligible = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  std::vector<double> violation_times;
};

/// Checks s * ds/dt <= -eta |s| channel by channel on samples with |s| >= omega_layer.
/// Throws TooShortTrace for fewer than two samples.
MonitorReport reaching_monitor(const SimTrace& trace, const MonitorOptions& options);

/// Checks dV/dt < 0 on samples where some channel surface is outside the layer.
MonitorReport lyapunov_descent_monitor(const SimTrace& trace, const MonitorOptions& options);

/// Central differences inside each segment, one-sided at segment ends.
std::vector<double> segmented_derivative(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> break_times);

}  // namespace smmc
