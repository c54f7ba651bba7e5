#pragma once

// Doubly-fed induction generator in the rotating d-q frame.
//
// State ordering used throughout the library:
//   electromagnetic part  x = (phi_dr, phi_qr, i_ds, i_qs)
//   full plant state          (phi_dr, phi_qr, i_ds, i_qs, omega)
// Flux block:    d/dt x_f = a * x_c + A_f(omega) * x_f
// Current block: d/dt x_c = -gamma1 * x_c + B_c(omega) * x_f + gamma4 * u
// Mechanics:     J * d/dt omega = T_e - C_l - fv * omega

#include <Eigen/Dense>

namespace smmc {

using ElectroVector = Eigen::Vector4d;
using StateVector = Eigen::Matrix<double, 5, 1>;
using InputVector = Eigen::Vector2d;

struct MachineParams {
  double rs = 0.0;  // stator resistance, ohm
  double rr = 0.0;  // rotor resistance, ohm
  double ls = 0.0;  // stator inductance, H
  double lr = 0.0;  // rotor inductance, H
  double lm = 0.0;  // mutual inductance, H
  double j = 0.0;   // inertia, kg m^2
  int pole_pairs = 1;
  double fv = 0.0;  // viscous friction, N m s/rad

  /// Throws ValidationError for a non-positive field and SingularLeakage
  /// when Lm^2 >= Ls*Lr.
  void validate() const;

  /// A small generator used as the shipped default. Not measured data.
  static MachineParams repository_defaults();

  bool operator==(const MachineParams&) const = default;
};

struct DerivedCoeffs {
  double sigma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double gamma4 = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Leakage coefficient and the gamma/a/b coefficients of the current and
/// flux equations. Checks only Lm^2 < Ls*Lr; positivity is validate()'s job.
DerivedCoeffs derive_coefficients(const MachineParams& params);

/// kCanonical is the rotation-invariant model. kAsPrintedEq3 flips the
/// speed coupling of the q-flux row and the input sign, which is the other
/// sign set in circulation for this machine model.
enum class SignConvention { kCanonical, kAsPrintedEq3 };

struct PlantState {
  double phi_dr = 0.0;
  double phi_qr = 0.0;
  double i_ds = 0.0;
  double i_qs = 0.0;
  double omega = 0.0;

  StateVector to_vector() const;
  static PlantState from_vector(const StateVector& v);
  ElectroVector electromagnetic() const { return {phi_dr, phi_qr, i_ds, i_qs}; }
  bool is_finite() const;

  bool operator==(const PlantState&) const = default;
};

struct PlantInput {
  double v_ds = 0.0;
  double v_qs = 0.0;
  double c_l = 0.0;  // load torque, N m

  InputVector voltage() const { return {v_ds, v_qs}; }
};

/// Desired state x_d. Field oriented: phi_qr = 0 and phi_dr = Lm * i_ds.
struct ReferenceState : PlantState {};

Eigen::Matrix2d flux_matrix(double omega, const MachineParams& params,
                            SignConvention convention = SignConvention::kCanonical);
Eigen::Matrix2d current_coupling(double omega, const DerivedCoeffs& coeffs,
                                 SignConvention convention = SignConvention::kCanonical);

/// 4x4 state matrix of the electromagnetic subsystem at frozen speed.
Eigen::Matrix4d electromagnetic_matrix(double omega, const MachineParams& params,
                                       SignConvention convention = SignConvention::kCanonical);
/// 4x2 input matrix, zero on the flux rows.
Eigen::Matrix<double, 4, 2> input_matrix(const MachineParams& params,
                                         SignConvention convention = SignConvention::kCanonical);
/// d(electromagnetic_matrix)/d(omega); the matrix is affine in omega.
Eigen::Matrix4d electromagnetic_matrix_slope(const MachineParams& params,
                                             SignConvention convention = SignConvention::kCanonical);

double electromagnetic_torque(const PlantState& state, const MachineParams& params);

PlantState plant_derivative(const PlantState& state, const PlantInput& input,
                            const MachineParams& params,
                            SignConvention convention = SignConvention::kCanonical);

/// Field-oriented steady state for a torque/flux pair; omega is carried over
/// from the scenario's speed trajectory. Throws ZeroFlux for flux_ref == 0.
ReferenceState reference_state(double torque_ref, double flux_ref, double omega,
                               const MachineParams& params);

/// Speed at which reference_state(torque_ref, flux_ref, ...) is an exact
/// equilibrium of the flux equations.
double field_oriented_speed(double torque_ref, double flux_ref, const MachineParams& params,
                            SignConvention convention = SignConvention::kCanonical);

/// Precomputed model for the integration hot loop.
class DfigPlant {
 public:
  explicit DfigPlant(const MachineParams& params,
                     SignConvention convention = SignConvention::kCanonical);

  StateVector derivative(const StateVector& x, const InputVector& u, double load_torque) const;
  double torque(const StateVector& x) const;

  const MachineParams& params() const { return params_; }
  const DerivedCoeffs& coeffs() const { return coeffs_; }
  SignConvention convention() const { return convention_; }

 private:
  MachineParams params_;
  DerivedCoeffs coeffs_;
  SignConvention convention_;
  double torque_gain_;
  Eigen::Matrix4d a_at_rest_;
  Eigen::Matrix4d a_slope_;
  Eigen::Matrix<double, 4, 2> b_;
};

}  // namespace smmc
