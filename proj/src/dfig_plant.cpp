#include "smmc/dfig_plant.hpp"

#include <cmath>
#include <string>

#include "smmc/error.hpp"

namespace smmc {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::kValidationError, std::string(name) + " > 0");
  }
}

// +1 for the canonical q-flux speed coupling, -1 for the printed row.
double q_flux_sign(SignConvention c) { return c == SignConvention::kCanonical ? 1.0 : -1.0; }
double input_sign(SignConvention c) { return c == SignConvention::kCanonical ? 1.0 : -1.0; }

}  // namespace

void MachineParams::validate() const {
  require_positive(rs, "rs");
  require_positive(rr, "rr");
  require_positive(ls, "ls");
  require_positive(lr, "lr");
  require_positive(lm, "lm");
  require_positive(j, "j");
  if (pole_pairs <= 0) throw Error(ErrorKind::kValidationError, "p > 0");
  require_positive(fv, "fv");
  derive_coefficients(*this);
}

MachineParams MachineParams::repository_defaults() {
  return MachineParams{1.2, 1.8, 0.155, 0.156, 0.15, 0.07, 2, 0.001};
}

DerivedCoeffs derive_coefficients(const MachineParams& m) {
  const double sigma = 1.0 - m.lm * m.lm / (m.ls * m.lr);
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::kSingularLeakage, "Lm^2 >= Ls*Lr (sigma = " + std::to_string(sigma) + ")");
  }
  DerivedCoeffs c;
  c.sigma = sigma;
  c.gamma1 = m.rs / (sigma * m.ls) + m.rr * m.lm * m.lm / (sigma * m.ls * m.lr * m.lr);
  c.gamma2 = m.rr * m.lm / (sigma * m.ls * m.lr * m.lr);
  c.gamma3 = m.lm / (sigma * m.ls * m.lr) * m.pole_pairs;
  c.gamma4 = 1.0 / (sigma * m.ls);
  c.a = m.rr / m.lr * m.lm;
  c.b = m.rr / m.lr;
  return c;
}

StateVector PlantState::to_vector() const {
  StateVector v;
  v << phi_dr, phi_qr, i_ds, i_qs, omega;
  return v;
}

PlantState PlantState::from_vector(const StateVector& v) {
  return PlantState{v(0), v(1), v(2), v(3), v(4)};
}

bool PlantState::is_finite() const {
  return std::isfinite(phi_dr) && std::isfinite(phi_qr) && std::isfinite(i_ds) &&
         std::isfinite(i_qs) && std::isfinite(omega);
}

Eigen::Matrix2d flux_matrix(double omega, const MachineParams& params, SignConvention convention) {
  const double b = params.rr / params.lr;
  const double pw = params.pole_pairs * omega;
  Eigen::Matrix2d af;
  af << -b, -pw, q_flux_sign(convention) * pw, -b;
  return af;
}

Eigen::Matrix2d current_coupling(double omega, const DerivedCoeffs& c, SignConvention) {
  Eigen::Matrix2d bc;
  bc << -c.gamma2, c.gamma3 * omega, -c.gamma3 * omega, -c.gamma2;
  return bc;
}

Eigen::Matrix4d electromagnetic_matrix(double omega, const MachineParams& params,
                                       SignConvention convention) {
  const DerivedCoeffs c = derive_coefficients(params);
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a.topLeftCorner<2, 2>() = flux_matrix(omega, params, convention);
  a.topRightCorner<2, 2>() = c.a * Eigen::Matrix2d::Identity();
  a.bottomLeftCorner<2, 2>() = current_coupling(omega, c, convention);
  a.bottomRightCorner<2, 2>() = -c.gamma1 * Eigen::Matrix2d::Identity();
  return a;
}

Eigen::Matrix<double, 4, 2> input_matrix(const MachineParams& params, SignConvention convention) {
  const DerivedCoeffs c = derive_coefficients(params);
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  b.bottomRows<2>() = input_sign(convention) * c.gamma4 * Eigen::Matrix2d::Identity();
  return b;
}

Eigen::Matrix4d electromagnetic_matrix_slope(const MachineParams& params,
                                             SignConvention convention) {
  return electromagnetic_matrix(1.0, params, convention) -
         electromagnetic_matrix(0.0, params, convention);
}

double electromagnetic_torque(const PlantState& s, const MachineParams& params) {
  return params.pole_pairs * (params.lm / params.lr) * (s.i_qs * s.phi_dr - s.i_ds * s.phi_qr);
}

PlantState plant_derivative(const PlantState& state, const PlantInput& input,
                            const MachineParams& params, SignConvention convention) {
  const DfigPlant plant(params, convention);
  const StateVector dx =
      plant.derivative(state.to_vector(), input.voltage(), input.c_l);
  return PlantState::from_vector(dx);
}

ReferenceState reference_state(double torque_ref, double flux_ref, double omega,
                               const MachineParams& params) {
  if (flux_ref == 0.0) throw Error(ErrorKind::kZeroFlux, "flux_ref = 0 leaves i_qs undefined");
  ReferenceState r;
  r.phi_dr = flux_ref;
  r.phi_qr = 0.0;
  r.i_ds = flux_ref / params.lm;
  r.i_qs = torque_ref * params.lr / (params.pole_pairs * params.lm * flux_ref);
  r.omega = omega;
  return r;
}

double field_oriented_speed(double torque_ref, double flux_ref, const MachineParams& params,
                            SignConvention convention) {
  const ReferenceState r = reference_state(torque_ref, flux_ref, 0.0, params);
  const double a = params.rr / params.lr * params.lm;
  // q-flux row at phi_qr = 0:  sign * p * omega * phi_dr + a * i_qs = 0
  return -a * r.i_qs / (q_flux_sign(convention) * params.pole_pairs * flux_ref);
}

DfigPlant::DfigPlant(const MachineParams& params, SignConvention convention)
    : params_(params),
      coeffs_(derive_coefficients(params)),
      convention_(convention),
      torque_gain_(params.pole_pairs * params.lm / params.lr),
      a_at_rest_(electromagnetic_matrix(0.0, params, convention)),
      a_slope_(electromagnetic_matrix_slope(params, convention)),
      b_(input_matrix(params, convention)) {}

StateVector DfigPlant::derivative(const StateVector& x, const InputVector& u,
                                  double load_torque) const {
  const double w = x(4);
  const ElectroVector xe = x.head<4>();

  StateVector dx;
  dx.head<4>() = (a_at_rest_ + w * a_slope_) * xe + b_ * u;
  dx(4) = (torque(x) - load_torque - params_.fv * w) / params_.j;

  if (!dx.allFinite()) throw Error(ErrorKind::kNonFiniteState, "plant derivative is not finite");
  return dx;
}

double DfigPlant::torque(const StateVector& x) const {
  return torque_gain_ * (x(3) * x(0) - x(2) * x(1));
}

}  // namespace smmc
