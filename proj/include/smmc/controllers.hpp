#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "smmc/multimodel.hpp"

namespace smmc {

enum class ControllerMode { kSmc1, kSmc2, kSmmc };
enum class SwitchLaw { kSign, kSaturation, kProportional };

std::string_view to_string(ControllerMode mode);
std::string_view to_string(SwitchLaw law);
/// Throws ValidationError for unknown names.
ControllerMode parse_controller_mode(std::string_view name);
SwitchLaw parse_switch_law(std::string_view name);

/// Row of surface coefficients; every entry strictly positive.
struct SurfaceSpec {
  std::vector<double> c;

  void validate() const;
  bool operator==(const SurfaceSpec&) const = default;
};

/// Two decoupled channels on (phi_dr, phi_qr, i_ds, i_qs): the d row weighs
/// (phi_dr, i_ds) and the q row weighs (phi_qr, i_qs) with the same spec.
Eigen::MatrixXd channel_surface_matrix(const SurfaceSpec& per_channel);

struct ControllerConfig {
  ControllerMode mode = ControllerMode::kSmmc;
  double k = 100.0;          // switching gain
  double lambda = 1.0;       // saturation amplitude
  double omega_layer = 2.0;  // boundary-layer half-width
  double epsilon = 1.0;      // gain margin used by the certificate
  double m_bound = 0.0;      // nonlinearity bound M
  double eta = 1.0;          // reaching-rate constant
  SwitchLaw switch_fn = SwitchLaw::kSaturation;
  bool equivalent_control = true;
  std::optional<double> st_lambda;  // super-twisting proportional gain
  std::optional<double> st_w;       // super-twisting integral gain
  SurfaceSpec surface{{1.0, 1.0}};  // (flux weight, current weight)

  void validate() const;
  double super_twisting_lambda() const;
  double super_twisting_w() const;

  bool operator==(const ControllerConfig&) const = default;
};

struct Smc2State {
  Eigen::VectorXd w;  // one integral term per channel
};

double sliding_surface(const SurfaceSpec& spec, std::span<const double> x_tilde);

/// -(C B)^-1 C A x. Throws SingularCB when |det(C B)| < 1e-12.
Eigen::VectorXd equivalent_control(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& c, const Eigen::VectorXd& x);

/// -k sign(s), sign(0) = 0.
double switching_control(double s, double k);

/// lambda * sat(s / omega_layer).
double saturation_control(double s, double lambda, double omega_layer);

/// Switching term of one channel under the selected law:
///   sign        -k lambda sign(s)
///   saturation  -k lambda sat(s / omega_layer)
///   proportional -k s
double switching_term(SwitchLaw law, double s, double k, double lambda, double omega_layer);

struct ControlOutput {
  Eigen::VectorXd u;
  Eigen::VectorXd s;  // per-channel surface values
};

ControlOutput smc1_control(const SubModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x_tilde, const ControllerConfig& cfg);

/// Scalar super-twisting step: u = -l2 sqrt|s| sign(s) + w, w <- w - W sign(s) dt.
std::pair<double, double> super_twisting(double s, double w, double l2, double w_gain, double dt);

std::pair<Eigen::VectorXd, Smc2State> smc2_control(const Eigen::VectorXd& s,
                                                   const Smc2State& state,
                                                   const ControllerConfig& cfg, double dt);

struct PartialControl {
  Eigen::VectorXd s;
  Eigen::VectorXd u_eq;
  Eigen::VectorXd u_sw;
  Eigen::VectorXd u;
};

struct SmmcOutput {
  Eigen::VectorXd u;               // fused control
  Eigen::VectorXd fused_surface;   // sum_i v_i s_i per channel
  std::vector<PartialControl> per_model;
};

SmmcOutput smmc_control(std::span<const SubModel> bank, const ValidityVector& validities,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& x_tilde,
                        const ControllerConfig& cfg);

}  // namespace smmc
