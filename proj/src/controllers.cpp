#include "smmc/controllers.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "smmc/error.hpp"

namespace smmc {
namespace {

double sign(double s) { return (s > 0.0) - (s < 0.0); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::kValidationError, what);
}

}  // namespace

std::string_view to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::kSmc1: return "smc1";
    case ControllerMode::kSmc2: return "smc2";
    case ControllerMode::kSmmc: return "smmc";
  }
  return "?";
}

std::string_view to_string(SwitchLaw law) {
  switch (law) {
    case SwitchLaw::kSign: return "sign";
    case SwitchLaw::kSaturation: return "saturation";
    case SwitchLaw::kProportional: return "proportional";
  }
  return "?";
}

ControllerMode parse_controller_mode(std::string_view name) {
  if (name == "smc1") return ControllerMode::kSmc1;
  if (name == "smc2") return ControllerMode::kSmc2;
  if (name == "smmc") return ControllerMode::kSmmc;
  throw Error(ErrorKind::kValidationError, "controller in {smc1, smc2, smmc}, got '" +
                                               std::string(name) + "'");
}

SwitchLaw parse_switch_law(std::string_view name) {
  if (name == "sign") return SwitchLaw::kSign;
  if (name == "saturation") return SwitchLaw::kSaturation;
  if (name == "proportional") return SwitchLaw::kProportional;
  throw Error(ErrorKind::kValidationError, "switch_fn in {sign, saturation, proportional}, got '" +
                                               std::string(name) + "'");
}

void SurfaceSpec::validate() const {
  if (c.empty()) throw Error(ErrorKind::kValidationError, "surface has at least one coefficient");
  for (double ci : c) require_positive(ci, "surface coefficients c_i > 0");
}

Eigen::MatrixXd channel_surface_matrix(const SurfaceSpec& spec) {
  spec.validate();
  if (spec.c.size() != 2) {
    throw Error(ErrorKind::kDimensionMismatch, "channel surface needs (flux, current) weights");
  }
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(2, 4);
  alpha(0, 0) = spec.c[0];
  alpha(0, 2) = spec.c[1];
  alpha(1, 1) = spec.c[0];
  alpha(1, 3) = spec.c[1];
  return alpha;
}

void ControllerConfig::validate() const {
  require_positive(k, "k > 0");
  require_positive(lambda, "lambda > 0");
  require_positive(omega_layer, "omega_layer > 0");
  require_positive(epsilon, "epsilon > 0");
  if (!(m_bound >= 0.0) || !std::isfinite(m_bound)) {
    throw Error(ErrorKind::kValidationError, "m_bound >= 0");
  }
  require_positive(eta, "eta > 0");
  if (st_lambda) require_positive(*st_lambda, "st_lambda > 0");
  if (st_w) require_positive(*st_w, "st_w > 0");
  surface.validate();
}

double ControllerConfig::super_twisting_lambda() const {
  return st_lambda.value_or(1.5 * std::sqrt(k));
}

double ControllerConfig::super_twisting_w() const { return st_w.value_or(1.1 * k); }

double sliding_surface(const SurfaceSpec& spec, std::span<const double> x_tilde) {
  if (spec.c.size() != x_tilde.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "surface row and state error lengths differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x_tilde.size(); ++i) s += spec.c[i] * x_tilde[i];
  return s;
}

Eigen::VectorXd equivalent_control(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& c, const Eigen::VectorXd& x) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows() ||
      c.rows() != b.cols() || x.size() != a.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "equivalent control operands do not conform");
  }
  const Eigen::MatrixXd cb = c * b;
  if (std::abs(cb.determinant()) < 1e-12) {
    throw Error(ErrorKind::kSingularCB, "C*B is singular; surface is not actuated");
  }
  return -cb.fullPivLu().solve(c * (a * x));
}

double switching_control(double s, double k) { return -k * sign(s); }

double saturation_control(double s, double lambda, double omega_layer) {
  if (std::abs(s) >= omega_layer) return lambda * sign(s);
  return lambda * (s / omega_layer);
}

double switching_term(SwitchLaw law, double s, double k, double lambda, double omega_layer) {
  switch (law) {
    case SwitchLaw::kSign: return switching_control(s, k * lambda);
    case SwitchLaw::kSaturation: return -k * saturation_control(s, lambda, omega_layer);
    case SwitchLaw::kProportional: return -k * s;
  }
  return 0.0;
}

ControlOutput smc1_control(const SubModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x_tilde, const ControllerConfig& cfg) {
  if (x.size() != model.state_dim() || x_tilde.size() != model.state_dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "state size does not match the sub-model");
  }
  ControlOutput out;
  out.s = model.alpha * x_tilde;
  out.u = cfg.equivalent_control ? Eigen::VectorXd(-model.eq_gain * x)
                                 : Eigen::VectorXd::Zero(model.input_dim());
  for (Eigen::Index ch = 0; ch < out.u.size(); ++ch) {
    out.u(ch) += switching_term(cfg.switch_fn, out.s(ch), model.k_gain, cfg.lambda,
                                cfg.omega_layer);
  }
  return out;
}

std::pair<double, double> super_twisting(double s, double w, double l2, double w_gain,
                                         double dt) {
  const double u = -l2 * std::sqrt(std::abs(s)) * sign(s) + w;
  return {u, w - w_gain * sign(s) * dt};
}

std::pair<Eigen::VectorXd, Smc2State> smc2_control(const Eigen::VectorXd& s,
                                                   const Smc2State& state,
                                                   const ControllerConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kValidationError, "dt > 0");
  if (state.w.size() != s.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "super-twisting state has wrong channel count");
  }
  const double l2 = cfg.super_twisting_lambda();
  const double wg = cfg.super_twisting_w();
  Eigen::VectorXd u(s.size());
  Smc2State next{Eigen::VectorXd(s.size())};
  for (Eigen::Index ch = 0; ch < s.size(); ++ch) {
    std::tie(u(ch), next.w(ch)) = super_twisting(s(ch), state.w(ch), l2, wg, dt);
  }
  return {u, next};
}

SmmcOutput smmc_control(std::span<const SubModel> bank, const ValidityVector& validities,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& x_tilde,
                        const ControllerConfig& cfg) {
  if (bank.empty()) throw Error(ErrorKind::kEmptyBank, "no sub-models");
  if (validities.size() != bank.size()) {
    throw Error(ErrorKind::kLengthMismatch, "validities vs bank size");
  }
  const Eigen::Index m = bank.front().input_dim();

  SmmcOutput out;
  out.u = Eigen::VectorXd::Zero(m);
  out.fused_surface = Eigen::VectorXd::Zero(m);
  out.per_model.reserve(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const SubModel& model = bank[i];
    if (model.input_dim() != m || model.state_dim() != x.size() ||
        x_tilde.size() != x.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "sub-model " + std::to_string(i));
    }
    PartialControl pc;
    pc.s = model.alpha * x_tilde;
    pc.u_eq = -model.eq_gain * x;
    pc.u_sw.resize(m);
    for (Eigen::Index ch = 0; ch < m; ++ch) {
      pc.u_sw(ch) =
          switching_term(cfg.switch_fn, pc.s(ch), model.k_gain, cfg.lambda, cfg.omega_layer);
    }
    pc.u = pc.u_eq + pc.u_sw;
    out.u += validities[i] * pc.u;
    out.fused_surface += validities[i] * pc.s;
    out.per_model.push_back(std::move(pc));
  }
  return out;
}

}  // namespace smmc
