#include "smmc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <string>

#include "smmc/error.hpp"
#include "smmc/stability.hpp"

namespace smmc {

Signal Signal::constant(double value) {
  Signal s;
  s.kind_ = Kind::kConstant;
  s.value_ = value;
  return s;
}

Signal Signal::step(double time, double from, double to) {
  Signal s;
  s.kind_ = Kind::kStep;
  s.step_time_ = time;
  s.from_ = from;
  s.to_ = to;
  return s;
}

Signal Signal::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw Error(ErrorKind::kValidationError, "table has at least one point");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first)) {
      throw Error(ErrorKind::kValidationError, "table times strictly increasing");
    }
  }
  Signal s;
  s.kind_ = Kind::kTable;
  s.points_ = std::move(points);
  return s;
}

double Signal::operator()(double t) const {
  switch (kind_) {
    case Kind::kConstant: return value_;
    case Kind::kStep: return t >= step_time_ ? to_ : from_;
    case Kind::kTable: {
      if (t <= points_.front().first) return points_.front().second;
      if (t >= points_.back().first) return points_.back().second;
      const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                       [](double v, const auto& p) { return v < p.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

std::vector<double> Signal::discontinuities() const {
  if (kind_ == Kind::kStep && from_ != to_) return {step_time_};
  return {};
}

double Signal::peak_abs() const {
  switch (kind_) {
    case Kind::kConstant: return std::abs(value_);
    case Kind::kStep: return std::max(std::abs(from_), std::abs(to_));
    case Kind::kTable: {
      double m = 0.0;
      for (const auto& p : points_) m = std::max(m, std::abs(p.second));
      return m;
    }
  }
  return 0.0;
}

Signal balanced_load(const Signal& torque_ref, double flux_ref, const MachineParams& params,
                     SignConvention convention) {
  return torque_ref.map([&](double torque) {
    return torque - params.fv * field_oriented_speed(torque, flux_ref, params, convention);
  });
}

// --- Scenario -------------------------------------------------------------

void Scenario::validate() const {
  params.validate();
  if (!(dt > 0.0)) throw Error(ErrorKind::kValidationError, "dt > 0");
  if (!(horizon >= dt)) throw Error(ErrorKind::kValidationError, "horizon >= dt");
  if (record_stride < 1) throw Error(ErrorKind::kValidationError, "record_stride >= 1");
  if (flux_ref == 0.0) throw Error(ErrorKind::kZeroFlux, "flux_ref = 0");
  if (!(flux_ref > 0.0)) throw Error(ErrorKind::kValidationError, "flux_ref > 0");
  if (rated_torque && !(*rated_torque > 0.0)) {
    throw Error(ErrorKind::kValidationError, "rated_torque > 0");
  }
  if (!initial_state.is_finite()) throw Error(ErrorKind::kNonFiniteState, "initial state");
  controller.validate();

  if (!(bank.delta > 0.0)) throw Error(ErrorKind::kValidationError, "bank.delta > 0");
  const std::size_t n = bank_speeds().size();
  if (n == 0) throw Error(ErrorKind::kEmptyBank, "bank has no operating speeds");
  if (!bank.gains.empty() && bank.gains.size() != n) {
    throw Error(ErrorKind::kValidationError, "bank.gains has one entry per sub-model");
  }
  for (double k : bank.gains) {
    if (!(k > 0.0)) throw Error(ErrorKind::kValidationError, "bank.gains > 0");
  }
  if (!bank.lyapunov_weights.empty() && bank.lyapunov_weights.size() != n) {
    throw Error(ErrorKind::kValidationError, "bank.lyapunov_weights has one entry per sub-model");
  }
  for (double p : bank.lyapunov_weights) {
    if (!(p > 0.0)) throw Error(ErrorKind::kNonPositiveWeight, "bank.lyapunov_weights > 0");
  }
}

double Scenario::rated() const {
  if (rated_torque) return *rated_torque;
  return torque_ref.peak_abs();
}

double Scenario::nominal_speed() const {
  // Speed of the peak torque level, keeping its sign.
  double peak = 0.0;
  switch (torque_ref.kind()) {
    case Signal::Kind::kConstant: peak = torque_ref.value(); break;
    case Signal::Kind::kStep:
      peak = std::abs(torque_ref.to()) >= std::abs(torque_ref.from()) ? torque_ref.to()
                                                                       : torque_ref.from();
      break;
    case Signal::Kind::kTable:
      for (const auto& p : torque_ref.points()) {
        if (std::abs(p.second) > std::abs(peak)) peak = p.second;
      }
      break;
  }
  if (rated_torque) peak = std::copysign(*rated_torque, peak == 0.0 ? 1.0 : peak);
  return field_oriented_speed(peak, flux_ref, params, convention);
}

double Scenario::speed_reference(double t) const {
  if (speed_ref) return (*speed_ref)(t);
  return field_oriented_speed(torque_ref(t), flux_ref, params, convention);
}

ReferenceState Scenario::reference_at(double t) const {
  return reference_state(torque_ref(t), flux_ref, speed_reference(t), params);
}

std::vector<double> Scenario::discontinuities() const {
  std::vector<double> out = torque_ref.discontinuities();
  if (speed_ref) {
    for (double b : speed_ref->discontinuities()) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> Scenario::bank_speeds() const {
  if (!bank.speeds.empty()) return bank.speeds;
  std::vector<double> speeds;
  const double nominal = nominal_speed();
  for (double f : bank.speed_factors) speeds.push_back(f * nominal);
  return speeds;
}

std::vector<double> Scenario::lyapunov_weights() const {
  if (!bank.lyapunov_weights.empty()) return bank.lyapunov_weights;
  return std::vector<double>(bank_speeds().size(), 1.0);
}

std::vector<SubModel> Scenario::build_bank() const {
  const std::vector<double> speeds = bank_speeds();
  const Eigen::MatrixXd alpha = channel_surface_matrix(controller.surface);
  std::vector<SubModel> out;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    const double k = bank.gains.empty() ? controller.k : bank.gains[i];
    out.push_back(
        linearize_submodel(params, speeds[i], alpha, k, static_cast<int>(i), convention));
  }
  return out;
}

SubModel Scenario::nominal_model() const {
  return linearize_submodel(params, nominal_speed(), channel_surface_matrix(controller.surface),
                            controller.k, 0, convention);
}

// --- Integration ----------------------------------------------------------

StateVector rk4_step(const DfigPlant& plant, const StateVector& x, const InputVector& u,
                     double load_torque, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kValidationError, "dt > 0");
  const StateVector next = rk4_step(
      [&](double, const StateVector& y) { return plant.derivative(y, u, load_torque); }, 0.0, x,
      dt);
  if (!next.allFinite()) throw Error(ErrorKind::kNonFiniteState, "state after step");
  return next;
}

PlantState rk4_step(const PlantState& state, const PlantInput& input, const MachineParams& params,
                    double dt, SignConvention convention) {
  const DfigPlant plant(params, convention);
  return PlantState::from_vector(
      rk4_step(plant, state.to_vector(), input.voltage(), input.c_l, dt));
}

// --- Closed loop ----------------------------------------------------------

namespace {

struct ControlSample {
  InputVector u = InputVector::Zero();
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  double v_lyap = 0.0;
  std::vector<double> validities;
};

class ClosedLoop {
 public:
  ClosedLoop(const Scenario& sc, const RunOptions& options)
      : sc_(sc), cfg_(sc.controller), weights_(sc.lyapunov_weights()) {
    switch (cfg_.mode) {
      case ControllerMode::kSmc1: single_ = sc.nominal_model(); break;
      case ControllerMode::kSmc2:
        smc2_.w = Eigen::VectorXd::Zero(2);
        alpha_ = channel_surface_matrix(cfg_.surface);
        break;
      case ControllerMode::kSmmc:
        bank_ = sc.build_bank();
        rule_ = options.validity_rule ? options.validity_rule : speed_distance_rule(sc.bank.delta);
        break;
    }
  }

  std::size_t validity_columns() const { return bank_.empty() ? 1 : bank_.size(); }

  // Evaluates the controller; `advance` commits controller state (SMC2 integrator).
  ControlSample evaluate(const StateVector& x, const ReferenceState& ref, bool advance) {
    const Eigen::VectorXd xe = x.head<4>();
    const Eigen::VectorXd x_tilde = xe - ref.electromagnetic();
    ControlSample out;
    switch (cfg_.mode) {
      case ControllerMode::kSmc1: {
        const ControlOutput c = smc1_control(single_, xe, x_tilde, cfg_);
        out.u = c.u;
        out.s = c.s;
        out.v_lyap = out.s.squaredNorm();
        out.validities = {1.0};
        break;
      }
      case ControllerMode::kSmc2: {
        const Eigen::VectorXd s = alpha_ * x_tilde;
        auto [u, next] = smc2_control(s, smc2_, cfg_, sc_.dt);
        if (advance) smc2_ = std::move(next);
        out.u = u;
        out.s = s;
        out.v_lyap = out.s.squaredNorm();
        out.validities = {1.0};
        break;
      }
      case ControllerMode::kSmmc: {
        const ValidityVector v = rule_(x(4), bank_);
        const SmmcOutput c = smmc_control(bank_, v, xe, x_tilde, cfg_);
        out.u = c.u;
        out.s = c.fused_surface;
        std::vector<double> w, s;
        for (std::size_t i = 0; i < c.per_model.size(); ++i) {
          for (Eigen::Index ch = 0; ch < c.per_model[i].s.size(); ++ch) {
            w.push_back(weights_[i]);
            s.push_back(c.per_model[i].s(ch));
          }
        }
        out.v_lyap = nonquadratic_V(w, s);
        out.validities.assign(v.values().begin(), v.values().end());
        break;
      }
    }
    return out;
  }

 private:
  const Scenario& sc_;
  ControllerConfig cfg_;
  std::vector<double> weights_;
  SubModel single_;
  Eigen::MatrixXd alpha_;
  Smc2State smc2_;
  std::vector<SubModel> bank_;
  ValidityRule rule_;
};

void record(SimTrace& tr, double t, const StateVector& x, double te, double te_ref,
            const ControlSample& c, const ControlActivity& act_d, const ControlActivity& act_q) {
  tr.t.push_back(t);
  tr.phi_dr.push_back(x(0));
  tr.phi_qr.push_back(x(1));
  tr.i_ds.push_back(x(2));
  tr.i_qs.push_back(x(3));
  tr.omega.push_back(x(4));
  tr.te.push_back(te);
  tr.te_ref.push_back(te_ref);
  tr.u_d.push_back(c.u(0));
  tr.u_q.push_back(c.u(1));
  tr.s_d.push_back(c.s(0));
  tr.s_q.push_back(c.s(1));
  tr.s_fused.push_back(c.s.norm());
  tr.v_lyap.push_back(c.v_lyap);
  for (std::size_t i = 0; i < c.validities.size(); ++i) tr.validities[i].push_back(c.validities[i]);
  tr.cum_tv_d.push_back(act_d.total_variation());
  tr.cum_tv_q.push_back(act_q.total_variation());
  tr.cum_switch_d.push_back(act_d.switches());
  tr.cum_switch_q.push_back(act_q.switches());
}

}  // namespace

SimTrace run_scenario(const Scenario& sc, const RunOptions& options) {
  sc.validate();
  const DfigPlant plant(sc.params, sc.convention);
  ClosedLoop loop(sc, options);

  const long long steps = std::max(1LL, std::llround(sc.horizon / sc.dt));
  const auto stride = static_cast<long long>(sc.record_stride);

  SimTrace trace;
  trace.validities.resize(loop.validity_columns());
  const std::size_t expected = static_cast<std::size_t>(steps / stride + 2);
  for (auto* col : {&trace.t, &trace.u_d, &trace.u_q}) col->reserve(expected);

  ControlActivity act_d(options.activity_hysteresis);
  ControlActivity act_q(options.activity_hysteresis);

  StateVector x = sc.initial_state.to_vector();
  for (long long n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * sc.dt;
    try {
      const ReferenceState ref = sc.reference_at(t);
      const bool last = n == steps;
      const ControlSample c = loop.evaluate(x, ref, !last);
      act_d.push(c.u(0));
      act_q.push(c.u(1));
      if (n % stride == 0 || last) {
        record(trace, t, x, plant.torque(x), sc.torque_ref(t), c, act_d, act_q);
      }
      if (!last) x = rk4_step(plant, x, c.u, sc.load_torque(t), sc.dt);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "at t = " << t << ": " << e.what();
      throw Error(e.kind(), msg.str());
    }
  }
  return trace;
}

std::vector<SimTrace> run_batch(std::span<const Scenario> scenarios, const RunOptions& options) {
  std::vector<std::future<SimTrace>> jobs;
  jobs.reserve(scenarios.size());
  for (const Scenario& sc : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&sc, &options] { return run_scenario(sc, options); }));
  }
  std::vector<SimTrace> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

// --- Metrics --------------------------------------------------------------

double control_variation(const SimTrace& tr, std::size_t first, std::size_t last,
                         double hysteresis) {
  if (tr.size() == 0) throw Error(ErrorKind::kEmptyTrace, "trace has no samples");
  last = std::min(last, tr.size() - 1);
  if (first >= last) return 0.0;
  if (tr.has_step_rate_activity()) {
    return (tr.cum_tv_d[last] - tr.cum_tv_d[first]) + (tr.cum_tv_q[last] - tr.cum_tv_q[first]);
  }
  ControlActivity d(hysteresis), q(hysteresis);
  for (std::size_t i = first; i <= last; ++i) {
    d.push(tr.u_d[i]);
    q.push(tr.u_q[i]);
  }
  return d.total_variation() + q.total_variation();
}

Metrics compute_metrics(const SimTrace& tr, const MetricsOptions& options) {
  if (tr.size() == 0) throw Error(ErrorKind::kEmptyTrace, "trace has no samples");
  const std::size_t n = tr.size();
  Metrics m;

  if (tr.has_step_rate_activity()) {
    m.chattering_tv = {tr.cum_tv_d.back(), tr.cum_tv_q.back()};
    m.switch_count = {tr.cum_switch_d.back(), tr.cum_switch_q.back()};
  } else {
    ControlActivity d(options.hysteresis), q(options.hysteresis);
    for (std::size_t i = 0; i < n; ++i) {
      d.push(tr.u_d[i]);
      q.push(tr.u_q[i]);
    }
    m.chattering_tv = {d.total_variation(), q.total_variation()};
    m.switch_count = {d.switches(), q.switches()};
  }

  std::vector<double> err(n);
  double peak_ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err[i] = std::abs(tr.te[i] - tr.te_ref[i]);
    peak_ref = std::max(peak_ref, std::abs(tr.te_ref[i]));
  }

  const double t0 = tr.t.front();
  const double t_end = tr.t.back();
  const double tail_start = t_end - options.tail_fraction * (t_end - t0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.t[i] >= tail_start) {
      sum += err[i];
      ++count;
    }
  }
  m.sse = count == 0 ? err.back() : sum / static_cast<double>(count);

  const double band = options.settling_band * peak_ref;
  std::size_t settle = 0;
  bool settled = true;
  for (std::size_t i = n; i-- > 0;) {
    if (err[i] > band) {
      settled = i + 1 < n;
      settle = i + 1;
      break;
    }
  }
  m.settling_time = settled ? tr.t[settle] : t_end;

  for (std::size_t i = 1; i < n; ++i) {
    m.ise += 0.5 * (err[i] * err[i] + err[i - 1] * err[i - 1]) * (tr.t[i] - tr.t[i - 1]);
  }
  return m;
}

}  // namespace smmc
