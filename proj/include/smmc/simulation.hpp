#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "smmc/controllers.hpp"
#include "smmc/dfig_plant.hpp"
#include "smmc/multimodel.hpp"
#include "smmc/trace.hpp"

namespace smmc {

/// Scalar reference/load signal: constant, single step, or a piecewise-linear
/// table held flat outside its first and last points.
class Signal {
 public:
  enum class Kind { kConstant, kStep, kTable };

  Signal() = default;
  static Signal constant(double value);
  static Signal step(double time, double from, double to);
  static Signal table(std::vector<std::pair<double, double>> points);

  double operator()(double t) const;
  std::vector<double> discontinuities() const;
  double peak_abs() const;

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  double step_time() const { return step_time_; }
  double from() const { return from_; }
  double to() const { return to_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

  /// Applies f to every level of the signal, keeping its shape.
  template <class F>
  Signal map(F&& f) const {
    Signal out = *this;
    out.value_ = f(value_);
    out.from_ = f(from_);
    out.to_ = f(to_);
    for (auto& p : out.points_) p.second = f(p.second);
    return out;
  }

  bool operator==(const Signal&) const = default;

 private:
  Kind kind_ = Kind::kConstant;
  double value_ = 0.0;
  double step_time_ = 0.0;
  double from_ = 0.0;
  double to_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

struct BankSpec {
  std::vector<double> speed_factors{0.5, 1.0, 1.5};  // times the nominal speed
  std::vector<double> speeds;                        // explicit speeds; overrides factors
  double delta = 0.1;                                // validity softening, rad/s
  std::vector<double> gains;                         // empty: controller k for every model
  std::vector<double> lyapunov_weights;              // empty: 1 for every model

  bool operator==(const BankSpec&) const = default;
};

struct Scenario {
  MachineParams params = MachineParams::repository_defaults();
  SignConvention convention = SignConvention::kCanonical;
  double horizon = 100.0;
  double dt = 1e-4;
  int record_stride = 10;
  Signal torque_ref = Signal::step(1.0, 0.0, -20.0);
  double flux_ref = 1.0;
  Signal load_torque;
  std::optional<Signal> speed_ref;    // default: field-oriented speed of torque_ref
  std::optional<double> rated_torque; // default: peak |torque_ref|
  PlantState initial_state;
  ControllerConfig controller;
  BankSpec bank;

  void validate() const;

  double rated() const;
  double nominal_speed() const;
  double speed_reference(double t) const;
  ReferenceState reference_at(double t) const;
  std::vector<double> discontinuities() const;

  std::vector<double> bank_speeds() const;
  std::vector<double> lyapunov_weights() const;
  /// Sub-model bank for SMMC.
  std::vector<SubModel> build_bank() const;
  /// Single model at the nominal speed, used by SMC1.
  SubModel nominal_model() const;

  bool operator==(const Scenario&) const = default;
};

/// Load that keeps the field-oriented reference an equilibrium:
/// C_l = T_ref - fv * omega_ref, with the same shape as the torque reference.
Signal balanced_load(const Signal& torque_ref, double flux_ref, const MachineParams& params,
                     SignConvention convention = SignConvention::kCanonical);

/// Classical four-stage step of dx/dt = f(t, x).
template <class Vec, class F>
Vec rk4_step(F&& f, double t, const Vec& x, double dt) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * dt, Vec(x + (0.5 * dt) * k1));
  const Vec k3 = f(t + 0.5 * dt, Vec(x + (0.5 * dt) * k2));
  const Vec k4 = f(t + dt, Vec(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Plant step with voltages and load held over the step. Throws NonFiniteState.
StateVector rk4_step(const DfigPlant& plant, const StateVector& x, const InputVector& u,
                     double load_torque, double dt);
PlantState rk4_step(const PlantState& state, const PlantInput& input, const MachineParams& params,
                    double dt, SignConvention convention = SignConvention::kCanonical);

struct RunOptions {
  ValidityRule validity_rule;  // empty: inverse speed distance with the bank's delta
  double activity_hysteresis = 1e-3;
};

SimTrace run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Runs independent scenarios concurrently; results keep input order.
std::vector<SimTrace> run_batch(std::span<const Scenario> scenarios,
                                const RunOptions& options = {});

struct Metrics {
  std::array<double, 2> chattering_tv{};       // per channel (d, q)
  std::array<std::size_t, 2> switch_count{};
  double sse = 0.0;
  double settling_time = 0.0;
  double ise = 0.0;

  double total_tv() const { return chattering_tv[0] + chattering_tv[1]; }
  std::size_t total_switches() const { return switch_count[0] + switch_count[1]; }
};

struct MetricsOptions {
  double tail_fraction = 0.2;
  double settling_band = 0.02;
  double hysteresis = 1e-3;
};

/// Throws EmptyTrace for a trace without samples.
Metrics compute_metrics(const SimTrace& trace, const MetricsOptions& options = {});

/// Control total variation (both channels) between two sample indices.
double control_variation(const SimTrace& trace, std::size_t first, std::size_t last,
                         double hysteresis = 1e-3);

}  // namespace smmc
