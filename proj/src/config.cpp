#include "smmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "smmc/error.hpp"

namespace smmc {
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::kValidationError, what); }

// Reads one JSON object, rejecting keys outside `allowed`.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid((path_.empty() ? "config" : path_) + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j_.items()) {
      if (!keys.count(item.key())) invalid("unknown key '" + qualified(item.key()) + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::optional<double> number(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number()) invalid(qualified(key) + " must be a number");
    return v.get<double>();
  }

  std::optional<int> integer(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) invalid(qualified(key) + " must be an integer");
    return v.get<int>();
  }

  std::optional<bool> boolean(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_boolean()) invalid(qualified(key) + " must be true or false");
    return v.get<bool>();
  }

  std::optional<std::string> string(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_string()) invalid(qualified(key) + " must be a string");
    return v.get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_array()) invalid(qualified(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) invalid(qualified(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json* child(const char* key) const { return has(key) ? &j_.at(key) : nullptr; }
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
};

template <class T>
void assign(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

Signal parse_signal(const json& j, const std::string& path) {
  if (j.is_number()) return Signal::constant(j.get<double>());
  const Section s(j, path, {"type", "value", "time", "from", "to", "points"});
  const std::string type = s.string("type").value_or("constant");
  auto required = [&](const char* key) {
    const auto v = s.number(key);
    if (!v) invalid(s.qualified(key) + " is required for a " + type + " signal");
    return *v;
  };
  if (type == "constant") return Signal::constant(required("value"));
  if (type == "step") return Signal::step(required("time"), required("from"), required("to"));
  if (type == "table") {
    const json* pts = s.child("points");
    if (!pts || !pts->is_array() || pts->empty()) {
      invalid(s.qualified("points") + " must be a non-empty array of [t, value] pairs");
    }
    std::vector<std::pair<double, double>> points;
    for (const json& p : *pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        invalid(s.qualified("points") + " entries must be [t, value]");
      }
      points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return Signal::table(std::move(points));
  }
  invalid(s.qualified("type") + " in {constant, step, table}");
}

json signal_json(const Signal& s) {
  switch (s.kind()) {
    case Signal::Kind::kConstant: return {{"type", "constant"}, {"value", s.value()}};
    case Signal::Kind::kStep:
      return {{"type", "step"}, {"time", s.step_time()}, {"from", s.from()}, {"to", s.to()}};
    case Signal::Kind::kTable: {
      json pts = json::array();
      for (const auto& p : s.points()) pts.push_back({p.first, p.second});
      return {{"type", "table"}, {"points", pts}};
    }
  }
  return {};
}

MachineParams parse_machine(const json& j, SignConvention& convention) {
  const Section s(j, "machine", {"rs", "rr", "ls", "lr", "lm", "j", "p", "fv", "convention"});
  MachineParams m = MachineParams::repository_defaults();
  assign(m.rs, s.number("rs"));
  assign(m.rr, s.number("rr"));
  assign(m.ls, s.number("ls"));
  assign(m.lr, s.number("lr"));
  assign(m.lm, s.number("lm"));
  assign(m.j, s.number("j"));
  assign(m.pole_pairs, s.integer("p"));
  assign(m.fv, s.number("fv"));
  if (const auto c = s.string("convention")) {
    if (*c == "canonical") {
      convention = SignConvention::kCanonical;
    } else if (*c == "as_printed_eq3") {
      convention = SignConvention::kAsPrintedEq3;
    } else {
      invalid("machine.convention in {canonical, as_printed_eq3}");
    }
  }
  m.validate();
  return m;
}

#define SMMC_CONTROLLER_KEYS                                                                   \
  "k", "lambda", "omega_layer", "epsilon", "m_bound", "eta", "switch_fn", "equivalent_control", \
      "st_lambda", "st_w", "surface"

// Applies the controller fields present in `s` on top of `cfg`.
void apply_controller_fields(const Section& s, ControllerConfig& cfg, bool& m_bound_given) {
  assign(cfg.k, s.number("k"));
  assign(cfg.lambda, s.number("lambda"));
  assign(cfg.omega_layer, s.number("omega_layer"));
  assign(cfg.epsilon, s.number("epsilon"));
  if (const auto m = s.number("m_bound")) {
    cfg.m_bound = *m;
    m_bound_given = true;
  }
  assign(cfg.eta, s.number("eta"));
  if (const auto law = s.string("switch_fn")) cfg.switch_fn = parse_switch_law(*law);
  assign(cfg.equivalent_control, s.boolean("equivalent_control"));
  if (const auto v = s.number("st_lambda")) cfg.st_lambda = *v;
  if (const auto v = s.number("st_w")) cfg.st_w = *v;
  if (const auto c = s.numbers("surface")) {
    if (c->size() != 2) invalid(s.qualified("surface") + " is [flux_weight, current_weight]");
    cfg.surface.c = *c;
  }
}

ControllerConfig mode_defaults(ControllerMode mode, const MachineParams& m) {
  ControllerConfig cfg;
  cfg.mode = mode;
  // Flux error weighted in magnetizing-current units.
  cfg.surface.c = {1.0 / m.lm, 1.0};
  switch (mode) {
    case ControllerMode::kSmc1:
      cfg.switch_fn = SwitchLaw::kSign;
      cfg.equivalent_control = false;
      break;
    case ControllerMode::kSmc2:
      cfg.switch_fn = SwitchLaw::kSign;
      cfg.equivalent_control = false;
      break;
    case ControllerMode::kSmmc:
      cfg.switch_fn = SwitchLaw::kSaturation;
      cfg.equivalent_control = true;
      break;
  }
  return cfg;
}

json controller_json(const ControllerConfig& c) {
  json j = {{"k", c.k},
            {"lambda", c.lambda},
            {"omega_layer", c.omega_layer},
            {"epsilon", c.epsilon},
            {"m_bound", c.m_bound},
            {"eta", c.eta},
            {"switch_fn", std::string(to_string(c.switch_fn))},
            {"equivalent_control", c.equivalent_control},
            {"surface", c.surface.c}};
  if (c.st_lambda) j["st_lambda"] = *c.st_lambda;
  if (c.st_w) j["st_w"] = *c.st_w;
  return j;
}

PlantState parse_state(const json& j) {
  const Section s(j, "scenario.initial_state", {"phi_dr", "phi_qr", "i_ds", "i_qs", "omega"});
  PlantState x;
  assign(x.phi_dr, s.number("phi_dr"));
  assign(x.phi_qr, s.number("phi_qr"));
  assign(x.i_ds, s.number("i_ds"));
  assign(x.i_qs, s.number("i_qs"));
  assign(x.omega, s.number("omega"));
  return x;
}

// Largest frozen-speed mismatch of the bank, as a bound on ||(A(w) - A(w_i)) x|| / ||x||.
double default_nonlinear_bound(const Scenario& sc) {
  const Eigen::Matrix4d slope = electromagnetic_matrix_slope(sc.params, sc.convention);
  const double slope_norm = Eigen::JacobiSVD<Eigen::Matrix4d>(slope).singularValues()(0);
  const double nominal = sc.nominal_speed();
  double spread = 0.0;
  for (double w : sc.bank_speeds()) spread = std::max(spread, std::abs(w - nominal));
  return slope_norm * spread;
}

}  // namespace

Scenario RunConfig::scenario_for(ControllerMode mode) const {
  Scenario sc = scenario;
  sc.controller = controllers.at(mode);
  return sc;
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError, e.what());
  }
  const Section top(root, "",
                    {"machine", "scenario", "controller", "bank", "compare", "output"});
  if (!top.has("machine")) invalid("machine section is required");

  RunConfig cfg;
  Scenario& sc = cfg.scenario;
  sc.params = parse_machine(*top.child("machine"), sc.convention);

  std::optional<Signal> load;
  if (const json* j = top.child("scenario")) {
    const Section s(*j, "scenario",
                    {"horizon", "dt", "record_stride", "flux_ref", "torque_ref", "load_torque",
                     "speed_ref", "rated_torque", "initial_state"});
    assign(sc.horizon, s.number("horizon"));
    assign(sc.dt, s.number("dt"));
    assign(sc.record_stride, s.integer("record_stride"));
    assign(sc.flux_ref, s.number("flux_ref"));
    if (const json* t = s.child("torque_ref")) sc.torque_ref = parse_signal(*t, "scenario.torque_ref");
    if (const json* l = s.child("load_torque")) load = parse_signal(*l, "scenario.load_torque");
    if (const json* w = s.child("speed_ref")) sc.speed_ref = parse_signal(*w, "scenario.speed_ref");
    if (const auto r = s.number("rated_torque")) sc.rated_torque = *r;
    if (const json* x = s.child("initial_state")) sc.initial_state = parse_state(*x);
  }
  if (!(sc.dt > 0.0)) invalid("dt > 0");
  if (sc.flux_ref == 0.0) throw Error(ErrorKind::kZeroFlux, "flux_ref = 0");
  if (!(sc.flux_ref > 0.0)) invalid("flux_ref > 0");
  sc.load_torque = load ? *load : balanced_load(sc.torque_ref, sc.flux_ref, sc.params, sc.convention);

  if (const json* j = top.child("bank")) {
    const Section s(*j, "bank", {"speed_factors", "speeds", "delta", "gains", "lyapunov_weights"});
    assign(sc.bank.speed_factors, s.numbers("speed_factors"));
    assign(sc.bank.speeds, s.numbers("speeds"));
    assign(sc.bank.delta, s.number("delta"));
    assign(sc.bank.gains, s.numbers("gains"));
    assign(sc.bank.lyapunov_weights, s.numbers("lyapunov_weights"));
  }

  ControllerMode run_mode = ControllerMode::kSmmc;
  std::map<ControllerMode, bool> m_bound_given;
  for (ControllerMode mode : {ControllerMode::kSmc1, ControllerMode::kSmc2, ControllerMode::kSmmc}) {
    cfg.controllers[mode] = mode_defaults(mode, sc.params);
    m_bound_given[mode] = false;
  }
  if (const json* j = top.child("controller")) {
    const Section s(*j, "controller", {"mode", SMMC_CONTROLLER_KEYS, "smc1", "smc2", "smmc"});
    if (const auto m = s.string("mode")) run_mode = parse_controller_mode(*m);
    for (auto& [mode, c] : cfg.controllers) {
      apply_controller_fields(s, c, m_bound_given[mode]);
      const std::string name(to_string(mode));
      if (const json* block = s.child(name.c_str())) {
        const Section b(*block, "controller." + name, {SMMC_CONTROLLER_KEYS});
        apply_controller_fields(b, c, m_bound_given[mode]);
      }
    }
  }
  for (auto& [mode, c] : cfg.controllers) {
    if (!m_bound_given[mode]) c.m_bound = default_nonlinear_bound(sc);
  }
  sc.controller = cfg.controllers.at(run_mode);

  if (const json* j = top.child("compare")) {
    const Section s(*j, "compare", {"controllers"});
    if (const json* list = s.child("controllers")) {
      if (!list->is_array()) invalid("compare.controllers must be an array of names");
      cfg.compare_controllers.clear();
      for (const json& name : *list) {
        if (!name.is_string()) invalid("compare.controllers must be an array of names");
        cfg.compare_controllers.push_back(parse_controller_mode(name.get<std::string>()));
      }
    }
  }
  if (const json* j = top.child("output")) {
    const Section s(*j, "output", {"dir"});
    assign(cfg.output_dir, s.string("dir"));
  }

  sc.validate();
  for (const auto& [mode, c] : cfg.controllers) {
    Scenario probe = sc;
    probe.controller = c;
    probe.validate();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const MachineParams& m = sc.params;
  json machine = {{"rs", m.rs}, {"rr", m.rr}, {"ls", m.ls},         {"lr", m.lr},
                  {"lm", m.lm}, {"j", m.j},   {"p", m.pole_pairs}, {"fv", m.fv},
                  {"convention", sc.convention == SignConvention::kCanonical ? "canonical"
                                                                             : "as_printed_eq3"}};
  json scenario = {{"horizon", sc.horizon},
                   {"dt", sc.dt},
                   {"record_stride", sc.record_stride},
                   {"flux_ref", sc.flux_ref},
                   {"torque_ref", signal_json(sc.torque_ref)},
                   {"load_torque", signal_json(sc.load_torque)},
                   {"initial_state",
                    {{"phi_dr", sc.initial_state.phi_dr},
                     {"phi_qr", sc.initial_state.phi_qr},
                     {"i_ds", sc.initial_state.i_ds},
                     {"i_qs", sc.initial_state.i_qs},
                     {"omega", sc.initial_state.omega}}}};
  if (sc.speed_ref) scenario["speed_ref"] = signal_json(*sc.speed_ref);
  if (sc.rated_torque) scenario["rated_torque"] = *sc.rated_torque;

  json controller = {{"mode", std::string(to_string(sc.controller.mode))}};
  for (const auto& [mode, c] : cfg.controllers) {
    controller[std::string(to_string(mode))] = controller_json(c);
  }

  json bank = {{"speed_factors", sc.bank.speed_factors},
               {"speeds", sc.bank.speeds},
               {"delta", sc.bank.delta},
               {"gains", sc.bank.gains},
               {"lyapunov_weights", sc.bank.lyapunov_weights}};

  json compare_list = json::array();
  for (ControllerMode mode : cfg.compare_controllers) compare_list.push_back(std::string(to_string(mode)));

  json root = {{"machine", machine},
               {"scenario", scenario},
               {"controller", controller},
               {"bank", bank},
               {"compare", {{"controllers", compare_list}}},
               {"output", {{"dir", cfg.output_dir}}}};
  return root.dump(2) + "\n";
}

}  // namespace smmc
