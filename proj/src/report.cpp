#include "smmc/report.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <map>

#include "json.hpp"
#include "smmc/error.hpp"
#include "smmc/plot.hpp"
#include "smmc/trace_io.hpp"

namespace smmc {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Ordering claims of the comparison, by controller.
constexpr std::pair<ControllerMode, ControllerMode> kChatteringClaims[] = {
    {ControllerMode::kSmmc, ControllerMode::kSmc2},
    {ControllerMode::kSmc2, ControllerMode::kSmc1},
};
constexpr std::pair<ControllerMode, ControllerMode> kSseClaims[] = {
    {ControllerMode::kSmmc, ControllerMode::kSmc1},
};

template <std::size_t N, class Metric>
OrderingVerdict ordering(const std::vector<RunResult>& runs, const char* name,
                         const std::pair<ControllerMode, ControllerMode> (&claims)[N],
                         Metric metric) {
  OrderingVerdict out;
  out.metric = name;
  auto add = [&](const RunResult& a, const RunResult& b, bool expect_equal) {
    OrderingClaim c;
    c.better = a.name;
    c.worse = b.name;
    c.better_value = metric(a);
    c.worse_value = metric(b);
    if (expect_equal) {
      c.verdict = c.better_value == c.worse_value ? Verdict::kTie : Verdict::kFail;
    } else if (c.better_value == c.worse_value) {
      c.verdict = Verdict::kTie;
    } else {
      c.verdict = c.better_value < c.worse_value ? Verdict::kPass : Verdict::kFail;
    }
    out.claims.push_back(c);
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      if (runs[i].mode == runs[j].mode) add(runs[i], runs[j], true);
    }
  }
  for (const auto& [better, worse] : claims) {
    for (const RunResult& a : runs) {
      if (a.mode != better) continue;
      for (const RunResult& b : runs) {
        if (b.mode == worse) add(a, b, false);
      }
    }
  }
  bool any_fail = false, any_pass = false, any_tie = false;
  for (const auto& c : out.claims) {
    any_fail = any_fail || c.verdict == Verdict::kFail;
    any_pass = any_pass || c.verdict == Verdict::kPass;
    any_tie = any_tie || c.verdict == Verdict::kTie;
  }
  if (any_fail) {
    out.verdict = Verdict::kFail;
  } else if (any_pass) {
    out.verdict = Verdict::kPass;
  } else if (any_tie) {
    out.verdict = Verdict::kTie;
  }
  return out;
}

json metrics_json(const Metrics& m) {
  return {{"chattering_tv", m.total_tv()},
          {"chattering_tv_d", m.chattering_tv[0]},
          {"chattering_tv_q", m.chattering_tv[1]},
          {"switch_count", m.total_switches()},
          {"sse", m.sse},
          {"settling_time", m.settling_time},
          {"ise", m.ise}};
}

json lyapunov_json(const LyapunovResult& r) {
  json j = {{"min_eig", r.min_eig}, {"ok", r.ok()}};
  j["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
  return j;
}

json certificate_object(const StabilityCertificate& cert) {
  json models = json::array();
  for (const auto& m : cert.models) {
    models.push_back({{"index", m.index},
                      {"omega_op", m.omega_op},
                      {"k", m.k},
                      {"k_min", m.k_min},
                      {"gain_ok", m.gain_ok},
                      {"reduced", lyapunov_json(m.reduced)},
                      {"full", lyapunov_json(m.full)},
                      {"ok", m.ok()}});
  }
  json j = {{"models", models}, {"ok", cert.ok()}};
  if (cert.reaching_violation_fraction) {
    j["reaching_violation_fraction"] = *cert.reaching_violation_fraction;
  }
  return j;
}

json verdict_json(const OrderingVerdict& v) {
  json claims = json::array();
  for (const auto& c : v.claims) {
    claims.push_back({{"better", c.better},
                      {"worse", c.worse},
                      {"better_value", c.better_value},
                      {"worse_value", c.worse_value},
                      {"verdict", std::string(to_string(c.verdict))}});
  }
  return {{"metric", v.metric}, {"verdict", std::string(to_string(v.verdict))}, {"claims", claims}};
}

json run_json(const RunResult& run) {
  json j = {{"controller", run.name},
            {"mode", std::string(to_string(run.mode))},
            {"samples", run.trace.size()},
            {"metrics", metrics_json(run.metrics)},
            {"reaching",
             {{"eligible", run.reaching.eligible},
              {"violations", run.reaching.violations},
              {"violation_fraction", run.reaching.violation_fraction}}},
            {"artifacts", run.artifacts}};
  j["certificate"] = run.certificate ? certificate_object(*run.certificate) : json(nullptr);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kTie: return "tie";
    case Verdict::kNotApplicable: return "not_applicable";
  }
  return "?";
}

bool ComparisonReport::verdicts_pass() const {
  return chattering.verdict != Verdict::kFail && sse.verdict != Verdict::kFail;
}

MonitorOptions monitor_options(const Scenario& scenario) {
  MonitorOptions opt;
  opt.eta = scenario.controller.eta;
  opt.omega_layer = scenario.controller.omega_layer;
  opt.break_times = scenario.discontinuities();
  return opt;
}

std::optional<StabilityCertificate> certify(const Scenario& scenario) {
  switch (scenario.controller.mode) {
    case ControllerMode::kSmc1: {
      const std::vector<SubModel> bank{scenario.nominal_model()};
      return certify_bank(bank, scenario.controller);
    }
    case ControllerMode::kSmmc: {
      const std::vector<SubModel> bank = scenario.build_bank();
      return certify_bank(bank, scenario.controller);
    }
    case ControllerMode::kSmc2: return std::nullopt;
  }
  return std::nullopt;
}

OrderingVerdict chattering_verdict(const std::vector<RunResult>& runs) {
  return ordering(runs, "chattering_tv", kChatteringClaims,
                  [](const RunResult& r) { return r.metrics.total_tv(); });
}

OrderingVerdict sse_verdict(const std::vector<RunResult>& runs) {
  return ordering(runs, "sse", kSseClaims, [](const RunResult& r) { return r.metrics.sse; });
}

RunResult evaluate(const Scenario& scenario, const std::string& name) {
  RunResult r;
  r.name = name;
  r.mode = scenario.controller.mode;
  try {
    r.trace = run_scenario(scenario);
    r.metrics = compute_metrics(r.trace);
    r.reaching = reaching_monitor(r.trace, monitor_options(scenario));
    r.certificate = certify(scenario);
  } catch (const Error& e) {
    throw Error(e.kind(), name + ": " + e.what());
  }
  if (r.certificate) r.certificate->reaching_violation_fraction = r.reaching.violation_fraction;
  return r;
}

std::vector<std::string> write_run_artifacts(const RunResult& run, const std::string& dir) {
  const fs::path base = fs::path(dir) / run.name;
  ensure_dir(base);
  const SimTrace& tr = run.trace;
  std::vector<std::string> paths;

  const fs::path csv = base / "trace.csv";
  write_trace_csv(tr, csv.string());
  paths.push_back(csv.string());

  auto plot = [&](const char* file, const std::string& title, const char* y_label,
                  std::vector<PlotSeries> series) {
    PlotSpec spec;
    spec.title = run.name + ": " + title;
    spec.y_label = y_label;
    const fs::path path = base / file;
    write_svg(path.string(), spec, tr.t, series);
    paths.push_back(path.string());
  };
  plot("torque.svg", "electromagnetic torque", "N m",
       {{"T_e", tr.te}, {"T_ref", tr.te_ref}});
  plot("control.svg", "control", "V", {{"u_d", tr.u_d}, {"u_q", tr.u_q}});
  plot("currents.svg", "stator currents", "A", {{"i_ds", tr.i_ds}, {"i_qs", tr.i_qs}});
  return paths;
}

ComparisonReport compare_controllers(const RunConfig& config, const std::string& out_dir) {
  if (config.compare_controllers.size() < 2) {
    throw Error(ErrorKind::kValidationError, "comparison needs >= 2 controllers");
  }
  ComparisonReport report;
  report.config = config;

  std::map<ControllerMode, int> seen;
  std::vector<std::pair<Scenario, std::string>> jobs;
  for (ControllerMode mode : config.compare_controllers) {
    std::string name(to_string(mode));
    if (const int n = ++seen[mode]; n > 1) name += "_" + std::to_string(n);
    jobs.emplace_back(config.scenario_for(mode), name);
  }

  std::vector<std::future<RunResult>> futures;
  for (const auto& job : jobs) {
    futures.push_back(
        std::async(std::launch::async, [&job] { return evaluate(job.first, job.second); }));
  }
  for (auto& f : futures) report.runs.push_back(f.get());

  report.chattering = chattering_verdict(report.runs);
  report.sse = sse_verdict(report.runs);

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    for (RunResult& run : report.runs) {
      run.artifacts = write_run_artifacts(run, out_dir);
      report.artifacts.insert(report.artifacts.end(), run.artifacts.begin(), run.artifacts.end());
    }
    const fs::path path = fs::path(out_dir) / "report.json";
    report.artifacts.push_back(path.string());
    write_text(path, report_json(report));
  }
  return report;
}

std::string report_json(const ComparisonReport& report) {
  json runs = json::array();
  for (const RunResult& run : report.runs) runs.push_back(run_json(run));
  json j = {{"config", json::parse(serialize_config(report.config))},
            {"runs", runs},
            {"verdicts",
             {{"chattering", verdict_json(report.chattering)},
              {"sse", verdict_json(report.sse)},
              {"all_pass", report.verdicts_pass()}}},
            {"artifacts", report.artifacts}};
  return j.dump(2) + "\n";
}

std::string run_report_json(const RunConfig& config, const RunResult& run) {
  json j = {{"config", json::parse(serialize_config(config))}, {"run", run_json(run)}};
  return j.dump(2) + "\n";
}

std::string certificate_json(const StabilityCertificate& cert) {
  return certificate_object(cert).dump(2) + "\n";
}

}  // namespace smmc
