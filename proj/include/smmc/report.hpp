#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smmc/config.hpp"
#include "smmc/simulation.hpp"
#include "smmc/stability.hpp"

namespace smmc {

enum class Verdict { kPass, kFail, kTie, kNotApplicable };
std::string_view to_string(Verdict v);

/// One "better < worse" claim on a metric, evaluated on two runs.
struct OrderingClaim {
  std::string better;
  std::string worse;
  double better_value = 0.0;
  double worse_value = 0.0;
  Verdict verdict = Verdict::kNotApplicable;
};

struct OrderingVerdict {
  std::string metric;
  std::vector<OrderingClaim> claims;
  Verdict verdict = Verdict::kNotApplicable;
};

struct RunResult {
  std::string name;  // controller name, suffixed when listed more than once
  ControllerMode mode = ControllerMode::kSmmc;
  SimTrace trace;
  Metrics metrics;
  std::optional<StabilityCertificate> certificate;  // none for super-twisting
  MonitorReport reaching;
  std::vector<std::string> artifacts;
};

struct ComparisonReport {
  RunConfig config;
  std::vector<RunResult> runs;
  OrderingVerdict chattering;
  OrderingVerdict sse;
  std::vector<std::string> artifacts;

  bool verdicts_pass() const;
};

/// Stability certificate of the controller configured in `scenario`: the
/// nominal model for SMC1, the whole bank for SMMC, nothing for super-twisting.
std::optional<StabilityCertificate> certify(const Scenario& scenario);
MonitorOptions monitor_options(const Scenario& scenario);

/// Chattering (total control variation) and sse ordering verdicts; only the
/// metrics of `runs` are consulted.
OrderingVerdict chattering_verdict(const std::vector<RunResult>& runs);
OrderingVerdict sse_verdict(const std::vector<RunResult>& runs);

/// Simulates, measures and certifies one controller. Writes nothing.
RunResult evaluate(const Scenario& scenario, const std::string& name);

/// Runs the selected controllers concurrently on the shared scenario.
/// Throws ValidationError for fewer than two controllers. When `out_dir` is
/// non-empty, writes per-run CSVs and SVG plots plus report.json there.
ComparisonReport compare_controllers(const RunConfig& config, const std::string& out_dir = "");

/// Writes trace.csv and the torque/control/currents plots under dir/name.
std::vector<std::string> write_run_artifacts(const RunResult& run, const std::string& dir);

std::string report_json(const ComparisonReport& report);
std::string run_report_json(const RunConfig& config, const RunResult& run);
std::string certificate_json(const StabilityCertificate& cert);

}  // namespace smmc
