// Command-line front end: run, compare, check-stability.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "smmc/config.hpp"
#include "smmc/error.hpp"
#include "smmc/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kVerdictFailed = 2;

// SMMC_OUT_DIR wins over --out and the config file.
std::string output_dir(const smmc::RunConfig& cfg, const std::string& flag) {
  if (const char* env = std::getenv("SMMC_OUT_DIR"); env && *env) return env;
  return flag.empty() ? cfg.output_dir : flag;
}

std::vector<smmc::ControllerMode> parse_list(const std::string& list) {
  std::vector<smmc::ControllerMode> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(smmc::parse_controller_mode(item));
  }
  return out;
}

void print_certificate(const smmc::StabilityCertificate& cert) {
  for (const auto& m : cert.models) {
    std::cout << "model " << m.index << " omega_op=" << m.omega_op << " k=" << m.k
              << " k_min=" << m.k_min << " gain=" << (m.gain_ok ? "ok" : "FAIL")
              << " reduced_min_eig=" << m.reduced.min_eig << " full_min_eig=" << m.full.min_eig
              << " residual=" << m.full.residual << '\n';
  }
  std::cout << "certificate: " << (cert.ok() ? "ok" : "FAIL") << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
  smmc::RunConfig cfg = smmc::load_config(config_path);
  const std::string dir = output_dir(cfg, out_flag);
  cfg.output_dir = dir;
  smmc::RunResult run = smmc::evaluate(cfg.scenario, std::string(to_string(cfg.scenario.controller.mode)));
  std::filesystem::create_directories(dir);
  run.artifacts = smmc::write_run_artifacts(run, dir);
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ofstream(path) << smmc::run_report_json(cfg, run);
  std::cout << run.name << ": tv=" << run.metrics.total_tv() << " switches="
            << run.metrics.total_switches() << " sse=" << run.metrics.sse
            << " settling=" << run.metrics.settling_time << '\n';
  std::cout << "report: " << path.string() << '\n';
  return kOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_flag,
                const std::string& controllers) {
  smmc::RunConfig cfg = smmc::load_config(config_path);
  if (!controllers.empty()) cfg.compare_controllers = parse_list(controllers);
  const std::string dir = output_dir(cfg, out_flag);
  cfg.output_dir = dir;
  const smmc::ComparisonReport report = smmc::compare_controllers(cfg, dir);
  for (const auto& run : report.runs) {
    std::cout << run.name << ": tv=" << run.metrics.total_tv()
              << " switches=" << run.metrics.total_switches() << " sse=" << run.metrics.sse
              << '\n';
  }
  std::cout << "chattering ordering: " << to_string(report.chattering.verdict) << '\n';
  std::cout << "sse ordering: " << to_string(report.sse.verdict) << '\n';
  std::cout << "report: " << (std::filesystem::path(dir) / "report.json").string() << '\n';
  return report.verdicts_pass() ? kOk : kVerdictFailed;
}

int cmd_check_stability(const std::string& config_path) {
  const smmc::RunConfig cfg = smmc::load_config(config_path);
  const auto cert = smmc::certify(cfg.scenario);
  if (!cert) {
    std::cout << "no linear certificate for " << to_string(cfg.scenario.controller.mode) << '\n';
    return kOk;
  }
  print_certificate(*cert);
  return cert->ok() ? kOk : kVerdictFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-mode torque control of a doubly-fed induction generator"};
  app.require_subcommand(1);

  std::string config, out, controllers;
  auto* run = app.add_subcommand("run", "simulate the configured controller");
  run->add_option("--config", config, "JSON config file")->required();
  run->add_option("--out", out, "output directory");

  auto* compare = app.add_subcommand("compare", "compare controllers on one scenario");
  compare->add_option("--config", config, "JSON config file")->required();
  compare->add_option("--out", out, "output directory");
  compare->add_option("--controllers", controllers, "comma-separated list, e.g. smc1,smc2,smmc");

  auto* check = app.add_subcommand("check-stability", "print stability certificates");
  check->add_option("--config", config, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*compare) return cmd_compare(config, out, controllers);
    return cmd_check_stability(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kError;
}
