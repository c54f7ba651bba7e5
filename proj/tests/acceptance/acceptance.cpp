// Acceptance suite on the shipped default scenario. Prints one PASS/FAIL line
// per criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles/plant_oracle.hpp"
#include "oracles/smmc_toy_oracle.hpp"
#include "smmc/config.hpp"
#include "smmc/error.hpp"
#include "smmc/report.hpp"
#include "smmc/trace_io.hpp"

using namespace smmc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guarded(int id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    verdict(id, title, ok, detail);
  } catch (const std::exception& e) {
    verdict(id, title, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TimedRun {
  RunResult result;
  double seconds = 0.0;
};

TimedRun timed(const Scenario& sc, const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  TimedRun r{evaluate(sc, name)};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Same scenario, first `horizon` seconds, every integration step recorded.
Scenario dense(Scenario sc, double horizon) {
  sc.horizon = horizon;
  sc.record_stride = 1;
  return sc;
}

}  // namespace

int main() {
  const RunConfig cfg = load_config(SMMC_DEFAULT_CONFIG);
  std::map<ControllerMode, TimedRun> runs;
  for (auto mode : {ControllerMode::kSmc1, ControllerMode::kSmc2, ControllerMode::kSmmc}) {
    runs.emplace(mode, timed(cfg.scenario_for(mode), std::string(to_string(mode))));
  }
  const RunResult& smc1 = runs.at(ControllerMode::kSmc1).result;
  const RunResult& smc2 = runs.at(ControllerMode::kSmc2).result;
  const RunResult& smmc = runs.at(ControllerMode::kSmmc).result;
  const Scenario smmc_sc = cfg.scenario_for(ControllerMode::kSmmc);

  guarded(1, "chattering ordering", [&] {
    const double tv1 = smc1.metrics.total_tv(), tv2 = smc2.metrics.total_tv(),
                 tv3 = smmc.metrics.total_tv();
    double slowest = 0.0;
    for (const auto& [mode, r] : runs) slowest = std::max(slowest, r.seconds);
    const bool ordered = tv3 * 2.0 <= tv2 && tv2 * 2.0 <= tv1;
    const bool report_agrees = chattering_verdict({smc1, smc2, smmc}).verdict == Verdict::kPass;
    return std::pair{ordered && report_agrees && slowest < 10.0,
                     fmt("tv smc1=%.4g smc2=%.4g smmc=%.4g, ratios %.3g and %.3g, slowest run %.2f s",
                         tv1, tv2, tv3, tv1 / tv2, tv2 / tv3, slowest)};
  });

  guarded(2, "tracking", [&] {
    const double limit = 0.01 * smmc_sc.rated();
    const bool ok = smmc.metrics.sse < limit && smc1.metrics.sse > smmc.metrics.sse &&
                    !cfg.controllers.at(ControllerMode::kSmc1).equivalent_control;
    return std::pair{ok, fmt("sse smmc=%.3g (limit %.3g), smc1 pure switching=%.3g",
                             smmc.metrics.sse, limit, smc1.metrics.sse)};
  });

  guarded(3, "reaching condition", [&] {
    bool ok = true;
    std::string detail;
    for (const RunResult* r : {&smc1, &smmc}) {
      const Scenario sc = cfg.scenario_for(r->mode);
      const MonitorReport fine = reaching_monitor(run_scenario(dense(sc, 2.0)), monitor_options(sc));
      const bool certified = r->certificate && r->certificate->ok();
      ok = ok && certified && r->reaching.violation_fraction < 0.01 && fine.eligible > 0 &&
           fine.violation_fraction < 0.01;
      detail += fmt("%s: %zu/%zu violations (every step, first 2 s: %zu/%zu), certified=%s; ",
                    r->name.c_str(), r->reaching.violations, r->reaching.eligible, fine.violations,
                    fine.eligible, certified ? "yes" : "no");
    }
    return std::pair{ok, detail};
  });

  guarded(4, "certificates", [&] {
    const auto cert = certify(smmc_sc);
    bool ok = cert.has_value() && cert->models.size() == 3;
    std::string detail;
    for (const auto& m : cert->models) {
      ok = ok && m.gain_ok && m.reduced.min_eig > 0 && m.full.min_eig > 0 &&
           m.reduced.residual <= 1e-8 && m.full.residual <= 1e-8;
      detail += fmt("[w=%.3g k=%.3g k_min=%.3g eig=%.3g/%.3g res=%.1e] ", m.omega_op, m.k, m.k_min,
                    m.reduced.min_eig, m.full.min_eig, std::max(m.reduced.residual, m.full.residual));
    }
    return std::pair{ok, detail};
  });

  guarded(5, "fusion invariants", [&] {
    const SimTrace& tr = smmc.trace;
    const auto bank = smmc_sc.build_bank();
    double worst_sum = 0.0, worst_hull = 0.0, worst_replay = 0.0;
    bool in_range = true;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      double sum = 0.0;
      std::vector<double> v;
      for (const auto& col : tr.validities) {
        in_range = in_range && col[i] >= 0.0 && col[i] <= 1.0;
        sum += col[i];
        v.push_back(col[i]);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

      const ReferenceState ref = smmc_sc.reference_at(tr.t[i]);
      const Eigen::Vector4d x(tr.phi_dr[i], tr.phi_qr[i], tr.i_ds[i], tr.i_qs[i]);
      const Eigen::VectorXd xt = x - ref.electromagnetic();
      const SmmcOutput out = smmc_control(bank, ValidityVector(v), x, xt, smmc_sc.controller);
      const double u_rec[2] = {tr.u_d[i], tr.u_q[i]};
      for (int c = 0; c < 2; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& p : out.per_model) {
          lo = std::min(lo, p.u(c));
          hi = std::max(hi, p.u(c));
        }
        const double scale = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
        worst_hull = std::max(worst_hull, std::max(lo - u_rec[c], u_rec[c] - hi) / scale);
        worst_replay = std::max(worst_replay, std::abs(out.u(c) - u_rec[c]) / scale);
      }
    }
    const bool ok = in_range && worst_sum <= 1e-12 && worst_hull <= 1e-12 && worst_replay <= 1e-12;
    return std::pair{ok, fmt("%zu samples, max |sum-1|=%.2e, hull excess=%.2e, replay error=%.2e",
                             tr.size(), worst_sum, std::max(0.0, worst_hull), worst_replay)};
  });

  guarded(6, "Lyapunov descent", [&] {
    const MonitorReport r = lyapunov_descent_monitor(smmc.trace, monitor_options(smmc_sc));
    const MonitorReport fine =
        lyapunov_descent_monitor(run_scenario(dense(smmc_sc, 2.0)), monitor_options(smmc_sc));
    const bool ok = r.eligible > 0 && r.violation_fraction <= 0.01 && fine.eligible > 0 &&
                    fine.violation_fraction <= 0.01;
    return std::pair{ok, fmt("%zu eligible samples, %zu with dV/dt >= 0; every step over the first "
                             "2 s: %zu eligible, %zu violations (%.2f%%)",
                             r.eligible, r.violations, fine.eligible, fine.violations,
                             100.0 * fine.violation_fraction)};
  });

  guarded(7, "integrator order", [&] {
    // Start where the switching term is saturated and hold that control.
    const SimTrace& tr = smmc.trace;
    const double layer = smmc_sc.controller.omega_layer;
    std::size_t k = 0;
    while (k < tr.size() && std::max(std::abs(tr.s_d[k]), std::abs(tr.s_q[k])) < layer) ++k;
    if (k == tr.size()) return std::pair{false, std::string("no saturated sample in the trace")};
    const StateVector x0 = PlantState{tr.phi_dr[k], tr.phi_qr[k], tr.i_ds[k], tr.i_qs[k], tr.omega[k]}.to_vector();
    const InputVector u(tr.u_d[k], tr.u_q[k]);
    const double load = smmc_sc.load_torque(tr.t[k]);
    const DfigPlant plant(smmc_sc.params, smmc_sc.convention);
    const double span = 0.02;
    auto integrate = [&](double h) {
      StateVector x = x0;
      const auto n = static_cast<long>(std::llround(span / h));
      for (long i = 0; i < n; ++i) x = rk4_step(plant, x, u, load, h);
      return x;
    };
    const StateVector exact = integrate(span / 6400);
    const double e1 = (integrate(span / 100) - exact).norm();
    const double e2 = (integrate(span / 200) - exact).norm();
    const double ratio = e1 / e2;
    return std::pair{ratio >= 8.0 && ratio <= 32.0,
                     fmt("segment at t=%.4g s, |s|>=%.3g; error %.3e -> %.3e, ratio %.2f", tr.t[k],
                         layer, e1, e2, ratio)};
  });

  guarded(8, "oracle equivalence", [&] {
    namespace toy = oracle::smmc_toy;
    Eigen::MatrixXd a1(2, 2), a2(2, 2), b(2, 1), al1(1, 2), al2(1, 2);
    a1 << 0, 1, 0, 0;
    a2 << 0, 1, -2, -3;
    b << 0, 1;
    al1 << 1, 1;
    al2 << 2, 1;
    const std::vector<SubModel> bank{SubModel::from_matrices(0, 0.0, a1, b, al1, 2.0),
                                     SubModel::from_matrices(1, 1.0, a2, b, al2, 4.0)};
    ControllerConfig c;
    c.switch_fn = SwitchLaw::kSign;
    c.lambda = 1.0;
    const SmmcOutput out = smmc_control(bank, ValidityVector({toy::kHalf.v1, toy::kHalf.v2}),
                                        Eigen::Vector2d(toy::kX[0], toy::kX[1]),
                                        Eigen::Vector2d(toy::kXTilde[0], toy::kXTilde[1]), c);
    bool ok = rel_close(out.u(0), toy::kHalf.u_g, 1e-12) &&
              rel_close(out.fused_surface(0), toy::kHalf.fused_s, 1e-12);

    const MachineParams m = cfg.scenario.params;
    const oracle::Machine om{m.rs, m.rr, m.ls, m.lr, m.lm, m.j, m.pole_pairs, m.fv};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const PlantState x{1.5 * d(rng), 1.5 * d(rng), 10 * d(rng), 20 * d(rng), 15 * d(rng)};
      const PlantInput in{100 * d(rng), 100 * d(rng), 20 * d(rng)};
      const StateVector got = plant_derivative(x, in, m).to_vector();
      const auto want = oracle::plant_derivative(om, {x.phi_dr, x.phi_qr, x.i_ds, x.i_qs, x.omega},
                                                 in.v_ds, in.v_qs, in.c_l);
      for (int j = 0; j < 5; ++j) {
        worst = std::max(worst, std::abs(got(j) - want[j]) / std::max(1.0, std::abs(want[j])));
      }
    }
    ok = ok && worst <= 1e-12;
    return std::pair{ok, fmt("toy u_g=%.17g (oracle %.17g), plant worst relative error %.2e", out.u(0),
                             toy::kHalf.u_g, worst)};
  });

  guarded(9, "determinism and round-trips", [&] {
    const fs::path dir = fs::temp_directory_path() / "smmc_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const SimTrace again = run_scenario(smmc_sc);
    write_trace_csv(smmc.trace, dir / "a.csv");
    write_trace_csv(again, dir / "b.csv");
    const bool bytes = slurp(dir / "a.csv") == slurp(dir / "b.csv");

    const SimTrace back = read_trace_csv(dir / "a.csv");
    bool csv = back.size() == smmc.trace.size();
    for (std::size_t i = 0; csv && i < back.size(); ++i) csv = back.row(i) == smmc.trace.row(i);

    const std::string text = serialize_config(cfg);
    const bool config = parse_config(text) == cfg && serialize_config(parse_config(text)) == text;
    fs::remove_all(dir);
    return std::pair{bytes && csv && config,
                     fmt("repeat run byte-identical=%s, csv round-trip=%s, config round-trip=%s",
                         bytes ? "yes" : "no", csv ? "yes" : "no", config ? "yes" : "no")};
  });

  guarded(10, "control settling", [&] {
    const SimTrace& tr = smmc.trace;
    const double half = tr.t.front() + 0.5 * (tr.t.back() - tr.t.front());
    std::size_t mid = 0;
    while (mid + 1 < tr.size() && tr.t[mid] < half) ++mid;
    const double first = control_variation(tr, 0, mid);
    const double second = control_variation(tr, mid, tr.size() - 1);
    return std::pair{second < 0.05 * first,
                     fmt("TV first half %.4g, second half %.4g (%.3g%%)", first, second,
                         100.0 * second / first)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
