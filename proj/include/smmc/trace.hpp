#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace smmc {

/// Running total variation and direction-reversal count of a control signal.
///
/// A reversal is counted when the signal retreats from its running extremum
/// by more than `hysteresis`; the first departure from the initial value also
/// counts. Smooth signals therefore give the same count at any sampling rate.
class ControlActivity {
 public:
  explicit ControlActivity(double hysteresis = 1e-3) : hysteresis_(hysteresis) {}

  void push(double u);

  double total_variation() const { return tv_; }
  std::size_t switches() const { return switches_; }

 private:
  double hysteresis_;
  bool started_ = false;
  double last_ = 0.0;
  double extremum_ = 0.0;
  int direction_ = 0;
  double tv_ = 0.0;
  std::size_t switches_ = 0;
};

/// Column-oriented record of a closed-loop run. Every column has one entry
/// per recorded sample; `validities[i]` is the column of sub-model i.
struct SimTrace {
  std::vector<double> t;
  std::vector<double> phi_dr, phi_qr, i_ds, i_qs, omega;
  std::vector<double> te, te_ref;
  std::vector<double> u_d, u_q;
  std::vector<double> s_d, s_q;
  std::vector<double> s_fused;  // Euclidean norm of the fused channel surfaces
  std::vector<double> v_lyap;
  std::vector<std::vector<double>> validities;

  // Control activity accumulated at the integration rate, cumulative up to
  // each recorded sample. Kept in memory only; empty for traces read back
  // from CSV, in which case metrics fall back to the recorded samples.
  std::vector<double> cum_tv_d, cum_tv_q;
  std::vector<std::size_t> cum_switch_d, cum_switch_q;

  std::size_t size() const { return t.size(); }
  std::size_t model_count() const { return validities.size(); }
  bool has_step_rate_activity() const { return !cum_tv_d.empty() && cum_tv_d.size() == t.size(); }

  /// CSV column names in file order.
  std::vector<std::string> column_names() const;
  /// Sample-major view of the CSV columns (for serialization and comparison).
  std::vector<double> row(std::size_t i) const;
};

}  // namespace smmc
