#include "smmc/trace.hpp"

#include <cmath>

namespace smmc {

void ControlActivity::push(double u) {
  if (!started_) {
    started_ = true;
    last_ = extremum_ = u;
    return;
  }
  tv_ += std::abs(u - last_);
  last_ = u;

  if (direction_ == 0) {
    if (std::abs(u - extremum_) > hysteresis_) {
      direction_ = u > extremum_ ? 1 : -1;
      extremum_ = u;
      ++switches_;
    }
    return;
  }
  const double progress = direction_ * (u - extremum_);
  if (progress > 0.0) {
    extremum_ = u;
  } else if (-progress > hysteresis_) {
    direction_ = -direction_;
    extremum_ = u;
    ++switches_;
  }
}

std::vector<std::string> SimTrace::column_names() const {
  std::vector<std::string> names{"t",  "phi_dr", "phi_qr", "i_ds", "i_qs",    "omega",  "te",
                                 "te_ref", "u_d", "u_q",  "s_d",  "s_q", "s_fused", "v_lyap"};
  for (std::size_t i = 0; i < validities.size(); ++i) names.push_back("v_" + std::to_string(i + 1));
  return names;
}

std::vector<double> SimTrace::row(std::size_t i) const {
  std::vector<double> r{t[i],  phi_dr[i], phi_qr[i], i_ds[i], i_qs[i], omega[i],   te[i],
                        te_ref[i], u_d[i], u_q[i], s_d[i], s_q[i], s_fused[i], v_lyap[i]};
  for (const auto& col : validities) r.push_back(col[i]);
  return r;
}

}  // namespace smmc
