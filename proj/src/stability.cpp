#include "smmc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smmc/error.hpp"

namespace smmc {

double gain_bound(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& alpha,
                  NonlinearBound bound) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || alpha.cols() != a.rows() ||
      alpha.rows() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "gain bound operands do not conform");
  }
  if (!(bound.m >= 0.0)) throw Error(ErrorKind::kValidationError, "m_bound >= 0");
  const Eigen::MatrixXd ab = alpha * b;
  const Eigen::VectorXd ab_sv = Eigen::JacobiSVD<Eigen::MatrixXd>(ab).singularValues();
  const double actuation = ab_sv(ab_sv.size() - 1);
  if (actuation < 1e-12) throw Error(ErrorKind::kSingularCB, "alpha*B has no actuated channel");

  // ||A|| + M bounds ||A + M I|| and, unlike it, never shrinks as M grows.
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
  return (norm + bound.m) / actuation;
}

double gain_bound(const SubModel& model, NonlinearBound bound) {
  return gain_bound(model.a, model.b, model.alpha, bound);
}

LyapunovResult lyapunov_check(const Eigen::MatrixXd& a_red, const Eigen::MatrixXd& b_red,
                              const Eigen::MatrixXd& l_red) {
  if (b_red.rows() != a_red.rows() || l_red.rows() != b_red.cols() ||
      l_red.cols() != a_red.cols() || a_red.rows() != a_red.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "A - B L is not square");
  }
  const Eigen::MatrixXd f = a_red - b_red * l_red;
  const Eigen::Index n = f.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  // vec(F^T P + P F) = (I (x) F^T + F^T (x) I) vec(P), column-major vec.
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd ft = f.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) += ft(i, j) * eye;
    }
    kron.block(i * n, i * n, n, n) += ft;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kron);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kSingularLyapunov,
                "closed-loop eigenvalues sum to zero; Lyapunov equation is singular");
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(eye.data(), n * n);
  const Eigen::VectorXd vec_p = lu.solve(rhs);

  LyapunovResult r;
  r.p = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n);
  r.p = 0.5 * (r.p + r.p.transpose()).eval();
  r.min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r.p).eigenvalues()(0);
  r.residual = (ft * r.p + r.p * f + eye).norm();
  return r;
}

ReducedDynamics reduce_sliding_dynamics(const SubModel& model) {
  const Eigen::Index n = model.state_dim();
  const Eigen::Index m = model.input_dim();
  if (m >= n) throw Error(ErrorKind::kDimensionMismatch, "no sliding dynamics left to reduce");

  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(model.b).householderQ();
  const Eigen::MatrixXd range = q.leftCols(m);       // span of B
  const Eigen::MatrixXd complement = q.rightCols(n - m);

  Eigen::MatrixXd t(n, n);
  t << complement.transpose(), range.transpose();
  const Eigen::MatrixXd az = t * model.a * t.transpose();

  const Eigen::MatrixXd alpha_range = model.alpha * range;
  if (std::abs(alpha_range.determinant()) < 1e-12) {
    throw Error(ErrorKind::kSingularCB, "surface does not span the actuated coordinates");
  }

  ReducedDynamics r;
  r.a_red = az.topLeftCorner(n - m, n - m);
  r.b_red = az.topRightCorner(n - m, m);
  r.l_red = alpha_range.fullPivLu().solve(model.alpha * complement);
  return r;
}

Eigen::MatrixXd full_order_feedback(const SubModel& model, const ControllerConfig& cfg) {
  double slope = model.k_gain;
  if (cfg.switch_fn == SwitchLaw::kSaturation) slope = model.k_gain * cfg.lambda / cfg.omega_layer;
  Eigen::MatrixXd l = slope * model.alpha;
  if (cfg.equivalent_control) l += model.eq_gain;
  return l;
}

bool StabilityCertificate::ok() const {
  return !models.empty() &&
         std::all_of(models.begin(), models.end(), [](const auto& m) { return m.ok(); });
}

StabilityCertificate certify_bank(std::span<const SubModel> bank, const ControllerConfig& cfg) {
  if (bank.empty()) throw Error(ErrorKind::kEmptyBank, "no sub-models to certify");
  auto checked = [](auto&& solve) {
    try {
      return solve();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingularLyapunov) throw;
      LyapunovResult failed;
      failed.residual = std::numeric_limits<double>::infinity();
      return failed;
    }
  };

  StabilityCertificate cert;
  for (const SubModel& model : bank) {
    SubModelCertificate c;
    c.index = model.index;
    c.omega_op = model.omega_op;
    c.k = model.k_gain;
    c.k_min = gain_bound(model, NonlinearBound{cfg.m_bound});
    c.gain_ok = c.k > c.k_min + cfg.epsilon;
    const ReducedDynamics red = reduce_sliding_dynamics(model);
    c.reduced = checked([&] { return lyapunov_check(red.a_red, red.b_red, red.l_red); });
    c.full = checked([&] {
      return lyapunov_check(model.a, model.b, full_order_feedback(model, cfg));
    });
    cert.models.push_back(std::move(c));
  }
  return cert;
}

double nonquadratic_V(std::span<const double> p_weights, std::span<const double> surface_values) {
  if (p_weights.size() != surface_values.size()) {
    throw Error(ErrorKind::kLengthMismatch, "weights vs surfaces");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < p_weights.size(); ++i) {
    if (!(p_weights[i] > 0.0)) {
      throw Error(ErrorKind::kNonPositiveWeight, "P_" + std::to_string(i) + " must be > 0");
    }
    v += p_weights[i] * surface_values[i] * surface_values[i];
  }
  return v;
}

std::vector<double> segmented_derivative(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> break_times) {
  if (t.size() != y.size()) throw Error(ErrorKind::kLengthMismatch, "t vs y");
  const std::size_t n = t.size();
  std::vector<int> segment(n);
  for (std::size_t i = 0; i < n; ++i) {
    segment[i] = static_cast<int>(
        std::count_if(break_times.begin(), break_times.end(), [&](double b) { return t[i] >= b; }));
  }
  std::vector<double> d(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_prev = i > 0 && segment[i - 1] == segment[i];
    const bool has_next = i + 1 < n && segment[i + 1] == segment[i];
    if (has_prev && has_next) {
      d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    } else if (has_next) {
      d[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
    } else if (has_prev) {
      d[i] = (y[i] - y[i - 1]) / (t[i] - t[i - 1]);
    }
  }
  return d;
}

namespace {

void finish(MonitorReport& r) {
  std::sort(r.violation_times.begin(), r.violation_times.end());
  r.violation_times.erase(std::unique(r.violation_times.begin(), r.violation_times.end()),
                          r.violation_times.end());
  r.violation_fraction =
      r.eligible == 0 ? 0.0 : static_cast<double>(r.violations) / static_cast<double>(r.eligible);
}

}  // namespace

MonitorReport reaching_monitor(const SimTrace& trace, const MonitorOptions& options) {
  if (trace.size() < 2) throw Error(ErrorKind::kTooShortTrace, "need at least two samples");
  if (!(options.eta > 0.0)) throw Error(ErrorKind::kValidationError, "eta > 0");

  MonitorReport report;
  for (const std::vector<double>* channel : {&trace.s_d, &trace.s_q}) {
    const std::vector<double>& s = *channel;
    const std::vector<double> ds = segmented_derivative(trace.t, s, options.break_times);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::abs(s[i]) < options.omega_layer || !std::isfinite(ds[i])) continue;
      ++report.eligible;
      if (s[i] * ds[i] > -options.eta * std::abs(s[i]) + options.tolerance) {
        ++report.violations;
        report.violation_times.push_back(trace.t[i]);
      }
    }
  }
  finish(report);
  return report;
}

MonitorReport lyapunov_descent_monitor(const SimTrace& trace, const MonitorOptions& options) {
  if (trace.size() < 2) throw Error(ErrorKind::kTooShortTrace, "need at least two samples");
  const std::vector<double> dv = segmented_derivative(trace.t, trace.v_lyap, options.break_times);

  MonitorReport report;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double outside = std::max(std::abs(trace.s_d[i]), std::abs(trace.s_q[i]));
    if (outside < options.omega_layer || !std::isfinite(dv[i])) continue;
    ++report.eligible;
    if (dv[i] > options.tolerance) {
      ++report.violations;
      report.violation_times.push_back(trace.t[i]);
    }
  }
  finish(report);
  return report;
}

}  // namespace smmc
