#include "smmc/multimodel.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "smmc/error.hpp"

namespace smmc {

SubModel SubModel::from_matrices(int index, double omega_op, Eigen::MatrixXd a, Eigen::MatrixXd b,
                                 Eigen::MatrixXd alpha, double k_gain) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || alpha.cols() != a.rows() ||
      alpha.rows() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "sub-model matrices do not conform");
  }
  if (!(k_gain > 0.0)) throw Error(ErrorKind::kValidationError, "k_gain > 0");

  const Eigen::MatrixXd ab = alpha * b;
  if (std::abs(ab.determinant()) < 1e-12) {
    throw Error(ErrorKind::kSingularCB,
                "alpha*B is singular for sub-model " + std::to_string(index));
  }

  SubModel m;
  m.index = index;
  m.omega_op = omega_op;
  m.c = Eigen::MatrixXd::Identity(a.rows(), a.rows());
  m.eq_gain = ab.fullPivLu().solve(alpha * a);
  m.a = std::move(a);
  m.b = std::move(b);
  m.alpha = std::move(alpha);
  m.k_gain = k_gain;
  return m;
}

SubModel linearize_submodel(const MachineParams& params, double omega_op,
                            const Eigen::MatrixXd& alpha, double k_gain, int index,
                            SignConvention convention) {
  return SubModel::from_matrices(index, omega_op,
                                 electromagnetic_matrix(omega_op, params, convention),
                                 input_matrix(params, convention), alpha, k_gain);
}

ValidityVector::ValidityVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::kEmptyBank, "validity vector is empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kValidationError, "validity in [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::kValidationError, "validities sum to 1");
  }
}

ValidityVector residual_validities(std::span<const double> residuals, double delta) {
  if (residuals.empty()) throw Error(ErrorKind::kEmptyBank, "no sub-models");
  if (!(delta > 0.0)) throw Error(ErrorKind::kValidationError, "delta > 0");

  std::vector<double> w(residuals.size());
  double total = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (!(residuals[i] >= 0.0)) throw Error(ErrorKind::kValidationError, "residual >= 0");
    w[i] = 1.0 / (residuals[i] + delta);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return ValidityVector(std::move(w));
}

ValidityVector compute_validities(double current_omega, std::span<const SubModel> bank,
                                  double delta) {
  if (bank.empty()) throw Error(ErrorKind::kEmptyBank, "no sub-models");
  std::vector<double> distance(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    distance[i] = std::abs(current_omega - bank[i].omega_op);
  }
  return residual_validities(distance, delta);
}

ValidityRule speed_distance_rule(double delta) {
  return [delta](double omega, std::span<const SubModel> bank) {
    return compute_validities(omega, bank, delta);
  };
}

double fuse_surfaces(const ValidityVector& validities, std::span<const double> surface_values) {
  if (surface_values.size() != validities.size()) {
    throw Error(ErrorKind::kLengthMismatch, "surfaces vs validities");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < surface_values.size(); ++i) s += validities[i] * surface_values[i];
  return s;
}

Eigen::VectorXd fuse_controls(const ValidityVector& validities,
                              std::span<const Eigen::VectorXd> partial_controls) {
  if (partial_controls.size() != validities.size()) {
    throw Error(ErrorKind::kLengthMismatch, "controls vs validities");
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(partial_controls.front().size());
  for (std::size_t i = 0; i < partial_controls.size(); ++i) {
    if (partial_controls[i].size() != u.size()) {
      throw Error(ErrorKind::kLengthMismatch, "partial control dimensions differ");
    }
    u += validities[i] * partial_controls[i];
  }
  return u;
}

}  // namespace smmc
