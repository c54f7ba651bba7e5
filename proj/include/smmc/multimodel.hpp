#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "smmc/dfig_plant.hpp"

namespace smmc {

/// One linear model of the bank, frozen at an operating speed.
///
/// `alpha` holds one surface row per input channel (m x n), so `alpha * b`
/// is square and must be invertible: a sub-model whose surfaces cannot be
/// moved by the input is rejected at construction with SingularCB.
struct SubModel {
  int index = 0;
  double omega_op = 0.0;
  Eigen::MatrixXd a;      // n x n
  Eigen::MatrixXd b;      // n x m
  Eigen::MatrixXd c;      // output map (identity on the electromagnetic state)
  Eigen::MatrixXd alpha;  // m x n
  double k_gain = 0.0;
  /// (alpha B)^-1 alpha A; the equivalent control is -eq_gain * x.
  Eigen::MatrixXd eq_gain;

  static SubModel from_matrices(int index, double omega_op, Eigen::MatrixXd a, Eigen::MatrixXd b,
                                Eigen::MatrixXd alpha, double k_gain);

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index input_dim() const { return b.cols(); }
};

SubModel linearize_submodel(const MachineParams& params, double omega_op,
                            const Eigen::MatrixXd& alpha, double k_gain, int index = 0,
                            SignConvention convention = SignConvention::kCanonical);

/// Convex weights over the bank: each value in [0, 1], sum 1 within 1e-12.
class ValidityVector {
 public:
  explicit ValidityVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// v_i proportional to 1 / (residual_i + delta). Residuals must be >= 0.
ValidityVector residual_validities(std::span<const double> residuals, double delta);

/// Inverse distance to each operating speed, softened by delta and normalized.
ValidityVector compute_validities(double current_omega, std::span<const SubModel> bank,
                                  double delta);

/// Swappable validity computation; the default is compute_validities with a fixed delta.
using ValidityRule = std::function<ValidityVector(double omega, std::span<const SubModel> bank)>;
ValidityRule speed_distance_rule(double delta);

double fuse_surfaces(const ValidityVector& validities, std::span<const double> surface_values);

Eigen::VectorXd fuse_controls(const ValidityVector& validities,
                              std::span<const Eigen::VectorXd> partial_controls);

}  // namespace smmc
