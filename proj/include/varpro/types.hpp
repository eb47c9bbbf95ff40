#pragma once

#include <Eigen/Dense>
#include <string>

namespace varpro {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Partitioned decision variable: x is the retained block, y the block the
/// inner solve eliminates.
struct SeparablePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Blocks of the full Hessian [[A, B^T], [B, D]], with A = Hxx (p x p),
/// B = Hyx (q x p) and D = Hyy (q x q).
struct HessianBlocks {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd D;

  int p() const { return static_cast<int>(A.rows()); }
  int q() const { return static_cast<int>(D.rows()); }

  /// The assembled (p+q) x (p+q) symmetric matrix.
  Eigen::MatrixXd full() const;
};

/// Eigenvalue sign counts (n+, n-, n0) of a symmetric matrix.
struct Inertia {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;

  bool operator==(const Inertia&) const = default;
};

std::string to_string(const Inertia& in);

enum class PointClass { Minimum, Maximum, Saddle, Degenerate };

std::string to_string(PointClass c);

/// Paired classification of a stationary point in the full and reduced
/// landscapes.
struct StationaryPointReport {
  Eigen::VectorXd x;
  Eigen::VectorXd y_star;
  double grad_norm_full = 0.0;
  double grad_norm_reduced = 0.0;
  Inertia inertia_full;
  Inertia inertia_reduced;
  PointClass class_full = PointClass::Degenerate;
  PointClass class_reduced = PointClass::Degenerate;
  bool haynsworth_ok = false;

  /// JSON object whose keys match the field names above.
  std::string to_json(int indent = -1) const;
};

}  // namespace varpro
