#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "varpro/separable.hpp"

namespace varpro {

/// Separable nonlinear least squares: residual eps(x, y) = G(x) y - z with
/// G(x) an m x q matrix-valued function of the p nonlinear parameters.
struct SnllsProblem {
  using ModelMatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using ModelDerivsFn = std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

  int p = 0;
  int q = 0;
  ModelMatrixFn model_matrix;
  /// dG/dx_k for k = 0..p-1. Optional; central differences fill in when absent.
  ModelDerivsFn model_matrix_derivs;
  /// d2G/dx_k dx_l as a k-major list of p*p matrices. Optional.
  ModelDerivsFn model_matrix_second_derivs;
  Eigen::VectorXd data;
  double rank_tol = 1e-10;

  int m() const { return static_cast<int>(data.size()); }

  /// G(x) with shape checks (m >= q enforced).
  Eigen::MatrixXd model_at(const Eigen::VectorXd& x) const;
  std::vector<Eigen::MatrixXd> derivs_at(const Eigen::VectorXd& x) const;
  std::vector<Eigen::MatrixXd> second_derivs_at(const Eigen::VectorXd& x) const;
};

enum class JacobianMode { Full, Kaufman, FiniteDiff };

/// Minimum-norm least squares solution G^+ z via SVD, truncating singular
/// values below rank_tol * sigma_max.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& z,
                           double rank_tol = 1e-10);

/// r(x) = G(x) G(x)^+ z - z. The reduced objective is 0.5 ||r||^2.
Eigen::VectorXd reduced_residual(const SnllsProblem& problem, const Eigen::VectorXd& x);

/// Jacobian of reduced_residual. Full carries both projector-derivative
/// terms, Kaufman drops the second; both need G(x) of full column rank
/// (RankError otherwise). FiniteDiff is the oracle.
Eigen::MatrixXd varpro_jacobian(const SnllsProblem& problem, const Eigen::VectorXd& x,
                                JacobianMode mode);

/// First-order update -G(x_k)^+ (eps(x_k, y_k) + J_x(x_k, y_k) dx): the
/// linearized-in-x adjustment of the linear parameters.
Eigen::VectorXd delta_y_approx(const SnllsProblem& problem, const Eigen::VectorXd& x_k,
                               const Eigen::VectorXd& y_k, const Eigen::VectorXd& dx);

/// Exact update -G(x_next)^+ eps(x_next, y_k); y_k + delta minimizes the
/// inner problem at x_next when G(x_next) has full column rank.
Eigen::VectorXd delta_y_exact(const SnllsProblem& problem, const Eigen::VectorXd& x_next,
                              const Eigen::VectorXd& y_k);

/// View of the same problem through the general separable interface
/// (F = 0.5 ||G(x) y - z||^2, inner solve via the pseudoinverse).
std::shared_ptr<SeparableProblem> as_separable(std::shared_ptr<const SnllsProblem> problem);

}  // namespace varpro
