#pragma once

#include <Eigen/Dense>

#include "varpro/separable.hpp"

namespace varpro {

/// The eliminated view phi(x) = F(x, y*(x)) of a separable problem. Holds a
/// non-owning reference to the base problem.
class ReducedObjective {
 public:
  explicit ReducedObjective(const SeparableProblem& base)
      : base_(&base), inner_tol_(base.inner_tolerance()) {}
  ReducedObjective(const SeparableProblem& base, double inner_tol)
      : base_(&base), inner_tol_(inner_tol) {}

  const SeparableProblem& base() const { return *base_; }
  double inner_tol() const { return inner_tol_; }

  /// y*(x). Verifies ||grad_y F(x, y*)|| <= inner_tol; throws
  /// ConvergenceError (with the residual norm) when the solver misses it.
  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const;

  double value(const Eigen::VectorXd& x) const;

  /// grad_x F(x, y*(x)); the grad_y term vanishes by inner optimality.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// dy*/dx = -D^{-1} B at (x, y*(x)), from the implicit function theorem.
  Eigen::MatrixXd sensitivity(const Eigen::VectorXd& x) const;

  /// Schur complement A - B^T D^{-1} B at (x, y*(x)).
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

 private:
  const SeparableProblem* base_;
  double inner_tol_;
};

Eigen::VectorXd inner_solve(const SeparableProblem& problem, const Eigen::VectorXd& x);
double reduced_value(const SeparableProblem& problem, const Eigen::VectorXd& x);
Eigen::VectorXd reduced_gradient(const SeparableProblem& problem, const Eigen::VectorXd& x);
Eigen::MatrixXd inner_sensitivity(const SeparableProblem& problem, const Eigen::VectorXd& x);
Eigen::MatrixXd reduced_hessian(const SeparableProblem& problem, const Eigen::VectorXd& x);

}  // namespace varpro
