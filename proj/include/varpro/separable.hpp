#pragma once

#include <Eigen/Dense>
#include <utility>

#include "varpro/errors.hpp"
#include "varpro/types.hpp"

namespace varpro {

/// A twice-differentiable objective F(x, y) whose minimization over y at
/// fixed x is tractable. Implementations are stateless: evaluation never
/// mutates the problem, so one instance may be shared across threads.
class SeparableProblem {
 public:
  virtual ~SeparableProblem() = default;

  virtual int p() const = 0;
  virtual int q() const = 0;

  virtual double value(const SeparablePoint& pt) const = 0;
  virtual Eigen::VectorXd grad_x(const SeparablePoint& pt) const = 0;
  virtual Eigen::VectorXd grad_y(const SeparablePoint& pt) const = 0;

  /// Analytic A, B, D blocks. Throws CapabilityError for problems that only
  /// carry first-order derivatives.
  virtual HessianBlocks hessian_blocks(const SeparablePoint& pt) const;

  /// y*(x), a minimizer of F(x, .). Throws CapabilityError when no solver is
  /// defined and DomainError outside the solver's domain.
  virtual Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const;

  /// Largest residual norm ||grad_y F(x, y*(x))|| the inner solver may leave.
  virtual double inner_tolerance() const { return 1e-10; }
};

/// Throws DimensionError unless pt matches the problem's (p, q).
void check_dimensions(const SeparableProblem& problem, const SeparablePoint& pt);

double evaluate(const SeparableProblem& problem, const SeparablePoint& pt);

/// (grad_x F, grad_y F) at the point.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gradient(const SeparableProblem& problem,
                                                     const SeparablePoint& pt);

HessianBlocks hessian_blocks(const SeparableProblem& problem, const SeparablePoint& pt);

}  // namespace varpro
