#include "varpro/reduction.hpp"

#include <cmath>
#include <string>

namespace varpro {

namespace {

constexpr double kMaxCondition = 1e12;

/// Solves D S = R for symmetric D via eigendecomposition. Refuses (never
/// regularizes) when the condition estimate exceeds 1e12.
Eigen::MatrixXd solve_symmetric_checked(const Eigen::MatrixXd& D, const Eigen::MatrixXd& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D);
  const Eigen::VectorXd abs_ev = eig.eigenvalues().cwiseAbs();
  const double ev_max = abs_ev.maxCoeff();
  const double ev_min = abs_ev.minCoeff();
  if (ev_min == 0.0 || ev_max / ev_min > kMaxCondition) {
    throw SingularityError("inner Hessian block is singular to working precision (condition > " +
                           std::to_string(kMaxCondition) + ")");
  }
  const Eigen::MatrixXd& V = eig.eigenvectors();
  return V * eig.eigenvalues().cwiseInverse().asDiagonal() * (V.transpose() * R);
}

}  // namespace

Eigen::VectorXd ReducedObjective::inner_solve(const Eigen::VectorXd& x) const {
  if (x.size() != base_->p()) {
    throw DimensionError("inner_solve: x has length " + std::to_string(x.size()) +
                         ", problem expects p = " + std::to_string(base_->p()));
  }
  Eigen::VectorXd y = base_->inner_solve(x);
  const double residual = base_->grad_y({x, y}).norm();
  if (!(residual <= inner_tol_)) {
    throw ConvergenceError("inner solve left optimality residual " + std::to_string(residual) +
                               " above tolerance " + std::to_string(inner_tol_),
                           residual);
  }
  return y;
}

double ReducedObjective::value(const Eigen::VectorXd& x) const {
  return base_->value({x, inner_solve(x)});
}

Eigen::VectorXd ReducedObjective::gradient(const Eigen::VectorXd& x) const {
  return base_->grad_x({x, inner_solve(x)});
}

Eigen::MatrixXd ReducedObjective::sensitivity(const Eigen::VectorXd& x) const {
  const HessianBlocks blocks = base_->hessian_blocks({x, inner_solve(x)});
  return -solve_symmetric_checked(blocks.D, blocks.B);
}

Eigen::MatrixXd ReducedObjective::hessian(const Eigen::VectorXd& x) const {
  const HessianBlocks blocks = base_->hessian_blocks({x, inner_solve(x)});
  const Eigen::MatrixXd Dinv_B = solve_symmetric_checked(blocks.D, blocks.B);
  Eigen::MatrixXd S = blocks.A - blocks.B.transpose() * Dinv_B;
  // Symmetrize away factorization roundoff.
  return 0.5 * (S + S.transpose());
}

Eigen::VectorXd inner_solve(const SeparableProblem& problem, const Eigen::VectorXd& x) {
  return ReducedObjective(problem).inner_solve(x);
}

double reduced_value(const SeparableProblem& problem, const Eigen::VectorXd& x) {
  return ReducedObjective(problem).value(x);
}

Eigen::VectorXd reduced_gradient(const SeparableProblem& problem, const Eigen::VectorXd& x) {
  return ReducedObjective(problem).gradient(x);
}

Eigen::MatrixXd inner_sensitivity(const SeparableProblem& problem, const Eigen::VectorXd& x) {
  return ReducedObjective(problem).sensitivity(x);
}

Eigen::MatrixXd reduced_hessian(const SeparableProblem& problem, const Eigen::VectorXd& x) {
  return ReducedObjective(problem).hessian(x);
}

}  // namespace varpro
