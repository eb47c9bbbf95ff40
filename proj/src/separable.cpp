#include "varpro/separable.hpp"

#include <string>

namespace varpro {

HessianBlocks SeparableProblem::hessian_blocks(const SeparablePoint&) const {
  throw CapabilityError("problem does not implement hessian_blocks");
}

Eigen::VectorXd SeparableProblem::inner_solve(const Eigen::VectorXd&) const {
  throw CapabilityError("problem does not implement inner_solve");
}

void check_dimensions(const SeparableProblem& problem, const SeparablePoint& pt) {
  if (pt.x.size() != problem.p() || pt.y.size() != problem.q()) {
    throw DimensionError("point has dimensions (" + std::to_string(pt.x.size()) + ", " +
                         std::to_string(pt.y.size()) + "), problem expects (" +
                         std::to_string(problem.p()) + ", " + std::to_string(problem.q()) + ")");
  }
}

double evaluate(const SeparableProblem& problem, const SeparablePoint& pt) {
  check_dimensions(problem, pt);
  return problem.value(pt);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gradient(const SeparableProblem& problem,
                                                     const SeparablePoint& pt) {
  check_dimensions(problem, pt);
  return {problem.grad_x(pt), problem.grad_y(pt)};
}

HessianBlocks hessian_blocks(const SeparableProblem& problem, const SeparablePoint& pt) {
  check_dimensions(problem, pt);
  return problem.hessian_blocks(pt);
}

}  // namespace varpro
