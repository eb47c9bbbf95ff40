#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "varpro/separable.hpp"

namespace varpro {

inline constexpr double kFdGradientStep = 1e-6;
inline constexpr double kFdHessianStep = 1e-4;

/// Central-difference partial gradients of F. This is the derivative oracle
/// the analytic gradients are checked against; it never touches them.
std::pair<Eigen::VectorXd, Eigen::VectorXd> fd_gradient(const SeparableProblem& problem,
                                                        const SeparablePoint& pt,
                                                        double h = kFdGradientStep);

/// Central-difference full (p+q) x (p+q) Hessian of F.
Eigen::MatrixXd fd_hessian(const SeparableProblem& problem, const SeparablePoint& pt,
                           double h = kFdHessianStep);

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd fd_gradient_of(const ScalarFn& f, const Eigen::VectorXd& x,
                               double h = kFdGradientStep);

Eigen::MatrixXd fd_hessian_of(const ScalarFn& f, const Eigen::VectorXd& x,
                              double h = kFdHessianStep);

Eigen::MatrixXd fd_jacobian_of(const VectorFn& f, const Eigen::VectorXd& x,
                               double h = kFdGradientStep);

}  // namespace varpro
