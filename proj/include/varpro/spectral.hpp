#pragma once

#include <Eigen/Dense>

#include "varpro/reduction.hpp"
#include "varpro/types.hpp"

namespace varpro {

/// Scale-aware threshold below which an eigenvalue counts as zero:
/// 1e-8 * max(1, spectral norm estimate).
double default_zero_tol(const Eigen::MatrixXd& M);

/// Eigenvalue sign counts of a symmetric matrix. Throws ValidationError when
/// M is not symmetric to within 1e-10 (scaled).
Inertia inertia(const Eigen::MatrixXd& M, double tol);
Inertia inertia(const Eigen::MatrixXd& M);

/// Minimum iff n- = n0 = 0; Maximum iff n+ = n0 = 0; Degenerate iff n0 > 0;
/// Saddle otherwise.
PointClass classify_inertia(const Inertia& in);

struct HaynsworthResult {
  Inertia full;
  Inertia reduced;
  bool additivity_holds = false;
};

/// Verifies In(H) = (q, 0, 0) + In(A - B^T D^{-1} B). Requires D positive
/// definite at the given tolerance; throws HypothesisError otherwise.
HaynsworthResult haynsworth_check(const HessianBlocks& blocks, double tol);

/// Classifies a reduced-stationary candidate x in both landscapes. Throws
/// NotStationaryError (carrying the norm) when the reduced gradient at x
/// exceeds stationarity_tol.
StationaryPointReport classify_stationary_point(const SeparableProblem& problem,
                                                const Eigen::VectorXd& x,
                                                double stationarity_tol = 1e-6);

}  // namespace varpro
