#include "varpro/spectral.hpp"

#include <cmath>
#include <string>

namespace varpro {

namespace {

void require_symmetric(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) {
    throw ValidationError("inertia requires a square matrix");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw ValidationError("inertia requires a symmetric matrix (asymmetry " +
                          std::to_string(asym) + ")");
  }
}

Inertia count_signs(const Eigen::VectorXd& eigenvalues, double tol) {
  Inertia in;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > tol) {
      ++in.n_plus;
    } else if (eigenvalues[i] < -tol) {
      ++in.n_minus;
    } else {
      ++in.n_zero;
    }
  }
  return in;
}

}  // namespace

double default_zero_tol(const Eigen::MatrixXd& M) {
  // Row-sum norm bounds the spectral norm for symmetric matrices.
  const double norm_estimate = M.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-8 * std::max(1.0, norm_estimate);
}

Inertia inertia(const Eigen::MatrixXd& M, double tol) {
  require_symmetric(M);
  if (!(tol > 0.0)) throw ValidationError("inertia tolerance must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  return count_signs(eig.eigenvalues(), tol);
}

Inertia inertia(const Eigen::MatrixXd& M) { return inertia(M, default_zero_tol(M)); }

PointClass classify_inertia(const Inertia& in) {
  if (in.n_minus == 0 && in.n_zero == 0) return PointClass::Minimum;
  if (in.n_plus == 0 && in.n_zero == 0) return PointClass::Maximum;
  if (in.n_zero > 0) return PointClass::Degenerate;
  return PointClass::Saddle;
}

HaynsworthResult haynsworth_check(const HessianBlocks& blocks, double tol) {
  const Inertia in_d = inertia(blocks.D, tol);
  const int q = blocks.q();
  if (in_d.n_minus != 0 || in_d.n_zero != 0) {
    throw HypothesisError("Haynsworth additivity in the simplified form needs D > 0; D has inertia " +
                          to_string(in_d));
  }
  HaynsworthResult result;
  result.full = inertia(blocks.full(), tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_d(blocks.D);
  const Eigen::MatrixXd Dinv_B = eig_d.eigenvectors() *
                                 eig_d.eigenvalues().cwiseInverse().asDiagonal() *
                                 (eig_d.eigenvectors().transpose() * blocks.B);
  Eigen::MatrixXd schur = blocks.A - blocks.B.transpose() * Dinv_B;
  schur = 0.5 * (schur + schur.transpose());
  result.reduced = inertia(schur, tol);
  result.additivity_holds = result.full == Inertia{q + result.reduced.n_plus,
                                                   result.reduced.n_minus,
                                                   result.reduced.n_zero};
  return result;
}

StationaryPointReport classify_stationary_point(const SeparableProblem& problem,
                                                const Eigen::VectorXd& x,
                                                double stationarity_tol) {
  const ReducedObjective reduced(problem);
  const Eigen::VectorXd y_star = reduced.inner_solve(x);
  const Eigen::VectorXd grad_reduced = problem.grad_x({x, y_star});
  if (!(grad_reduced.norm() <= stationarity_tol)) {
    throw NotStationaryError("candidate has reduced gradient norm " +
                                 std::to_string(grad_reduced.norm()) + " above threshold " +
                                 std::to_string(stationarity_tol),
                             grad_reduced.norm());
  }

  StationaryPointReport report;
  report.x = x;
  report.y_star = y_star;
  report.grad_norm_reduced = grad_reduced.norm();
  const auto [gx, gy] = gradient(problem, {x, y_star});
  report.grad_norm_full = std::hypot(gx.norm(), gy.norm());

  const HessianBlocks blocks = problem.hessian_blocks({x, y_star});
  const Eigen::MatrixXd full = blocks.full();
  const Eigen::MatrixXd schur = reduced.hessian(x);
  const double tol = std::max(default_zero_tol(full), default_zero_tol(schur));
  report.inertia_full = inertia(full, tol);
  report.inertia_reduced = inertia(schur, tol);
  report.class_full = classify_inertia(report.inertia_full);
  report.class_reduced = classify_inertia(report.inertia_reduced);
  try {
    report.haynsworth_ok = haynsworth_check(blocks, tol).additivity_holds;
  } catch (const HypothesisError&) {
    report.haynsworth_ok = false;
  }
  return report;
}

}  // namespace varpro
