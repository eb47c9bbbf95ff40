#include "varpro/snlls.hpp"

#include <string>
#include <utility>

#include "varpro/finite_diff.hpp"

namespace varpro {

namespace {

struct ThinSvd {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd V;
  int rank = 0;
};

ThinSvd truncated_svd(const Eigen::MatrixXd& G, double rank_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
  const double cutoff = out.sigma.size() > 0 ? rank_tol * out.sigma[0] : 0.0;
  for (Eigen::Index i = 0; i < out.sigma.size(); ++i) {
    if (out.sigma[i] > cutoff && out.sigma[i] > 0.0) ++out.rank;
  }
  return out;
}

Eigen::VectorXd apply_pinv(const ThinSvd& svd, const Eigen::VectorXd& v) {
  Eigen::VectorXd coeffs = svd.U.leftCols(svd.rank).transpose() * v;
  coeffs.array() /= svd.sigma.head(svd.rank).array();
  return svd.V.leftCols(svd.rank) * coeffs;
}

Eigen::VectorXd apply_pinv_transpose(const ThinSvd& svd, const Eigen::VectorXd& v) {
  Eigen::VectorXd coeffs = svd.V.leftCols(svd.rank).transpose() * v;
  coeffs.array() /= svd.sigma.head(svd.rank).array();
  return svd.U.leftCols(svd.rank) * coeffs;
}

void require_full_column_rank(const ThinSvd& svd, int q, const char* op) {
  if (svd.rank < q) {
    throw RankError(std::string(op) + ": G(x) is column rank deficient (rank " +
                    std::to_string(svd.rank) + " of " + std::to_string(q) + ")");
  }
}

}  // namespace

Eigen::MatrixXd SnllsProblem::model_at(const Eigen::VectorXd& x) const {
  if (x.size() != p) {
    throw DimensionError("SNLLS: x has length " + std::to_string(x.size()) + ", expected p = " +
                         std::to_string(p));
  }
  Eigen::MatrixXd G = model_matrix(x);
  if (G.rows() != m() || G.cols() != q) {
    throw DimensionError("SNLLS: model matrix is " + std::to_string(G.rows()) + "x" +
                         std::to_string(G.cols()) + ", expected " + std::to_string(m()) + "x" +
                         std::to_string(q));
  }
  if (m() < q) throw ValidationError("SNLLS requires m >= q");
  return G;
}

std::vector<Eigen::MatrixXd> SnllsProblem::derivs_at(const Eigen::VectorXd& x) const {
  if (model_matrix_derivs) {
    auto derivs = model_matrix_derivs(x);
    if (static_cast<int>(derivs.size()) != p) {
      throw DimensionError("SNLLS: expected p = " + std::to_string(p) + " model derivatives");
    }
    return derivs;
  }
  std::vector<Eigen::MatrixXd> derivs(p);
  Eigen::VectorXd xp = x;
  for (int k = 0; k < p; ++k) {
    const double xk = x[k];
    xp[k] = xk + kFdGradientStep;
    const Eigen::MatrixXd Gp = model_matrix(xp);
    xp[k] = xk - kFdGradientStep;
    const Eigen::MatrixXd Gm = model_matrix(xp);
    xp[k] = xk;
    derivs[k] = (Gp - Gm) / (2.0 * kFdGradientStep);
  }
  return derivs;
}

std::vector<Eigen::MatrixXd> SnllsProblem::second_derivs_at(const Eigen::VectorXd& x) const {
  if (model_matrix_second_derivs) {
    auto second = model_matrix_second_derivs(x);
    if (static_cast<int>(second.size()) != p * p) {
      throw DimensionError("SNLLS: expected p*p model second derivatives");
    }
    return second;
  }
  // Central differences of the first derivatives, symmetrized.
  std::vector<Eigen::MatrixXd> second(static_cast<std::size_t>(p) * p);
  Eigen::VectorXd xp = x;
  for (int l = 0; l < p; ++l) {
    const double xl = x[l];
    xp[l] = xl + kFdHessianStep;
    const auto derivs_p = derivs_at(xp);
    xp[l] = xl - kFdHessianStep;
    const auto derivs_m = derivs_at(xp);
    xp[l] = xl;
    for (int k = 0; k < p; ++k) {
      second[static_cast<std::size_t>(k) * p + l] =
          (derivs_p[k] - derivs_m[k]) / (2.0 * kFdHessianStep);
    }
  }
  for (int k = 0; k < p; ++k) {
    for (int l = k + 1; l < p; ++l) {
      const Eigen::MatrixXd sym =
          0.5 * (second[static_cast<std::size_t>(k) * p + l] +
                 second[static_cast<std::size_t>(l) * p + k]);
      second[static_cast<std::size_t>(k) * p + l] = sym;
      second[static_cast<std::size_t>(l) * p + k] = sym;
    }
  }
  return second;
}

Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& z, double rank_tol) {
  if (G.rows() != z.size()) {
    throw DimensionError("pinv_solve: G has " + std::to_string(G.rows()) + " rows, z has length " +
                         std::to_string(z.size()));
  }
  const ThinSvd svd = truncated_svd(G, rank_tol);
  if (svd.rank == 0) return Eigen::VectorXd::Zero(G.cols());
  return apply_pinv(svd, z);
}

Eigen::VectorXd reduced_residual(const SnllsProblem& problem, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd G = problem.model_at(x);
  return G * pinv_solve(G, problem.data, problem.rank_tol) - problem.data;
}

Eigen::MatrixXd varpro_jacobian(const SnllsProblem& problem, const Eigen::VectorXd& x,
                                JacobianMode mode) {
  if (mode == JacobianMode::FiniteDiff) {
    return fd_jacobian_of([&](const Eigen::VectorXd& xi) { return reduced_residual(problem, xi); },
                          x);
  }
  const Eigen::MatrixXd G = problem.model_at(x);
  const ThinSvd svd = truncated_svd(G, problem.rank_tol);
  require_full_column_rank(svd, problem.q, "varpro_jacobian");

  const Eigen::VectorXd y_star = apply_pinv(svd, problem.data);
  const Eigen::VectorXd r = G * y_star - problem.data;
  const auto derivs = problem.derivs_at(x);
  const Eigen::MatrixXd U = svd.U.leftCols(svd.rank);

  Eigen::MatrixXd J(problem.m(), problem.p);
  for (int k = 0; k < problem.p; ++k) {
    const Eigen::VectorXd gk_y = derivs[k] * y_star;
    // P_perp v = v - U U^T v.
    Eigen::VectorXd col = gk_y - U * (U.transpose() * gk_y);
    if (mode == JacobianMode::Full) {
      col -= apply_pinv_transpose(svd, derivs[k].transpose() * r);
    }
    J.col(k) = col;
  }
  return J;
}

Eigen::VectorXd delta_y_approx(const SnllsProblem& problem, const Eigen::VectorXd& x_k,
                               const Eigen::VectorXd& y_k, const Eigen::VectorXd& dx) {
  const Eigen::MatrixXd G = problem.model_at(x_k);
  Eigen::VectorXd rhs = G * y_k - problem.data;
  const auto derivs = problem.derivs_at(x_k);
  for (int k = 0; k < problem.p; ++k) {
    rhs += derivs[k] * y_k * dx[k];
  }
  return -pinv_solve(G, rhs, problem.rank_tol);
}

Eigen::VectorXd delta_y_exact(const SnllsProblem& problem, const Eigen::VectorXd& x_next,
                              const Eigen::VectorXd& y_k) {
  const Eigen::MatrixXd G = problem.model_at(x_next);
  return -pinv_solve(G, G * y_k - problem.data, problem.rank_tol);
}

namespace {

class SnllsSeparable final : public SeparableProblem {
 public:
  explicit SnllsSeparable(std::shared_ptr<const SnllsProblem> problem)
      : problem_(std::move(problem)) {}

  int p() const override { return problem_->p; }
  int q() const override { return problem_->q; }

  double value(const SeparablePoint& pt) const override {
    return 0.5 * residual(pt).squaredNorm();
  }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    const Eigen::VectorXd eps = residual(pt);
    const auto derivs = problem_->derivs_at(pt.x);
    Eigen::VectorXd g(p());
    for (int k = 0; k < p(); ++k) g[k] = (derivs[k] * pt.y).dot(eps);
    return g;
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    return problem_->model_at(pt.x).transpose() * residual(pt);
  }

  HessianBlocks hessian_blocks(const SeparablePoint& pt) const override {
    const Eigen::MatrixXd G = problem_->model_at(pt.x);
    const Eigen::VectorXd eps = G * pt.y - problem_->data;
    const auto derivs = problem_->derivs_at(pt.x);
    const auto second = problem_->second_derivs_at(pt.x);

    HessianBlocks blocks;
    blocks.A.resize(p(), p());
    blocks.B.resize(q(), p());
    blocks.D = G.transpose() * G;
    std::vector<Eigen::VectorXd> gk_y(p());
    for (int k = 0; k < p(); ++k) gk_y[k] = derivs[k] * pt.y;
    for (int k = 0; k < p(); ++k) {
      blocks.B.col(k) = derivs[k].transpose() * eps + G.transpose() * gk_y[k];
      for (int l = k; l < p(); ++l) {
        const double a = (second[static_cast<std::size_t>(k) * p() + l] * pt.y).dot(eps) +
                         gk_y[k].dot(gk_y[l]);
        blocks.A(k, l) = a;
        blocks.A(l, k) = a;
      }
    }
    return blocks;
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    return pinv_solve(problem_->model_at(x), problem_->data, problem_->rank_tol);
  }

 private:
  Eigen::VectorXd residual(const SeparablePoint& pt) const {
    return problem_->model_at(pt.x) * pt.y - problem_->data;
  }

  std::shared_ptr<const SnllsProblem> problem_;
};

}  // namespace

std::shared_ptr<SeparableProblem> as_separable(std::shared_ptr<const SnllsProblem> problem) {
  return std::make_shared<SnllsSeparable>(std::move(problem));
}

}  // namespace varpro
