#include "varpro/finite_diff.hpp"

namespace varpro {

Eigen::VectorXd fd_gradient_of(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian_of(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd xp = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double xi = x[i];
      const double xj = x[j];
      xp[i] = xi + h;
      xp[j] = xj + h;
      const double fpp = f(xp);
      xp[j] = xj - h;
      const double fpm = f(xp);
      xp[i] = xi - h;
      xp[j] = xj + h;
      const double fmp = f(xp);
      xp[j] = xj - h;
      const double fmm = f(xp);
      xp[i] = xi;
      xp[j] = xj;
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return H;
}

Eigen::MatrixXd fd_jacobian_of(const VectorFn& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd J;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = xi - h;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = xi;
    if (J.size() == 0) J.resize(fp.size(), x.size());
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> fd_gradient(const SeparableProblem& problem,
                                                        const SeparablePoint& pt, double h) {
  check_dimensions(problem, pt);
  if (h <= 0.0) throw ValidationError("finite-difference step must be positive");
  const int p = problem.p();
  const int q = problem.q();
  Eigen::VectorXd theta(p + q);
  theta << pt.x, pt.y;
  const auto f = [&](const Eigen::VectorXd& t) {
    return problem.value({t.head(p), t.tail(q)});
  };
  const Eigen::VectorXd g = fd_gradient_of(f, theta, h);
  return {g.head(p), g.tail(q)};
}

Eigen::MatrixXd fd_hessian(const SeparableProblem& problem, const SeparablePoint& pt, double h) {
  check_dimensions(problem, pt);
  if (h <= 0.0) throw ValidationError("finite-difference step must be positive");
  const int p = problem.p();
  const int q = problem.q();
  Eigen::VectorXd theta(p + q);
  theta << pt.x, pt.y;
  const auto f = [&](const Eigen::VectorXd& t) {
    return problem.value({t.head(p), t.tail(q)});
  };
  return fd_hessian_of(f, theta, h);
}

}  // namespace varpro
