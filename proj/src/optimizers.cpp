#include "varpro/optimizers.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace varpro {

namespace {

constexpr double kLmLambdaOverflow = 1e12;
constexpr int kTraceParamColumnLimit = 16;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw ValidationError("step_size must be positive");
  if (max_iters < 0) throw ValidationError("max_iters must be non-negative");
  if (!(grad_tol >= 0.0)) throw ValidationError("grad_tol must be non-negative");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be positive");
  if (!(lm_lambda0 > 0.0)) throw ValidationError("lm_lambda0 must be positive");
  if (!(lm_up > 1.0) || !(lm_down > 0.0 && lm_down < 1.0)) {
    throw ValidationError("need lm_up > 1 > lm_down > 0");
  }
}

std::string Trace::to_csv() const {
  const bool with_params =
      !iterates.empty() && iterates.front().params.size() <= kTraceParamColumnLimit;
  std::ostringstream out;
  out << "iter,objective,grad_norm,step";
  if (with_params) {
    for (Eigen::Index i = 0; i < iterates.front().params.size(); ++i) out << ",x" << i;
  }
  out << "\n";
  for (const TraceRecord& rec : iterates) {
    out << rec.iter << "," << format_double(rec.objective) << "," << format_double(rec.grad_norm)
        << "," << format_double(rec.step);
    if (with_params) {
      for (Eigen::Index i = 0; i < rec.params.size(); ++i) out << "," << format_double(rec.params[i]);
    }
    out << "\n";
  }
  return out.str();
}

void Trace::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_csv();
  if (!out) throw IoError("write failed for " + path);
}

Trace gradient_descent(const ValueFn& value_fn, const GradFn& grad_fn, const Eigen::VectorXd& x0,
                       const OptimizerConfig& cfg) {
  cfg.validate();
  Trace trace;
  Eigen::VectorXd x = x0;
  for (int iter = 0;; ++iter) {
    const double f = value_fn(x);
    const Eigen::VectorXd g = grad_fn(x);
    const double grad_norm = g.norm();
    trace.iterates.push_back({iter, x, f, grad_norm, cfg.step_size});
    if (!std::isfinite(f) || !g.allFinite()) {
      throw DivergenceError("gradient descent diverged at iteration " + std::to_string(iter),
                            std::move(trace));
    }
    if (grad_norm <= cfg.grad_tol || iter >= cfg.max_iters) break;
    x -= cfg.step_size * g;
  }
  return trace;
}

Trace levenberg_marquardt(const ResidualFn& residual_fn, const JacobianFn& jacobian_fn,
                          const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  cfg.validate();
  Trace trace;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = residual_fn(x);
  Eigen::MatrixXd J = jacobian_fn(x);
  if (J.rows() != r.size() || J.cols() != x.size()) {
    throw DimensionError("levenberg_marquardt: Jacobian is " + std::to_string(J.rows()) + "x" +
                         std::to_string(J.cols()) + " for residual length " +
                         std::to_string(r.size()) + " and " + std::to_string(x.size()) +
                         " parameters");
  }
  double cost = 0.5 * r.squaredNorm();
  Eigen::VectorXd grad = J.transpose() * r;
  double lambda = cfg.lm_lambda0;
  trace.iterates.push_back({0, x, cost, grad.norm(), lambda});

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (trace.back().grad_norm <= cfg.grad_tol) break;
    // Reject steps until one decreases the cost or the damping overflows.
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd normal = J.transpose() * J;
      normal.diagonal().array() += lambda;
      const Eigen::VectorXd delta = normal.ldlt().solve(-grad);
      const Eigen::VectorXd x_trial = x + delta;
      const Eigen::VectorXd r_trial = residual_fn(x_trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        accepted = true;
        x = x_trial;
        r = r_trial;
        cost = cost_trial;
        J = jacobian_fn(x);
        grad = J.transpose() * r;
        lambda *= cfg.lm_down;
      } else {
        lambda *= cfg.lm_up;
        if (lambda > kLmLambdaOverflow) {
          trace.stalled = true;
          return trace;
        }
      }
    }
    trace.iterates.push_back({iter, x, cost, grad.norm(), lambda});
  }
  return trace;
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                          const OptimizerConfig& cfg) {
  if (state.t == 0) {
    state.m = Eigen::VectorXd::Zero(x.size());
    state.v = Eigen::VectorXd::Zero(x.size());
  }
  ++state.t;
  state.m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * grad;
  state.v = cfg.adam_beta2 * state.v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
  const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  const Eigen::ArrayXd m_hat = state.m.array() / bias1;
  const Eigen::ArrayXd v_hat = state.v.array() / bias2;
  return x - cfg.step_size * (m_hat / (v_hat.sqrt() + cfg.adam_eps)).matrix();
}

Trace adam(const GradFn& grad_fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg,
           const ValueFn& value_fn) {
  cfg.validate();
  Trace trace;
  AdamState state;
  Eigen::VectorXd x = x0;
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd g = grad_fn(x);
    const double f = value_fn ? value_fn(x) : std::nan("");
    trace.iterates.push_back({iter, x, f, g.norm(), cfg.step_size});
    if (!g.allFinite()) {
      throw DivergenceError("adam hit a non-finite gradient at iteration " + std::to_string(iter),
                            std::move(trace));
    }
    if (g.norm() <= cfg.grad_tol || iter >= cfg.max_iters) break;
    x = adam_step(state, x, g, cfg);
  }
  return trace;
}

double lsgd_ridge(int sample_count) { return 1e-8 * sample_count; }

Eigen::VectorXd lsgd_step(const LinearTailNetwork& network, const Eigen::VectorXd& params,
                          const OptimizerConfig& cfg, AdamState& state) {
  if (params.size() != network.num_params()) {
    throw DimensionError("lsgd_step: parameter vector has wrong length");
  }
  const int tail = network.linear_dim();
  const int hidden = network.hidden_dim();

  // Phase 1: ridge-regularized least squares for the linear tail.
  Eigen::VectorXd updated = params;
  const Eigen::MatrixXd design = network.design_matrix(params);
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += lsgd_ridge(static_cast<int>(design.rows()));
  updated.tail(tail) = normal.ldlt().solve(design.transpose() * network.targets());

  // Phase 2: one Adam step on the hidden block, tail fixed.
  const Eigen::VectorXd grad_hidden = network.loss_grad(updated).head(hidden);
  updated.head(hidden) = adam_step(state, updated.head(hidden), grad_hidden, cfg);
  return updated;
}

}  // namespace varpro
