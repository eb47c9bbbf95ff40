#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "varpro/errors.hpp"

namespace varpro {

struct OptimizerConfig {
  double step_size = 1e-2;
  int max_iters = 200;
  double grad_tol = 1e-10;
  double lm_lambda0 = 1e-3;
  double lm_up = 10.0;
  double lm_down = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  /// Throws ValidationError on out-of-range settings.
  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  Eigen::VectorXd params;
  double objective = 0.0;
  double grad_norm = 0.0;
  /// Step size, or the damping parameter for LM.
  double step = 0.0;
};

/// Per-iteration optimizer history. Record 0 is the initial point.
struct Trace {
  std::vector<TraceRecord> iterates;
  /// Set when LM damping overflowed instead of converging.
  bool stalled = false;

  const TraceRecord& back() const { return iterates.back(); }

  /// CSV with header iter,objective,grad_norm,step plus one x<i> column per
  /// parameter when the parameter count is at most 16.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

/// A driver hit a non-finite objective or gradient. Carries the trace
/// accumulated so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Trace trace)
      : Error(what), trace_(std::move(trace)) {}
  const Trace& trace() const { return trace_; }

 private:
  Trace trace_;
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// x <- x - step_size * grad f(x) until ||grad|| <= grad_tol or max_iters.
Trace gradient_descent(const ValueFn& value_fn, const GradFn& grad_fn, const Eigen::VectorXd& x0,
                       const OptimizerConfig& cfg);

/// Damped least squares on 0.5 ||r(x)||^2: solve (J^T J + lambda I) d = -J^T r,
/// accept on strict decrease. Damping overflow past 1e12 marks the trace
/// stalled rather than throwing.
Trace levenberg_marquardt(const ResidualFn& residual_fn, const JacobianFn& jacobian_fn,
                          const Eigen::VectorXd& x0, const OptimizerConfig& cfg);

/// Bias-corrected Adam. value_fn is only used to fill the trace objective
/// column; pass {} to record NaN.
Trace adam(const GradFn& grad_fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg,
           const ValueFn& value_fn = {});

/// Running Adam moments, reusable across externally driven steps.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
};

/// One Adam update of x given its gradient.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                          const OptimizerConfig& cfg);

/// A model whose parameter vector ends in a linear output layer: params =
/// [hidden, tail], prediction = design_matrix(params) * tail, loss = mean of
/// 0.5 * squared error over a fixed dataset.
class LinearTailNetwork {
 public:
  virtual ~LinearTailNetwork() = default;

  virtual int num_params() const = 0;
  /// Length of the trailing linear block (output weights plus bias).
  virtual int linear_dim() const = 0;
  virtual double loss(const Eigen::VectorXd& params) const = 0;
  virtual Eigen::VectorXd loss_grad(const Eigen::VectorXd& params) const = 0;
  /// m x linear_dim matrix of final-layer inputs (last column all ones for
  /// the bias); depends only on the hidden block of params.
  virtual Eigen::MatrixXd design_matrix(const Eigen::VectorXd& params) const = 0;
  virtual const Eigen::VectorXd& targets() const = 0;

  int hidden_dim() const { return num_params() - linear_dim(); }
};

/// Ridge coefficient for the LSGD linear solve: 1e-8 * sample count.
double lsgd_ridge(int sample_count);

/// One hybrid step: (1) set the linear tail to the ridge-regularized least
/// squares optimum for the current hidden block; (2) one Adam step on the
/// hidden block with the tail fixed. Returns the updated parameter vector.
Eigen::VectorXd lsgd_step(const LinearTailNetwork& network, const Eigen::VectorXd& params,
                          const OptimizerConfig& cfg, AdamState& state);

}  // namespace varpro
