#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "varpro/optimizers.hpp"
#include "varpro/separable.hpp"

namespace varpro {

struct ResNetSpec {
  int blocks = 4;
  int width = 16;
  /// Samples per axis of the uniform grid on [0, 1]^2.
  int grid_n = 32;
  int trials = 8;
  int epochs = 2000;
  std::uint64_t seed = 1;

  static ResNetSpec desk_scale() { return {}; }
  static ResNetSpec paper_scale() { return {8, 64, 32, 16, 10000, 1}; }
};

/// Deep residual regressor for y = sin(2 pi x1) * cos(2 pi x2): a linear
/// embedding to `width`, `blocks` residual blocks h + W2 tanh(W1 h + b1) + b2,
/// and a linear output layer. Loss is the mean of 0.5 * squared error over
/// the grid. Gradients come from reverse-mode differentiation.
class ResnetProblem final : public LinearTailNetwork {
 public:
  explicit ResnetProblem(const ResNetSpec& spec);

  const ResNetSpec& spec() const { return spec_; }
  int sample_count() const { return static_cast<int>(targets_.size()); }

  int num_params() const override { return num_params_; }
  int linear_dim() const override { return spec_.width + 1; }
  double loss(const Eigen::VectorXd& params) const override;
  Eigen::VectorXd loss_grad(const Eigen::VectorXd& params) const override;
  Eigen::MatrixXd design_matrix(const Eigen::VectorXd& params) const override;
  const Eigen::VectorXd& targets() const override { return targets_; }

  Eigen::VectorXd predictions(const Eigen::VectorXd& params) const;

  /// Uniform(-r, r) initialization with r = 1 / sqrt(fan-in) per layer.
  Eigen::VectorXd init_params(std::uint64_t trial_seed) const;

 private:
  Eigen::MatrixXd hidden_forward(const Eigen::VectorXd& params) const;

  ResNetSpec spec_;
  int num_params_ = 0;
  Eigen::MatrixXd inputs_;  // 2 x m
  Eigen::VectorXd targets_;
};

std::shared_ptr<ResnetProblem> make_resnet(const ResNetSpec& spec);

/// Separable view with x = hidden parameters and y = the linear tail. The
/// inner solve is the LSGD ridge solve; hessian_blocks is unsupported and
/// throws CapabilityError.
std::shared_ptr<SeparableProblem> as_separable(std::shared_ptr<const ResnetProblem> network);

}  // namespace varpro
