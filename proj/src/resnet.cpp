#include "varpro/resnet.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "varpro/rng.hpp"
#include "varpro/snlls.hpp"

namespace varpro {

namespace {

// Parameter layout: [W_in, b_in, {W1, b1, W2, b2} per block, w_out, b_out],
// matrices flattened column-major.

Eigen::Map<const Eigen::MatrixXd> const_matrix(const Eigen::VectorXd& params,
                                               Eigen::Index& offset, int rows, int cols) {
  const double* ptr = params.data() + offset;
  offset += static_cast<Eigen::Index>(rows) * cols;
  return Eigen::Map<const Eigen::MatrixXd>(ptr, rows, cols);
}

Eigen::Map<const Eigen::VectorXd> const_vector(const Eigen::VectorXd& params,
                                               Eigen::Index& offset, int size) {
  const double* ptr = params.data() + offset;
  offset += size;
  return Eigen::Map<const Eigen::VectorXd>(ptr, size);
}

}  // namespace

ResnetProblem::ResnetProblem(const ResNetSpec& spec) : spec_(spec) {
  if (spec.blocks < 1 || spec.width < 1 || spec.grid_n < 2) {
    throw ValidationError("resnet spec needs blocks >= 1, width >= 1, grid_n >= 2");
  }
  const int w = spec.width;
  num_params_ = w * 2 + w + spec.blocks * (2 * w * w + 2 * w) + w + 1;

  const int n = spec.grid_n;
  const int m = n * n;
  inputs_.resize(2, m);
  targets_.resize(m);
  for (int i = 0; i < n; ++i) {
    const double x1 = static_cast<double>(i) / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double x2 = static_cast<double>(j) / (n - 1);
      const int idx = i * n + j;
      inputs_(0, idx) = x1;
      inputs_(1, idx) = x2;
      targets_[idx] = std::sin(2.0 * std::numbers::pi * x1) * std::cos(2.0 * std::numbers::pi * x2);
    }
  }
}

Eigen::MatrixXd ResnetProblem::hidden_forward(const Eigen::VectorXd& params) const {
  const int w = spec_.width;
  Eigen::Index offset = 0;
  const auto W_in = const_matrix(params, offset, w, 2);
  const auto b_in = const_vector(params, offset, w);

  Eigen::MatrixXd H = (W_in * inputs_).colwise() + b_in;
  for (int b = 0; b < spec_.blocks; ++b) {
    const auto W1 = const_matrix(params, offset, w, w);
    const auto b1 = const_vector(params, offset, w);
    const auto W2 = const_matrix(params, offset, w, w);
    const auto b2 = const_vector(params, offset, w);
    const Eigen::MatrixXd Z = (((W1 * H).colwise() + b1)).array().tanh();
    H = (H + W2 * Z).colwise() + b2;
  }
  return H;
}

Eigen::VectorXd ResnetProblem::predictions(const Eigen::VectorXd& params) const {
  if (params.size() != num_params_) throw DimensionError("resnet: wrong parameter count");
  const Eigen::MatrixXd H = hidden_forward(params);
  Eigen::Index offset = num_params_ - linear_dim();
  const auto w_out = const_vector(params, offset, spec_.width);
  const double b_out = params[num_params_ - 1];
  return (H.transpose() * w_out).array() + b_out;
}

double ResnetProblem::loss(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd err = predictions(params) - targets_;
  return 0.5 * err.squaredNorm() / sample_count();
}

Eigen::MatrixXd ResnetProblem::design_matrix(const Eigen::VectorXd& params) const {
  if (params.size() != num_params_) throw DimensionError("resnet: wrong parameter count");
  const Eigen::MatrixXd H = hidden_forward(params);
  Eigen::MatrixXd design(sample_count(), spec_.width + 1);
  design.leftCols(spec_.width) = H.transpose();
  design.col(spec_.width).setOnes();
  return design;
}

Eigen::VectorXd ResnetProblem::loss_grad(const Eigen::VectorXd& params) const {
  if (params.size() != num_params_) throw DimensionError("resnet: wrong parameter count");
  const int w = spec_.width;
  const int m = sample_count();

  // Forward pass, caching block inputs and tanh outputs.
  Eigen::Index offset = 0;
  const auto W_in = const_matrix(params, offset, w, 2);
  const auto b_in = const_vector(params, offset, w);
  std::vector<Eigen::MatrixXd> block_in(spec_.blocks);
  std::vector<Eigen::MatrixXd> block_z(spec_.blocks);
  std::vector<Eigen::Index> block_offset(spec_.blocks);
  Eigen::MatrixXd H = (W_in * inputs_).colwise() + b_in;
  for (int b = 0; b < spec_.blocks; ++b) {
    block_offset[b] = offset;
    const auto W1 = const_matrix(params, offset, w, w);
    const auto b1 = const_vector(params, offset, w);
    const auto W2 = const_matrix(params, offset, w, w);
    const auto b2 = const_vector(params, offset, w);
    block_in[b] = H;
    block_z[b] = (((W1 * H).colwise() + b1)).array().tanh();
    H = (H + W2 * block_z[b]).colwise() + b2;
  }
  const auto w_out = const_vector(params, offset, w);
  const double b_out = params[num_params_ - 1];
  const Eigen::VectorXd out = (H.transpose() * w_out).array() + b_out;

  // Reverse pass.
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_params_);
  const Eigen::VectorXd err = (out - targets_) / m;
  grad.segment(num_params_ - linear_dim(), w) = H * err;
  grad[num_params_ - 1] = err.sum();

  Eigen::MatrixXd dH = w_out * err.transpose();
  for (int b = spec_.blocks - 1; b >= 0; --b) {
    Eigen::Index o = block_offset[b];
    const auto W1 = const_matrix(params, o, w, w);
    o += w;  // skip b1
    const auto W2 = const_matrix(params, o, w, w);

    Eigen::Index go = block_offset[b];
    Eigen::Map<Eigen::MatrixXd> g_W1(grad.data() + go, w, w);
    go += static_cast<Eigen::Index>(w) * w;
    auto g_b1 = grad.segment(go, w);
    go += w;
    Eigen::Map<Eigen::MatrixXd> g_W2(grad.data() + go, w, w);
    go += static_cast<Eigen::Index>(w) * w;
    auto g_b2 = grad.segment(go, w);

    g_W2 = dH * block_z[b].transpose();
    g_b2 = dH.rowwise().sum();
    const Eigen::MatrixXd dA =
        (W2.transpose() * dH).array() * (1.0 - block_z[b].array().square());
    g_W1 = dA * block_in[b].transpose();
    g_b1 = dA.rowwise().sum();
    dH += W1.transpose() * dA;
  }
  Eigen::Map<Eigen::MatrixXd>(grad.data(), w, 2) = dH * inputs_.transpose();
  grad.segment(static_cast<Eigen::Index>(w) * 2, w) = dH.rowwise().sum();
  return grad;
}

Eigen::VectorXd ResnetProblem::init_params(std::uint64_t trial_seed) const {
  Rng rng(trial_seed);
  const int w = spec_.width;
  Eigen::VectorXd params(num_params_);
  Eigen::Index offset = 0;
  const auto fill = [&](Eigen::Index count, double fan_in) {
    const double r = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < count; ++i) params[offset++] = rng.uniform(-r, r);
  };
  fill(static_cast<Eigen::Index>(w) * 2 + w, 2.0);                   // W_in, b_in
  for (int b = 0; b < spec_.blocks; ++b) {
    fill(2 * static_cast<Eigen::Index>(w) * w + 2 * w, static_cast<double>(w));
  }
  fill(w + 1, static_cast<double>(w));                               // w_out, b_out
  return params;
}

std::shared_ptr<ResnetProblem> make_resnet(const ResNetSpec& spec) {
  return std::make_shared<ResnetProblem>(spec);
}

namespace {

class ResnetSeparable final : public SeparableProblem {
 public:
  explicit ResnetSeparable(std::shared_ptr<const ResnetProblem> network)
      : network_(std::move(network)) {}

  int p() const override { return network_->hidden_dim(); }
  int q() const override { return network_->linear_dim(); }

  double value(const SeparablePoint& pt) const override { return network_->loss(assemble(pt)); }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    return network_->loss_grad(assemble(pt)).head(p());
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    return network_->loss_grad(assemble(pt)).tail(q());
  }

  HessianBlocks hessian_blocks(const SeparablePoint&) const override {
    throw CapabilityError("resnet problem carries first-order derivatives only");
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd params(network_->num_params());
    params.head(p()) = x;
    params.tail(q()).setZero();
    // Minimum-norm least squares; LSGD's ridge solve sits slightly off the
    // true inner optimum and lives in lsgd_step instead.
    return pinv_solve(network_->design_matrix(params), network_->targets());
  }

  double inner_tolerance() const override { return 1e-8; }

 private:
  Eigen::VectorXd assemble(const SeparablePoint& pt) const {
    Eigen::VectorXd params(network_->num_params());
    params.head(p()) = pt.x;
    params.tail(q()) = pt.y;
    return params;
  }

  std::shared_ptr<const ResnetProblem> network_;
};

}  // namespace

std::shared_ptr<SeparableProblem> as_separable(std::shared_ptr<const ResnetProblem> network) {
  return std::make_shared<ResnetSeparable>(std::move(network));
}

}  // namespace varpro
