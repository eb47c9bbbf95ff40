#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "test_support.hpp"
#include "varpro/optimizers.hpp"
#include "varpro/problems.hpp"
#include "varpro/reduction.hpp"
#include "varpro/resnet.hpp"

using namespace varpro;
using namespace varpro::testing;

namespace {

OptimizerConfig gd_config(double step, int iters, double tol = 1e-12) {
  OptimizerConfig cfg;
  cfg.step_size = step;
  cfg.max_iters = iters;
  cfg.grad_tol = tol;
  return cfg;
}

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool traces_identical(const Trace& a, const Trace& b) {
  if (a.iterates.size() != b.iterates.size() || a.stalled != b.stalled) return false;
  for (std::size_t i = 0; i < a.iterates.size(); ++i) {
    const auto& ra = a.iterates[i];
    const auto& rb = b.iterates[i];
    if (ra.iter != rb.iter || !bits_equal(ra.objective, rb.objective) ||
        !bits_equal(ra.grad_norm, rb.grad_norm) || !bits_equal(ra.step, rb.step) ||
        ra.params.size() != rb.params.size()) {
      return false;
    }
    for (Eigen::Index j = 0; j < ra.params.size(); ++j) {
      if (!bits_equal(ra.params[j], rb.params[j])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  OptimizerConfig cfg;
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.adam_beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.lm_down = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("gradient descent on the reduced Rosenbrock") {
  const auto problem = make_rosenbrock();
  const ReducedObjective reduced(*problem);
  const auto value = [&](const Eigen::VectorXd& x) { return reduced.value(x); };
  const auto grad = [&](const Eigen::VectorXd& x) { return reduced.gradient(x); };

  const Trace trace =
      gradient_descent(value, grad, Eigen::VectorXd::Constant(1, -1.5), gd_config(0.4, 100, 1e-9));
  REQUIRE(trace.iterates.size() >= 2);
  // One step lands exactly on 0.5.
  CHECK(trace.iterates[1].params[0] == 0.5);
  bool reached = false;
  std::size_t reached_at = 0;
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    if (std::abs(trace.iterates[i].params[0] - 1.0) < 1e-6) {
      reached = true;
      reached_at = i;
      break;
    }
  }
  CHECK(reached);
  CHECK(reached_at <= 40);
}

TEST_CASE("gradient descent diverges on the full Rosenbrock with a large step") {
  const auto problem = make_rosenbrock();
  const auto value = [&](const Eigen::VectorXd& t) {
    return problem->value({t.head(1), t.tail(1)});
  };
  const auto grad = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd g(2);
    g << problem->grad_x({t.head(1), t.tail(1)}), problem->grad_y({t.head(1), t.tail(1)});
    return g;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.5, 2.25;
  try {
    gradient_descent(value, grad, x0, gd_config(0.1, 1000));
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(!e.trace().iterates.empty());
    CHECK(e.trace().iterates.front().params[0] == -1.5);
  }
}

TEST_CASE("gradient descent with the stable step creeps along the valley") {
  const auto problem = make_rosenbrock();
  const auto value = [&](const Eigen::VectorXd& t) {
    return problem->value({t.head(1), t.tail(1)});
  };
  const auto grad = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd g(2);
    g << problem->grad_x({t.head(1), t.tail(1)}), problem->grad_y({t.head(1), t.tail(1)});
    return g;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.5, 2.25;
  const Trace trace = gradient_descent(value, grad, x0, gd_config(1e-3, 100000, 0.0));
  std::size_t first_below = 0;
  for (; first_below < trace.iterates.size(); ++first_below) {
    if (trace.iterates[first_below].objective < 1e-6) break;
  }
  REQUIRE(first_below < trace.iterates.size());
  CHECK(first_below > 1000);
}

TEST_CASE("LM solves a linear least squares problem in a few accepted steps") {
  Eigen::MatrixXd A(2, 2);
  A << 3.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd b(2);
  b << 1.0, -1.0;
  const auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x - b; };
  const auto jacobian = [&](const Eigen::VectorXd&) -> Eigen::MatrixXd { return A; };
  OptimizerConfig cfg;
  cfg.max_iters = 50;
  const Trace lm = levenberg_marquardt(residual, jacobian, Eigen::VectorXd::Zero(2), cfg);
  CHECK(!lm.stalled);
  CHECK(lm.iterates.size() - 1 <= 5);  // accepted steps
  const Eigen::VectorXd x_star = A.ldlt().solve(b);
  CHECK((lm.back().params - x_star).norm() < 1e-10);
  CHECK(residual(lm.back().params).norm() < 1e-10);
}

TEST_CASE("LM accepted steps strictly decrease the cost") {
  const TeacherStudentProblem ts = make_teacher_student({.seed = 87});
  const auto residual = [&](const Eigen::VectorXd& x) { return reduced_residual(*ts.snlls, x); };
  const auto jacobian = [&](const Eigen::VectorXd& x) {
    return varpro_jacobian(*ts.snlls, x, JacobianMode::Kaufman);
  };
  Rng rng(5);
  OptimizerConfig cfg;
  cfg.max_iters = 40;
  const Trace trace =
      levenberg_marquardt(residual, jacobian, uniform_vector(rng, 15, -0.6, 0.6), cfg);
  for (std::size_t i = 1; i < trace.iterates.size(); ++i) {
    CHECK(trace.iterates[i].objective < trace.iterates[i - 1].objective);
  }
}

TEST_CASE("LM stalls by damping overflow when no step can decrease the cost") {
  // A deliberately wrong Jacobian makes every proposal uphill.
  const auto residual = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, 10.0 - x[0]);
  };
  const auto jacobian = [](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, 1.0);
  };
  OptimizerConfig cfg;
  cfg.max_iters = 100;
  const Trace trace = levenberg_marquardt(residual, jacobian, Eigen::VectorXd::Zero(1), cfg);
  CHECK(trace.stalled);
}

TEST_CASE("adam matches an independent reference on the quadratic bowl") {
  OptimizerConfig cfg;
  cfg.step_size = 0.1;
  cfg.max_iters = 500;
  cfg.grad_tol = 0.0;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  const Trace trace = adam([](const Eigen::VectorXd& x) { return x; }, x0, cfg,
                           [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); });

  // Reference loop, written out independently.
  Eigen::VectorXd x = x0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
  for (int t = 1; t <= 500; ++t) {
    const Eigen::VectorXd g = x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g.cwiseProduct(g);
    const Eigen::VectorXd m_hat = m / (1.0 - std::pow(0.9, t));
    const Eigen::VectorXd v_hat = v / (1.0 - std::pow(0.999, t));
    for (int i = 0; i < 2; ++i) x[i] -= 0.1 * m_hat[i] / (std::sqrt(v_hat[i]) + 1e-8);
  }
  CHECK(x.norm() < 1e-3);
  CHECK((trace.back().params - x).norm() < 1e-12);
}

TEST_CASE("adam leaves a zero-gradient start unchanged") {
  OptimizerConfig cfg;
  cfg.step_size = 0.1;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 2.0);
  const Trace trace =
      adam([](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); }, x0, cfg);
  CHECK(trace.iterates.size() == 1);
  CHECK(trace.back().params == x0);
}

TEST_CASE("drivers are deterministic") {
  const auto problem = make_rosenbrock();
  const ReducedObjective reduced(*problem);
  const auto value = [&](const Eigen::VectorXd& x) { return reduced.value(x); };
  const auto grad = [&](const Eigen::VectorXd& x) { return reduced.gradient(x); };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, -1.5);
  CHECK(traces_identical(gradient_descent(value, grad, x0, gd_config(0.4, 50, 1e-9)),
                         gradient_descent(value, grad, x0, gd_config(0.4, 50, 1e-9))));

  const TeacherStudentProblem ts = make_teacher_student({.seed = 3});
  const auto residual = [&](const Eigen::VectorXd& x) { return reduced_residual(*ts.snlls, x); };
  const auto jacobian = [&](const Eigen::VectorXd& x) {
    return varpro_jacobian(*ts.snlls, x, JacobianMode::Kaufman);
  };
  Rng rng(6);
  const Eigen::VectorXd lm_x0 = uniform_vector(rng, 15, -0.6, 0.6);
  OptimizerConfig lm_cfg;
  lm_cfg.max_iters = 30;
  CHECK(traces_identical(levenberg_marquardt(residual, jacobian, lm_x0, lm_cfg),
                         levenberg_marquardt(residual, jacobian, lm_x0, lm_cfg)));

  OptimizerConfig adam_cfg;
  adam_cfg.step_size = 0.05;
  adam_cfg.max_iters = 100;
  adam_cfg.grad_tol = 0.0;
  const auto bowl_grad = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
  CHECK(traces_identical(adam(bowl_grad, Eigen::VectorXd::Ones(4), adam_cfg),
                         adam(bowl_grad, Eigen::VectorXd::Ones(4), adam_cfg)));
}

TEST_CASE("adam on the seeded resnet problem is bit-identical across runs") {
  ResNetSpec spec;
  spec.blocks = 2;
  spec.width = 4;
  spec.grid_n = 5;
  const auto network = make_resnet(spec);
  OptimizerConfig cfg;
  cfg.step_size = 1e-2;
  cfg.max_iters = 5;
  cfg.grad_tol = 0.0;
  const auto grad = [&](const Eigen::VectorXd& x) { return network->loss_grad(x); };
  const auto value = [&](const Eigen::VectorXd& x) { return network->loss(x); };
  const Eigen::VectorXd x0 = network->init_params(spec.seed);
  CHECK(traces_identical(adam(grad, x0, cfg, value), adam(grad, x0, cfg, value)));
}

TEST_CASE("trace CSV carries parameter columns only up to 16 parameters") {
  Trace small;
  small.iterates.push_back({0, Eigen::VectorXd::Zero(2), 1.0, 0.5, 0.1});
  small.iterates.push_back({1, Eigen::VectorXd::Ones(2), 0.5, 0.25, 0.1});
  const std::string csv = small.to_csv();
  CHECK(csv.rfind("iter,objective,grad_norm,step,x0,x1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  Trace wide;
  wide.iterates.push_back({0, Eigen::VectorXd::Zero(17), 1.0, 0.5, 0.1});
  CHECK(wide.to_csv().rfind("iter,objective,grad_norm,step\n", 0) == 0);
}

namespace {

/// Trivial network with no hidden parameters: predictions are linear in the
/// two tail parameters through a fixed design matrix.
class IdentityHiddenNetwork final : public LinearTailNetwork {
 public:
  IdentityHiddenNetwork() {
    design_.resize(5, 2);
    design_ << 0.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.5, 1.0, 2.0, 1.0;
    targets_.resize(5);
    targets_ << 0.1, 0.8, 2.2, 2.9, 4.1;
  }
  int num_params() const override { return 2; }
  int linear_dim() const override { return 2; }
  double loss(const Eigen::VectorXd& params) const override {
    return 0.5 * (design_ * params - targets_).squaredNorm() / design_.rows();
  }
  Eigen::VectorXd loss_grad(const Eigen::VectorXd& params) const override {
    return design_.transpose() * (design_ * params - targets_) / design_.rows();
  }
  Eigen::MatrixXd design_matrix(const Eigen::VectorXd&) const override { return design_; }
  const Eigen::VectorXd& targets() const override { return targets_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd targets_;
};

}  // namespace

TEST_CASE("lsgd_step solves the tail to ridge optimality") {
  IdentityHiddenNetwork network;
  OptimizerConfig cfg;
  cfg.step_size = 0.01;
  AdamState state;
  const Eigen::VectorXd updated = lsgd_step(network, Eigen::VectorXd::Zero(2), cfg, state);

  const double ridge = lsgd_ridge(5);
  const Eigen::VectorXd grad_with_ridge =
      network.loss_grad(updated) + (ridge / 5.0) * updated;
  CHECK(grad_with_ridge.norm() <= 1e-6);

  // With no hidden parameters the loss equals the least squares minimum.
  const Eigen::MatrixXd design = network.design_matrix(updated);
  const Eigen::VectorXd lsq =
      (design.transpose() * design).ldlt().solve(design.transpose() * network.targets());
  const double lsq_loss = 0.5 * (design * lsq - network.targets()).squaredNorm() / 5.0;
  CHECK(network.loss(updated) == doctest::Approx(lsq_loss).epsilon(1e-9));
}
