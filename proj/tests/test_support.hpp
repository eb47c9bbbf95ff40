#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "varpro/problems.hpp"
#include "varpro/resnet.hpp"
#include "varpro/rng.hpp"
#include "varpro/separable.hpp"
#include "varpro/snlls.hpp"

namespace varpro::testing {

inline double rel_err(double actual, double expected) {
  return std::abs(actual - expected) / (1.0 + std::abs(expected));
}

inline double rel_err(const Eigen::VectorXd& actual, const Eigen::VectorXd& expected) {
  return (actual - expected).norm() / (1.0 + expected.norm());
}

inline double rel_err(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& expected) {
  return (actual - expected).norm() / (1.0 + expected.norm());
}

inline Eigen::VectorXd uniform_vector(Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

/// A builtin problem with samplers over its domain.
struct TestProblem {
  std::string name;
  std::shared_ptr<SeparableProblem> problem;
  std::function<Eigen::VectorXd(Rng&)> sample_x;
  std::function<Eigen::VectorXd(Rng&)> sample_y;
};

inline Eigen::MatrixXd matfac_example_matrix() {
  Eigen::MatrixXd M(2, 2);
  M << 0.0, 1.0, 0.0, 0.0;
  return M;
}

/// Every builtin separable problem that carries analytic Hessian blocks.
inline std::vector<TestProblem> second_order_problems() {
  std::vector<TestProblem> out;
  out.push_back({"rosenbrock", make_rosenbrock(),
                 [](Rng& rng) { return uniform_vector(rng, 1, -2.0, 2.0); },
                 [](Rng& rng) { return uniform_vector(rng, 1, -2.0, 4.0); }});
  out.push_back({"cubic", make_cubic(),
                 [](Rng& rng) { return uniform_vector(rng, 1, -3.0, 4.0); },
                 [](Rng& rng) { return uniform_vector(rng, 1, -4.0, 4.0); }});
  // The inner minimizer branch switches at x = 2, where the reduced function
  // has a kink; sample clear of it on both sides.
  out.push_back({"appendix_b", make_appendix_b(),
                 [](Rng& rng) {
                   return rng.uniform() < 0.7 ? uniform_vector(rng, 1, -3.0, 1.5)
                                              : uniform_vector(rng, 1, 2.5, 4.5);
                 },
                 [](Rng& rng) { return uniform_vector(rng, 1, -2.0, 4.0); }});
  out.push_back({"matfac_rank1", make_matfac_rank1(matfac_example_matrix()),
                 [](Rng& rng) {
                   Eigen::VectorXd x = uniform_vector(rng, 2, -2.0, 2.0);
                   while (x.norm() < 0.3) x = uniform_vector(rng, 2, -2.0, 2.0);
                   return x;
                 },
                 [](Rng& rng) { return uniform_vector(rng, 2, -2.0, 2.0); }});
  out.push_back({"two_param_mlp", as_separable(make_two_param(TwoParamModel::Mlp)),
                 [](Rng& rng) { return uniform_vector(rng, 1, -4.0, 4.0); },
                 [](Rng& rng) { return uniform_vector(rng, 1, -1.0, 1.0); }});
  out.push_back({"two_param_rbf", as_separable(make_two_param(TwoParamModel::Rbf)),
                 [](Rng& rng) { return uniform_vector(rng, 1, -2.0, 2.0); },
                 [](Rng& rng) { return uniform_vector(rng, 1, -3.0, 3.0); }});
  out.push_back({"teacher_student",
                 as_separable(make_teacher_student({.seed = 11}).snlls),
                 [](Rng& rng) { return uniform_vector(rng, 15, -1.0, 1.0); },
                 [](Rng& rng) { return uniform_vector(rng, 6, -2.0, 2.0); }});
  return out;
}

/// Same list plus the resnet problem (first-order only), desk-scaled down.
inline std::vector<TestProblem> all_problems() {
  auto out = second_order_problems();
  ResNetSpec spec;
  spec.blocks = 2;
  spec.width = 4;
  spec.grid_n = 8;
  auto network = make_resnet(spec);
  const int hidden = network->hidden_dim();
  const int tail = network->linear_dim();
  out.push_back({"resnet_small", as_separable(std::shared_ptr<const ResnetProblem>(network)),
                 [hidden](Rng& rng) { return uniform_vector(rng, hidden, -0.5, 0.5); },
                 [tail](Rng& rng) { return uniform_vector(rng, tail, -0.5, 0.5); }});
  return out;
}

}  // namespace varpro::testing
