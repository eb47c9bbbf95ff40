#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "varpro/finite_diff.hpp"
#include "varpro/problems.hpp"
#include "varpro/separable.hpp"

using namespace varpro;
using namespace varpro::testing;

namespace {

SeparablePoint pt(double x, double y) {
  return {Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y)};
}

}  // namespace

TEST_CASE("evaluate on the worked examples") {
  CHECK(evaluate(*make_rosenbrock(), pt(1.0, 1.0)) == 0.0);
  CHECK(evaluate(*make_cubic(), pt(0.0, 0.0)) == 4.0);
  CHECK(evaluate(*make_appendix_b(), pt(0.0, 3.0)) == doctest::Approx(-27.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("evaluate rejects mismatched dimensions") {
  const auto problem = make_rosenbrock();
  CHECK_THROWS_AS(evaluate(*problem, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)}),
                  DimensionError);
  CHECK_THROWS_AS(evaluate(*problem, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(3)}),
                  DimensionError);
}

TEST_CASE("gradient vanishes at the known stationary points") {
  const auto cubic = make_cubic();
  for (const auto& [x, y] : {std::pair{-1.0, 2.5}, std::pair{3.0, -1.5}}) {
    const auto [gx, gy] = gradient(*cubic, pt(x, y));
    CHECK(gx.norm() == 0.0);
    CHECK(gy.norm() == 0.0);
  }
  const auto appendix_b = make_appendix_b();
  const auto [gx, gy] = gradient(*appendix_b, pt(0.0, 0.0));
  CHECK(gx.norm() == 0.0);
  CHECK(gy.norm() == 0.0);
}

TEST_CASE("hessian blocks match the hand-derived forms") {
  const auto cubic = make_cubic();
  HessianBlocks blocks = cubic->hessian_blocks(pt(-1.0, 2.5));
  CHECK(blocks.A(0, 0) == -2.0);
  CHECK(blocks.B(0, 0) == 2.0);
  CHECK(blocks.D(0, 0) == 2.0);
  blocks = cubic->hessian_blocks(pt(3.0, -1.5));
  CHECK(blocks.A(0, 0) == 6.0);

  blocks = make_rosenbrock()->hessian_blocks(pt(1.0, 1.0));
  CHECK(blocks.A(0, 0) == 802.0);
  CHECK(blocks.B(0, 0) == -400.0);
  CHECK(blocks.D(0, 0) == 200.0);
}

TEST_CASE("fd_gradient frozen values") {
  const auto [gx0, gy0] = fd_gradient(*make_rosenbrock(), pt(1.0, 1.0));
  CHECK(std::abs(gx0[0]) < 1e-4);
  CHECK(std::abs(gy0[0]) < 1e-4);

  const auto [gx1, gy1] = fd_gradient(*make_cubic(), pt(0.0, 0.0));
  CHECK(gx1[0] == doctest::Approx(-6.0).epsilon(1e-6));
  CHECK(gy1[0] == doctest::Approx(-3.0).epsilon(1e-6));

  CHECK_THROWS_AS(fd_gradient(*make_cubic(), pt(0.0, 0.0), 0.0), ValidationError);
}

TEST_CASE("analytic gradients match central differences on 100 seeded points") {
  for (const auto& tp : all_problems()) {
    CAPTURE(tp.name);
    Rng rng(2024);
    const int points = tp.name == "resnet_small" ? 10 : 100;
    for (int i = 0; i < points; ++i) {
      const SeparablePoint point{tp.sample_x(rng), tp.sample_y(rng)};
      const auto [gx, gy] = gradient(*tp.problem, point);
      const auto [fx, fy] = fd_gradient(*tp.problem, point);
      Eigen::VectorXd analytic(gx.size() + gy.size());
      analytic << gx, gy;
      Eigen::VectorXd numeric(fx.size() + fy.size());
      numeric << fx, fy;
      CHECK((analytic - numeric).norm() / (1.0 + analytic.norm()) < 1e-5);
    }
  }
}

TEST_CASE("hessian blocks match the finite-difference Hessian") {
  for (const auto& tp : second_order_problems()) {
    CAPTURE(tp.name);
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
      const SeparablePoint point{tp.sample_x(rng), tp.sample_y(rng)};
      const Eigen::MatrixXd analytic = hessian_blocks(*tp.problem, point).full();
      const Eigen::MatrixXd numeric = fd_hessian(*tp.problem, point);
      CHECK(rel_err(analytic, numeric) < 1e-4);
      CHECK(rel_err(analytic, analytic.transpose().eval()) < 1e-12);
    }
  }
}

TEST_CASE("evaluation is pure") {
  for (const auto& tp : all_problems()) {
    CAPTURE(tp.name);
    Rng rng(5);
    const SeparablePoint point{tp.sample_x(rng), tp.sample_y(rng)};
    const double v1 = evaluate(*tp.problem, point);
    const double v2 = evaluate(*tp.problem, point);
    CHECK(v1 == v2);
    const auto [gx1, gy1] = gradient(*tp.problem, point);
    const auto [gx2, gy2] = gradient(*tp.problem, point);
    CHECK(gx1 == gx2);
    CHECK(gy1 == gy2);
  }
}

TEST_CASE("resnet problem reports hessian_blocks as unsupported") {
  ResNetSpec spec;
  spec.blocks = 2;
  spec.width = 4;
  spec.grid_n = 4;
  auto network = make_resnet(spec);
  auto separable = as_separable(std::shared_ptr<const ResnetProblem>(network));
  const SeparablePoint point{Eigen::VectorXd::Zero(separable->p()),
                             Eigen::VectorXd::Zero(separable->q())};
  CHECK_THROWS_AS(separable->hessian_blocks(point), CapabilityError);
}
