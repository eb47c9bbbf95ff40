#include "varpro/problems.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "varpro/io.hpp"
#include "varpro/rng.hpp"

namespace varpro {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

class RosenbrockProblem final : public SeparableProblem {
 public:
  int p() const override { return 1; }
  int q() const override { return 1; }

  double value(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    const double y = pt.y[0];
    const double d = y - x * x;
    return (1.0 - x) * (1.0 - x) + 100.0 * d * d;
  }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    const double y = pt.y[0];
    Eigen::VectorXd g(1);
    g[0] = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
    return g;
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    Eigen::VectorXd g(1);
    g[0] = 200.0 * (pt.y[0] - x * x);
    return g;
  }

  HessianBlocks hessian_blocks(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    const double y = pt.y[0];
    HessianBlocks blocks;
    blocks.A = Eigen::MatrixXd::Constant(1, 1, 2.0 - 400.0 * y + 1200.0 * x * x);
    blocks.B = Eigen::MatrixXd::Constant(1, 1, -400.0 * x);
    blocks.D = Eigen::MatrixXd::Constant(1, 1, 200.0);
    return blocks;
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd y(1);
    y[0] = x[0] * x[0];
    return y;
  }
};

class CubicProblem final : public SeparableProblem {
 public:
  int p() const override { return 1; }
  int q() const override { return 1; }

  double value(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    const double y = pt.y[0];
    return x * x * x / 3.0 + y * y + 2.0 * x * y - 6.0 * x - 3.0 * y + 4.0;
  }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    Eigen::VectorXd g(1);
    g[0] = pt.x[0] * pt.x[0] + 2.0 * pt.y[0] - 6.0;
    return g;
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    Eigen::VectorXd g(1);
    g[0] = 2.0 * pt.y[0] + 2.0 * pt.x[0] - 3.0;
    return g;
  }

  HessianBlocks hessian_blocks(const SeparablePoint& pt) const override {
    HessianBlocks blocks;
    blocks.A = Eigen::MatrixXd::Constant(1, 1, 2.0 * pt.x[0]);
    blocks.B = Eigen::MatrixXd::Constant(1, 1, 2.0);
    blocks.D = Eigen::MatrixXd::Constant(1, 1, 2.0);
    return blocks;
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd y(1);
    y[0] = (3.0 - 2.0 * x[0]) / 2.0;
    return y;
  }
};

/// F(x, y) = xy + y^4/4 - y^3; inner stationarity x + y^3 - 3y^2 = 0.
class AppendixBProblem final : public SeparableProblem {
 public:
  int p() const override { return 1; }
  int q() const override { return 1; }

  double value(const SeparablePoint& pt) const override {
    const double x = pt.x[0];
    const double y = pt.y[0];
    return x * y + 0.25 * y * y * y * y - y * y * y;
  }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    Eigen::VectorXd g(1);
    g[0] = pt.y[0];
    return g;
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    const double y = pt.y[0];
    Eigen::VectorXd g(1);
    g[0] = pt.x[0] + y * y * y - 3.0 * y * y;
    return g;
  }

  HessianBlocks hessian_blocks(const SeparablePoint& pt) const override {
    const double y = pt.y[0];
    HessianBlocks blocks;
    blocks.A = Eigen::MatrixXd::Constant(1, 1, 0.0);
    blocks.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    blocks.D = Eigen::MatrixXd::Constant(1, 1, 3.0 * y * y - 6.0 * y);
    return blocks;
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    // Real roots of y^3 - 3y^2 + x = 0; shift y = t + 1 gives
    // t^3 - 3t + (x - 2) = 0.
    const double qq = x[0] - 2.0;
    std::vector<double> roots;
    if (std::abs(qq) <= 2.0) {
      const double angle = std::acos(-qq / 2.0) / 3.0;
      for (int k = 0; k < 3; ++k) {
        roots.push_back(2.0 * std::cos(angle - 2.0 * std::numbers::pi * k / 3.0) + 1.0);
      }
    } else {
      const double s = std::sqrt(qq * qq / 4.0 - 1.0);
      roots.push_back(std::cbrt(-qq / 2.0 + s) + std::cbrt(-qq / 2.0 - s) + 1.0);
    }
    // Two Newton polish sweeps; skipped near the double-root fold where the
    // derivative vanishes.
    for (double& y : roots) {
      for (int it = 0; it < 2; ++it) {
        const double g = y * y * y - 3.0 * y * y + x[0];
        const double dg = 3.0 * y * y - 6.0 * y;
        if (std::abs(dg) < 1e-8) break;
        y -= g / dg;
      }
    }
    double best = roots.front();
    double best_value = value({x, Eigen::VectorXd::Constant(1, best)});
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const double v = value({x, Eigen::VectorXd::Constant(1, roots[i])});
      if (v < best_value || (v == best_value && std::abs(roots[i]) < std::abs(best))) {
        best = roots[i];
        best_value = v;
      }
    }
    return Eigen::VectorXd::Constant(1, best);
  }
};

class MatfacRank1Problem final : public SeparableProblem {
 public:
  explicit MatfacRank1Problem(Eigen::MatrixXd M) : M_(std::move(M)) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M_);
    const Eigen::VectorXd& sigma = svd.singularValues();
    if (std::abs(sigma[0] - 1.0) > 1e-8 ||
        (sigma.size() > 1 && sigma[1] > 1e-8)) {
      throw ValidationError("matfac_rank1 expects a rank-1 matrix with unit-norm factors");
    }
  }

  int p() const override { return static_cast<int>(M_.rows()); }
  int q() const override { return static_cast<int>(M_.cols()); }

  double value(const SeparablePoint& pt) const override {
    return 0.5 * (pt.x * pt.y.transpose() - M_).squaredNorm();
  }

  Eigen::VectorXd grad_x(const SeparablePoint& pt) const override {
    return (pt.x * pt.y.transpose() - M_) * pt.y;
  }

  Eigen::VectorXd grad_y(const SeparablePoint& pt) const override {
    return (pt.x * pt.y.transpose() - M_).transpose() * pt.x;
  }

  HessianBlocks hessian_blocks(const SeparablePoint& pt) const override {
    HessianBlocks blocks;
    blocks.A = pt.y.squaredNorm() * Eigen::MatrixXd::Identity(p(), p());
    blocks.B = 2.0 * pt.y * pt.x.transpose() - M_.transpose();
    blocks.D = pt.x.squaredNorm() * Eigen::MatrixXd::Identity(q(), q());
    return blocks;
  }

  Eigen::VectorXd inner_solve(const Eigen::VectorXd& x) const override {
    const double norm_sq = x.squaredNorm();
    if (norm_sq == 0.0) {
      throw DomainError("matfac_rank1 inner solve is undefined at x = 0");
    }
    return M_.transpose() * x / norm_sq;
  }

 private:
  Eigen::MatrixXd M_;
};

}  // namespace

std::shared_ptr<SeparableProblem> make_rosenbrock() { return std::make_shared<RosenbrockProblem>(); }

std::shared_ptr<SeparableProblem> make_cubic() { return std::make_shared<CubicProblem>(); }

std::shared_ptr<SeparableProblem> make_appendix_b() { return std::make_shared<AppendixBProblem>(); }

std::shared_ptr<SeparableProblem> make_matfac_rank1(const Eigen::MatrixXd& M) {
  return std::make_shared<MatfacRank1Problem>(M);
}

double grassmann_reduced_value(const Eigen::MatrixXd& M, const Eigen::MatrixXd& basis) {
  if (basis.rows() != M.rows()) {
    throw DimensionError("grassmann_reduced_value: basis rows must match M rows");
  }
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(basis.cols(), basis.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10) {
    throw ValidationError("grassmann_reduced_value: basis is not orthonormal");
  }
  return 0.5 * (M.squaredNorm() - (basis.transpose() * M).squaredNorm());
}

const TwoParamDataset& two_param_dataset(TwoParamModel model) {
  static const TwoParamDataset mlp = [] {
    TwoParamDataset d;
    d.inputs.resize(7);
    d.inputs << -0.5, -0.2, 0.0, 0.3, 0.8, 0.5, -0.11;
    d.targets.resize(7);
    d.targets << -0.02, -0.03, -0.01, -0.03, 0.02, 0.02, 0.05;
    return d;
  }();
  static const TwoParamDataset rbf = [] {
    TwoParamDataset d;
    d.inputs.resize(12);
    d.inputs << 1.4, -2.1, 0.7, 0.5, 1.2, -1.5, 1.0, 2.1, -0.3, -0.6, -1.0, 2.12;
    d.targets.resize(12);
    d.targets << -0.2, -0.6, 0.2, 0.2, -1.5, 0.1, -0.5, -1.0, 1.0, 2.0, 3.0, -2.1;
    return d;
  }();
  return model == TwoParamModel::Mlp ? mlp : rbf;
}

std::shared_ptr<const SnllsProblem> make_two_param(TwoParamModel model) {
  const TwoParamDataset& data = two_param_dataset(model);
  auto problem = std::make_shared<SnllsProblem>();
  problem->p = 1;
  problem->q = 1;
  problem->data = data.targets;
  const Eigen::VectorXd inputs = data.inputs;
  if (model == TwoParamModel::Mlp) {
    problem->model_matrix = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd G(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) G(i, 0) = sigmoid(w[0] * inputs[i]);
      return G;
    };
    problem->model_matrix_derivs = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd dG(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) {
        const double s = sigmoid(w[0] * inputs[i]);
        dG(i, 0) = s * (1.0 - s) * inputs[i];
      }
      return std::vector<Eigen::MatrixXd>{dG};
    };
    problem->model_matrix_second_derivs = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd d2G(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) {
        const double s = sigmoid(w[0] * inputs[i]);
        d2G(i, 0) = s * (1.0 - s) * (1.0 - 2.0 * s) * inputs[i] * inputs[i];
      }
      return std::vector<Eigen::MatrixXd>{d2G};
    };
  } else {
    problem->model_matrix = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd G(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) {
        const double d = inputs[i] - w[0];
        G(i, 0) = std::exp(-d * d);
      }
      return G;
    };
    problem->model_matrix_derivs = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd dG(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) {
        const double d = inputs[i] - w[0];
        dG(i, 0) = 2.0 * d * std::exp(-d * d);
      }
      return std::vector<Eigen::MatrixXd>{dG};
    };
    problem->model_matrix_second_derivs = [inputs](const Eigen::VectorXd& w) {
      Eigen::MatrixXd d2G(inputs.size(), 1);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) {
        const double d = inputs[i] - w[0];
        d2G(i, 0) = (4.0 * d * d - 2.0) * std::exp(-d * d);
      }
      return std::vector<Eigen::MatrixXd>{d2G};
    };
  }
  return problem;
}

namespace {

/// Activation matrix of the student/teacher network: column j < hidden_units
/// holds sigmoid(w_j . [x, 1] ) (or sigmoid(w_j . x) without hidden biases),
/// the last column is the constant 1 (output bias). hidden is unit-major.
Eigen::MatrixXd student_activations(const Eigen::MatrixXd& inputs, int hidden_units,
                                    bool hidden_biases, const Eigen::VectorXd& hidden) {
  const Eigen::Index m = inputs.rows();
  const int dim = static_cast<int>(inputs.cols());
  const int per_unit = dim + (hidden_biases ? 1 : 0);
  Eigen::MatrixXd G(m, hidden_units + 1);
  for (int j = 0; j < hidden_units; ++j) {
    const auto wj = hidden.segment(static_cast<Eigen::Index>(j) * per_unit, dim);
    const double bj = hidden_biases ? hidden[static_cast<Eigen::Index>(j) * per_unit + dim] : 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      G(i, j) = sigmoid(inputs.row(i).dot(wj) + bj);
    }
  }
  G.col(hidden_units).setOnes();
  return G;
}

}  // namespace

TeacherStudentProblem make_teacher_student(const TeacherSpec& spec) {
  if (spec.hidden_units < 1 || spec.samples < 1 || spec.input_dim < 1) {
    throw ValidationError("make_teacher_student: degenerate spec");
  }
  TeacherStudentProblem out;
  out.spec = spec;

  Rng rng(spec.seed);
  const int per_unit = spec.input_dim + (spec.hidden_biases ? 1 : 0);
  out.teacher_hidden.resize(static_cast<Eigen::Index>(spec.hidden_units) * per_unit);
  for (Eigen::Index i = 0; i < out.teacher_hidden.size(); ++i) {
    out.teacher_hidden[i] = rng.uniform(-spec.weight_scale, spec.weight_scale);
  }
  out.teacher_linear.resize(spec.hidden_units + 1);
  for (Eigen::Index i = 0; i < out.teacher_linear.size(); ++i) {
    out.teacher_linear[i] = rng.uniform(-spec.weight_scale, spec.weight_scale);
  }
  out.inputs.resize(spec.samples, spec.input_dim);
  for (Eigen::Index i = 0; i < out.inputs.rows(); ++i) {
    for (Eigen::Index d = 0; d < out.inputs.cols(); ++d) {
      out.inputs(i, d) = rng.uniform(-1.0, 1.0);
    }
  }
  out.targets = student_activations(out.inputs, spec.hidden_units, spec.hidden_biases,
                                    out.teacher_hidden) *
                out.teacher_linear;

  auto snlls = std::make_shared<SnllsProblem>();
  snlls->p = spec.hidden_units * per_unit;
  snlls->q = spec.hidden_units + 1;
  snlls->data = out.targets;
  const Eigen::MatrixXd inputs = out.inputs;
  const int hidden_units = spec.hidden_units;
  const bool hidden_biases = spec.hidden_biases;
  snlls->model_matrix = [inputs, hidden_units, hidden_biases](const Eigen::VectorXd& x) {
    return student_activations(inputs, hidden_units, hidden_biases, x);
  };
  snlls->model_matrix_derivs = [inputs, hidden_units, hidden_biases](const Eigen::VectorXd& x) {
    const Eigen::Index m = inputs.rows();
    const int dim = static_cast<int>(inputs.cols());
    const int per_unit = dim + (hidden_biases ? 1 : 0);
    std::vector<Eigen::MatrixXd> derivs(static_cast<std::size_t>(hidden_units) * per_unit,
                                        Eigen::MatrixXd::Zero(m, hidden_units + 1));
    for (int j = 0; j < hidden_units; ++j) {
      const auto wj = x.segment(static_cast<Eigen::Index>(j) * per_unit, dim);
      const double bj = hidden_biases ? x[static_cast<Eigen::Index>(j) * per_unit + dim] : 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double s = sigmoid(inputs.row(i).dot(wj) + bj);
        const double ds = s * (1.0 - s);
        for (int d = 0; d < per_unit; ++d) {
          const double input_d = d < dim ? inputs(i, d) : 1.0;
          derivs[static_cast<std::size_t>(j) * per_unit + d](i, j) = ds * input_d;
        }
      }
    }
    return derivs;
  };
  snlls->model_matrix_second_derivs = [inputs, hidden_units,
                                       hidden_biases](const Eigen::VectorXd& x) {
    const Eigen::Index m = inputs.rows();
    const int dim = static_cast<int>(inputs.cols());
    const int per_unit = dim + (hidden_biases ? 1 : 0);
    const int p = hidden_units * per_unit;
    std::vector<Eigen::MatrixXd> second(static_cast<std::size_t>(p) * p,
                                        Eigen::MatrixXd::Zero(m, hidden_units + 1));
    for (int j = 0; j < hidden_units; ++j) {
      const auto wj = x.segment(static_cast<Eigen::Index>(j) * per_unit, dim);
      const double bj = hidden_biases ? x[static_cast<Eigen::Index>(j) * per_unit + dim] : 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double s = sigmoid(inputs.row(i).dot(wj) + bj);
        const double d2s = s * (1.0 - s) * (1.0 - 2.0 * s);
        for (int d1 = 0; d1 < per_unit; ++d1) {
          const double in1 = d1 < dim ? inputs(i, d1) : 1.0;
          for (int d2 = 0; d2 < per_unit; ++d2) {
            const double in2 = d2 < dim ? inputs(i, d2) : 1.0;
            const int k = j * per_unit + d1;
            const int l = j * per_unit + d2;
            second[static_cast<std::size_t>(k) * p + l](i, j) = d2s * in1 * in2;
          }
        }
      }
    }
    return second;
  };
  out.snlls = snlls;
  return out;
}

Eigen::VectorXd student_joint_residual(const TeacherStudentProblem& problem,
                                       const Eigen::VectorXd& theta) {
  const int ph = problem.hidden_param_count();
  const Eigen::MatrixXd G = student_activations(problem.inputs, problem.spec.hidden_units,
                                                problem.spec.hidden_biases, theta.head(ph));
  return G * theta.tail(problem.linear_param_count()) - problem.targets;
}

Eigen::MatrixXd student_joint_jacobian(const TeacherStudentProblem& problem,
                                       const Eigen::VectorXd& theta) {
  const int ph = problem.hidden_param_count();
  const int pl = problem.linear_param_count();
  const int dim = problem.spec.input_dim;
  const int per_unit = dim + (problem.spec.hidden_biases ? 1 : 0);
  const Eigen::VectorXd hidden = theta.head(ph);
  const Eigen::VectorXd linear = theta.tail(pl);
  const Eigen::Index m = problem.inputs.rows();

  Eigen::MatrixXd J(m, ph + pl);
  for (int j = 0; j < problem.spec.hidden_units; ++j) {
    const auto wj = hidden.segment(static_cast<Eigen::Index>(j) * per_unit, dim);
    const double bj =
        problem.spec.hidden_biases ? hidden[static_cast<Eigen::Index>(j) * per_unit + dim] : 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = sigmoid(problem.inputs.row(i).dot(wj) + bj);
      const double ds = linear[j] * s * (1.0 - s);
      for (int d = 0; d < per_unit; ++d) {
        J(i, static_cast<Eigen::Index>(j) * per_unit + d) =
            ds * (d < dim ? problem.inputs(i, d) : 1.0);
      }
      J(i, ph + j) = s;
    }
  }
  J.col(ph + pl - 1).setOnes();
  return J;
}

std::shared_ptr<const SnllsProblem> make_exp_fit(std::uint64_t seed) {
  const int m = 12;
  Eigen::VectorXd times(m);
  for (int i = 0; i < m; ++i) times[i] = 2.0 * i / (m - 1);
  Rng rng(seed);
  auto problem = std::make_shared<SnllsProblem>();
  problem->p = 2;
  problem->q = 3;
  problem->data.resize(m);
  for (int i = 0; i < m; ++i) problem->data[i] = rng.uniform(-1.0, 1.0);
  problem->model_matrix = [times](const Eigen::VectorXd& x) {
    Eigen::MatrixXd G(times.size(), 3);
    G.col(0) = (-x[0] * times).array().exp();
    G.col(1) = (-x[1] * times).array().exp();
    G.col(2).setOnes();
    return G;
  };
  problem->model_matrix_derivs = [times](const Eigen::VectorXd& x) {
    std::vector<Eigen::MatrixXd> derivs(2, Eigen::MatrixXd::Zero(times.size(), 3));
    derivs[0].col(0) = -times.array() * (-x[0] * times).array().exp();
    derivs[1].col(1) = -times.array() * (-x[1] * times).array().exp();
    return derivs;
  };
  return problem;
}

void export_teacher_student_csv(const TeacherStudentProblem& problem,
                                const std::filesystem::path& dir) {
  std::vector<std::vector<std::string>> rows;
  std::string header = "x0";
  for (int d = 1; d < problem.spec.input_dim; ++d) header += ",x" + std::to_string(d);
  for (Eigen::Index i = 0; i < problem.inputs.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index d = 0; d < problem.inputs.cols(); ++d) {
      row.push_back(format_g17(problem.inputs(i, d)));
    }
    rows.push_back(std::move(row));
  }
  write_csv(dir / "inputs.csv", header, rows);

  rows.clear();
  for (Eigen::Index i = 0; i < problem.targets.size(); ++i) {
    rows.push_back({format_g17(problem.targets[i])});
  }
  write_csv(dir / "targets.csv", "y", rows);

  rows.clear();
  for (Eigen::Index i = 0; i < problem.teacher_hidden.size(); ++i) {
    rows.push_back({"hidden", std::to_string(i), format_g17(problem.teacher_hidden[i])});
  }
  for (Eigen::Index i = 0; i < problem.teacher_linear.size(); ++i) {
    rows.push_back({"linear", std::to_string(i), format_g17(problem.teacher_linear[i])});
  }
  write_csv(dir / "teacher_weights.csv", "block,index,value", rows);
}

}  // namespace varpro
