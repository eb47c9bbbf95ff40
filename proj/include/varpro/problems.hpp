#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>

#include "varpro/separable.hpp"
#include "varpro/snlls.hpp"

namespace varpro {

/// f(x, y) = (1-x)^2 + 100 (y - x^2)^2; inner solve y = x^2, reduced (1-x)^2.
std::shared_ptr<SeparableProblem> make_rosenbrock();

/// f(x, y) = x^3/3 + y^2 + 2xy - 6x - 3y + 4; saddle at (-1, 2.5), local
/// minimum at (3, -1.5). Reduced: x^3/3 - x^2 - 3x + 7/4.
std::shared_ptr<SeparableProblem> make_cubic();

/// f(x, y) = xy + y^4/4 - y^3. The inner problem has two stationary branches;
/// the solver returns the global minimizer, so the full problem's only
/// critical point (0, 0) is filtered out of the reduced landscape.
std::shared_ptr<SeparableProblem> make_appendix_b();

/// Rank-1 factorization 0.5 ||x y^T - M||_F^2 for M = u v^T with unit-norm
/// factors (validated). Inner solve M^T x / ||x||^2 is undefined at x = 0.
std::shared_ptr<SeparableProblem> make_matfac_rank1(const Eigen::MatrixXd& M);

/// 0.5 (||M||_F^2 - ||basis^T M||_F^2): the rank-r reduced objective as a
/// function of the subspace spanned by an orthonormal basis (d1 x r).
/// Throws ValidationError when basis^T basis deviates from I by more than 1e-10.
double grassmann_reduced_value(const Eigen::MatrixXd& M, const Eigen::MatrixXd& basis);

struct TwoParamDataset {
  Eigen::VectorXd inputs;
  Eigen::VectorXd targets;
};

enum class TwoParamModel { Mlp, Rbf };

const TwoParamDataset& two_param_dataset(TwoParamModel model);

/// One-nonlinear/one-linear-parameter network as an SNLLS problem:
/// Mlp fits w_L * sigmoid(w_N x), Rbf fits w_L * exp(-(x - w_N)^2).
std::shared_ptr<const SnllsProblem> make_two_param(TwoParamModel model);

struct TeacherSpec {
  int hidden_units = 5;
  int samples = 300;
  int input_dim = 3;
  double weight_scale = 1.5;
  bool hidden_biases = false;
  std::uint64_t seed = 2;
};

/// Sigmoid single-hidden-layer network fit to noise-free outputs of a random
/// teacher of the same architecture. The student's 6 linear parameters
/// (output weights + bias) are eliminated; the 15 hidden weights stay
/// nonlinear. Bias-free hidden units keep the joint landscape saddle-rich,
/// which is what the elimination study measures.
struct TeacherStudentProblem {
  TeacherSpec spec;
  std::shared_ptr<const SnllsProblem> snlls;
  Eigen::MatrixXd inputs;          // samples x input_dim
  Eigen::VectorXd targets;
  Eigen::VectorXd teacher_hidden;  // hidden_units * (input_dim + 1)
  Eigen::VectorXd teacher_linear;  // hidden_units + 1

  int hidden_param_count() const {
    return spec.hidden_units * (spec.input_dim + (spec.hidden_biases ? 1 : 0));
  }
  int linear_param_count() const { return spec.hidden_units + 1; }
};

TeacherStudentProblem make_teacher_student(const TeacherSpec& spec);

/// Residual of the student network over all parameters theta =
/// [hidden, linear], for the unseparated (joint) optimizer.
Eigen::VectorXd student_joint_residual(const TeacherStudentProblem& problem,
                                       const Eigen::VectorXd& theta);
Eigen::MatrixXd student_joint_jacobian(const TeacherStudentProblem& problem,
                                       const Eigen::VectorXd& theta);

/// Writes inputs.csv, targets.csv and teacher_weights.csv into dir.
void export_teacher_student_csv(const TeacherStudentProblem& problem,
                                const std::filesystem::path& dir);

/// Seeded two-rate exponential fit G(x) = [exp(-x1 t), exp(-x2 t), 1] over 12
/// sample times with random data: the instance family behind the update
/// formula comparisons. Well-posed for rates away from equality; sample x
/// from [0.2, 2].
std::shared_ptr<const SnllsProblem> make_exp_fit(std::uint64_t seed);

}  // namespace varpro
