#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "varpro/experiments.hpp"
#include "varpro/optimizers.hpp"
#include "varpro/problems.hpp"
#include "varpro/reduction.hpp"
#include "varpro/resnet.hpp"
#include "varpro/snlls.hpp"
#include "varpro/spectral.hpp"

namespace py = pybind11;
using namespace varpro;

namespace {

SeparablePoint make_point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return {x, y}; }

py::dict inertia_dict(const Inertia& in) {
  py::dict d;
  d["n_plus"] = in.n_plus;
  d["n_minus"] = in.n_minus;
  d["n_zero"] = in.n_zero;
  return d;
}

py::dict report_dict(const StationaryPointReport& report) {
  py::dict d;
  d["x"] = report.x;
  d["y_star"] = report.y_star;
  d["grad_norm_full"] = report.grad_norm_full;
  d["grad_norm_reduced"] = report.grad_norm_reduced;
  d["inertia_full"] = inertia_dict(report.inertia_full);
  d["inertia_reduced"] = inertia_dict(report.inertia_reduced);
  d["class_full"] = to_string(report.class_full);
  d["class_reduced"] = to_string(report.class_reduced);
  d["haynsworth_ok"] = report.haynsworth_ok;
  return d;
}

py::dict trace_dict(const Trace& trace) {
  const Eigen::Index n = static_cast<Eigen::Index>(trace.iterates.size());
  const Eigen::Index dim = n > 0 ? trace.iterates.front().params.size() : 0;
  Eigen::MatrixXd params(n, dim);
  Eigen::VectorXd objectives(n), grad_norms(n), steps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TraceRecord& rec = trace.iterates[static_cast<std::size_t>(i)];
    params.row(i) = rec.params;
    objectives[i] = rec.objective;
    grad_norms[i] = rec.grad_norm;
    steps[i] = rec.step;
  }
  py::dict d;
  d["params"] = params;
  d["objective"] = objectives;
  d["grad_norm"] = grad_norms;
  d["step"] = steps;
  d["stalled"] = trace.stalled;
  return d;
}

JacobianMode parse_mode(const std::string& mode) {
  if (mode == "full") return JacobianMode::Full;
  if (mode == "kaufman") return JacobianMode::Kaufman;
  if (mode == "finite_diff") return JacobianMode::FiniteDiff;
  throw ValidationError("jacobian mode must be full, kaufman or finite_diff");
}

OptimizerConfig config_from_kwargs(double step_size, int max_iters, double grad_tol,
                                   double lm_lambda0) {
  OptimizerConfig cfg;
  cfg.step_size = step_size;
  cfg.max_iters = max_iters;
  cfg.grad_tol = grad_tol;
  cfg.lm_lambda0 = lm_lambda0;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_varpro, m) {
  m.doc() = "Separable optimization via variable elimination: reduced objectives, "
            "Schur-complement Hessians, inertia analysis and SNLLS solvers";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<RankError>(m, "RankError", PyExc_ArithmeticError);
  py::register_exception<NotStationaryError>(m, "NotStationaryError", PyExc_ValueError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_NotImplementedError);
  py::register_exception<HypothesisError>(m, "HypothesisError", PyExc_ValueError);

  py::class_<SeparableProblem, std::shared_ptr<SeparableProblem>>(m, "SeparableProblem")
      .def_property_readonly("p", &SeparableProblem::p)
      .def_property_readonly("q", &SeparableProblem::q)
      .def("value",
           [](const SeparableProblem& self, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
             return evaluate(self, make_point(x, y));
           })
      .def("gradient",
           [](const SeparableProblem& self, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
             return gradient(self, make_point(x, y));
           })
      .def("hessian_blocks",
           [](const SeparableProblem& self, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
             const HessianBlocks blocks = hessian_blocks(self, make_point(x, y));
             return py::make_tuple(blocks.A, blocks.B, blocks.D);
           })
      .def("inner_solve", [](const SeparableProblem& self, const Eigen::VectorXd& x) {
        return inner_solve(self, x);
      });

  py::class_<SnllsProblem, std::shared_ptr<SnllsProblem>>(m, "SnllsProblem")
      .def_readonly("p", &SnllsProblem::p)
      .def_readonly("q", &SnllsProblem::q)
      .def_readonly("data", &SnllsProblem::data)
      .def("model_matrix",
           [](const SnllsProblem& self, const Eigen::VectorXd& x) { return self.model_at(x); });

  m.def("make_rosenbrock", &make_rosenbrock);
  m.def("make_cubic", &make_cubic);
  m.def("make_appendix_b", &make_appendix_b);
  m.def("make_matfac_rank1", &make_matfac_rank1, py::arg("M"));
  m.def(
      "make_two_param",
      [](const std::string& model) {
        if (model != "mlp" && model != "rbf") throw ValidationError("model must be mlp or rbf");
        return std::const_pointer_cast<SnllsProblem>(
            make_two_param(model == "mlp" ? TwoParamModel::Mlp : TwoParamModel::Rbf));
      },
      py::arg("model"));
  m.def("as_separable",
        [](const std::shared_ptr<SnllsProblem>& problem) { return as_separable(problem); });

  py::class_<TeacherStudentProblem>(m, "TeacherStudentProblem")
      .def_property_readonly("snlls",
                             [](const TeacherStudentProblem& self) {
                               return std::const_pointer_cast<SnllsProblem>(self.snlls);
                             })
      .def_readonly("inputs", &TeacherStudentProblem::inputs)
      .def_readonly("targets", &TeacherStudentProblem::targets)
      .def_readonly("teacher_hidden", &TeacherStudentProblem::teacher_hidden)
      .def_readonly("teacher_linear", &TeacherStudentProblem::teacher_linear);
  m.def(
      "make_teacher_student",
      [](std::uint64_t seed) {
        TeacherSpec spec;
        spec.seed = seed;
        return make_teacher_student(spec);
      },
      py::arg("seed") = 2);

  m.def("reduced_value", [](const std::shared_ptr<SeparableProblem>& problem,
                            const Eigen::VectorXd& x) { return reduced_value(*problem, x); });
  m.def("reduced_gradient", [](const std::shared_ptr<SeparableProblem>& problem,
                               const Eigen::VectorXd& x) { return reduced_gradient(*problem, x); });
  m.def("inner_sensitivity",
        [](const std::shared_ptr<SeparableProblem>& problem, const Eigen::VectorXd& x) {
          return inner_sensitivity(*problem, x);
        });
  m.def("reduced_hessian", [](const std::shared_ptr<SeparableProblem>& problem,
                              const Eigen::VectorXd& x) { return reduced_hessian(*problem, x); });

  m.def(
      "inertia",
      [](const Eigen::MatrixXd& M, double tol) {
        const Inertia in = tol > 0.0 ? inertia(M, tol) : inertia(M);
        return inertia_dict(in);
      },
      py::arg("M"), py::arg("tol") = 0.0);
  m.def(
      "classify_stationary_point",
      [](const std::shared_ptr<SeparableProblem>& problem, const Eigen::VectorXd& x, double tol) {
        return report_dict(classify_stationary_point(*problem, x, tol));
      },
      py::arg("problem"), py::arg("x"), py::arg("stationarity_tol") = 1e-6);

  m.def("pinv_solve", &pinv_solve, py::arg("G"), py::arg("z"), py::arg("rank_tol") = 1e-10);
  m.def("reduced_residual",
        [](const std::shared_ptr<SnllsProblem>& problem, const Eigen::VectorXd& x) {
          return reduced_residual(*problem, x);
        });
  m.def(
      "varpro_jacobian",
      [](const std::shared_ptr<SnllsProblem>& problem, const Eigen::VectorXd& x,
         const std::string& mode) { return varpro_jacobian(*problem, x, parse_mode(mode)); },
      py::arg("problem"), py::arg("x"), py::arg("mode") = "full");
  m.def("delta_y_approx",
        [](const std::shared_ptr<SnllsProblem>& problem, const Eigen::VectorXd& x_k,
           const Eigen::VectorXd& y_k, const Eigen::VectorXd& dx) {
          return delta_y_approx(*problem, x_k, y_k, dx);
        });
  m.def("delta_y_exact",
        [](const std::shared_ptr<SnllsProblem>& problem, const Eigen::VectorXd& x_next,
           const Eigen::VectorXd& y_k) { return delta_y_exact(*problem, x_next, y_k); });

  m.def("grassmann_reduced_value", &grassmann_reduced_value, py::arg("M"), py::arg("basis"));

  m.def(
      "gradient_descent",
      [](const ValueFn& value_fn, const GradFn& grad_fn, const Eigen::VectorXd& x0,
         double step_size, int max_iters, double grad_tol) {
        return trace_dict(
            gradient_descent(value_fn, grad_fn, x0,
                             config_from_kwargs(step_size, max_iters, grad_tol, 1e-3)));
      },
      py::arg("value_fn"), py::arg("grad_fn"), py::arg("x0"), py::arg("step_size") = 1e-2,
      py::arg("max_iters") = 200, py::arg("grad_tol") = 1e-10);
  m.def(
      "levenberg_marquardt",
      [](const ResidualFn& residual_fn, const JacobianFn& jacobian_fn, const Eigen::VectorXd& x0,
         int max_iters, double grad_tol, double lambda0) {
        return trace_dict(levenberg_marquardt(residual_fn, jacobian_fn, x0,
                                              config_from_kwargs(1e-2, max_iters, grad_tol,
                                                                 lambda0)));
      },
      py::arg("residual_fn"), py::arg("jacobian_fn"), py::arg("x0"), py::arg("max_iters") = 200,
      py::arg("grad_tol") = 1e-10, py::arg("lambda0") = 1e-3);
  m.def(
      "adam",
      [](const GradFn& grad_fn, const Eigen::VectorXd& x0, double step_size, int max_iters,
         double grad_tol, const ValueFn& value_fn) {
        return trace_dict(adam(grad_fn, x0, config_from_kwargs(step_size, max_iters, grad_tol, 1e-3),
                               value_fn));
      },
      py::arg("grad_fn"), py::arg("x0"), py::arg("step_size") = 1e-2, py::arg("max_iters") = 200,
      py::arg("grad_tol") = 1e-10, py::arg("value_fn") = nullptr);

  py::class_<ResnetProblem, std::shared_ptr<ResnetProblem>>(m, "ResnetProblem")
      .def_property_readonly("num_params", &ResnetProblem::num_params)
      .def_property_readonly("sample_count", &ResnetProblem::sample_count)
      .def("loss", &ResnetProblem::loss)
      .def("loss_grad", &ResnetProblem::loss_grad)
      .def("init_params", &ResnetProblem::init_params, py::arg("trial_seed"))
      .def("as_separable", [](const std::shared_ptr<ResnetProblem>& self) {
        return as_separable(std::shared_ptr<const ResnetProblem>(self));
      });
  m.def(
      "make_resnet",
      [](int blocks, int width, int grid_n, std::uint64_t seed) {
        ResNetSpec spec;
        spec.blocks = blocks;
        spec.width = width;
        spec.grid_n = grid_n;
        spec.seed = seed;
        return make_resnet(spec);
      },
      py::arg("blocks") = 4, py::arg("width") = 16, py::arg("grid_n") = 32, py::arg("seed") = 1);

  m.attr("__version__") = kToolkitVersion;
}
