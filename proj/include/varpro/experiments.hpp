#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "varpro/problems.hpp"
#include "varpro/resnet.hpp"

namespace varpro {

/// Record of one experiment run: name, the exact configuration (seeds
/// included), toolkit version and the files written. Re-running a manifest
/// reproduces the outputs byte for byte.
struct ExperimentManifest {
  std::string experiment;
  nlohmann::json config;
  std::string toolkit_version = kToolkitVersion;
  std::vector<std::string> outputs;

  std::string to_json() const;
  static ExperimentManifest from_json(const std::string& text);
};

struct RosenbrockOptions {
  double step_full = 1e-3;
  double step_reduced = 0.4;
  int max_iters = 200000;
  double grad_tol_full = 1e-5;
  double grad_tol_reduced = 1e-6;
};

struct CubicOptions {
  double x_lo = -4.0;
  double x_hi = 5.0;
  double y_lo = -4.0;
  double y_hi = 6.0;
  int resolution = 201;
};

struct ClassifyOptions {
  std::string problem = "cubic";
  std::vector<Eigen::VectorXd> candidates;
  double stationarity_tol = 1e-6;
};

struct MatfacOptions {
  double lo = -2.0;
  double hi = 2.0;
  int resolution = 21;
};

struct GrassmannOptions {
  std::uint64_t seed = 7;
  int d1 = 6;
  int d2 = 5;
  int rank = 2;
  int samples = 1000;
};

struct LandscapeOptions {
  TwoParamModel model = TwoParamModel::Mlp;
  double wn_lo = 0.0;
  double wn_hi = 0.0;
  double wl_lo = 0.0;
  double wl_hi = 0.0;
  int wn_res = 201;
  int wl_res = 201;

  /// Plot windows containing every visible stationary point of Fig-4 style
  /// landscapes.
  static LandscapeOptions defaults(TwoParamModel model);
};

struct TeacherStudentOptions {
  int trials = 20;
  std::uint64_t seed = 2;
  int max_iters = 200;
  bool paper_scale = false;  // 100 trials
};

struct ResnetOptions {
  ResNetSpec spec;
  /// Defaults come from an offline pass over the {1e-1 .. 1e-4} grid
  /// (lowest stable final loss per method); 0 re-runs the tuner.
  double lr_gd = 1e-2;
  double lr_lsgd = 1e-3;
};

struct AppendixAOptions {
  int instances = 100;
  std::uint64_t seed = 5;
};

ExperimentManifest run_rosenbrock(const RosenbrockOptions& options,
                                  const std::filesystem::path& out_dir);
ExperimentManifest run_cubic(const CubicOptions& options, const std::filesystem::path& out_dir);
ExperimentManifest run_classify(const ClassifyOptions& options,
                                const std::filesystem::path& out_dir);
ExperimentManifest run_matfac(const MatfacOptions& options, const std::filesystem::path& out_dir);
ExperimentManifest run_grassmann(const GrassmannOptions& options,
                                 const std::filesystem::path& out_dir);
ExperimentManifest run_landscape(const LandscapeOptions& options,
                                 const std::filesystem::path& out_dir);
ExperimentManifest run_teacher_student(const TeacherStudentOptions& options,
                                       const std::filesystem::path& out_dir);
ExperimentManifest run_resnet(const ResnetOptions& options, const std::filesystem::path& out_dir);
ExperimentManifest run_appendix_a(const AppendixAOptions& options,
                                  const std::filesystem::path& out_dir);
ExperimentManifest run_appendix_b(const std::filesystem::path& out_dir);

/// Named problem lookup used by the classify experiment: rosenbrock, cubic,
/// appendix-b, matfac, two-param-mlp, two-param-rbf.
std::shared_ptr<SeparableProblem> classify_problem_by_name(const std::string& name);

/// Re-executes the experiment recorded in manifest_file, writing into
/// out_dir.
ExperimentManifest rerun_from_manifest(const std::filesystem::path& manifest_file,
                                       const std::filesystem::path& out_dir);

}  // namespace varpro
