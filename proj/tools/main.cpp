#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/experiments.hpp"

namespace {

namespace fs = std::filesystem;
using namespace varpro;

/// "x1,x2;y1,y2" -> one vector per ';' group.
std::vector<Eigen::VectorXd> parse_candidates(const std::string& text) {
  std::vector<Eigen::VectorXd> candidates;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(';', start);
    const std::string group = text.substr(start, end == std::string::npos ? end : end - start);
    if (!group.empty()) {
      std::vector<double> coords;
      std::size_t cstart = 0;
      while (cstart <= group.size()) {
        const std::size_t cend = group.find(',', cstart);
        const std::string token =
            group.substr(cstart, cend == std::string::npos ? cend : cend - cstart);
        try {
          coords.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw ValidationError("cannot parse candidate coordinate '" + token + "'");
        }
        if (cend == std::string::npos) break;
        cstart = cend + 1;
      }
      Eigen::VectorXd v(coords.size());
      for (std::size_t i = 0; i < coords.size(); ++i) v[static_cast<Eigen::Index>(i)] = coords[i];
      candidates.push_back(std::move(v));
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return candidates;
}

void report_outputs(const ExperimentManifest& manifest, const fs::path& out_dir) {
  std::printf("%s: wrote %zu files to %s\n", manifest.experiment.c_str(),
              manifest.outputs.size() + 1, out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separable-optimization toolkit: variable elimination experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  std::uint64_t seed = 2;
  int trials = -1;
  int max_iters = -1;
  bool paper_scale = false;
  app.add_option("--out-dir", out_dir, "Output directory (default ./out/<experiment>)");
  app.add_option("--seed", seed, "Base RNG seed")->capture_default_str();
  app.add_option("--trials", trials, "Trial count for multi-trial experiments");
  app.add_option("--max-iters", max_iters, "Iteration cap for optimizer-driven experiments");
  app.add_flag("--paper-scale", paper_scale,
               "Run the full-size teacher-student/resnet configurations");

  auto* rosenbrock = app.add_subcommand("rosenbrock", "Gradient-descent traces, full vs reduced");
  RosenbrockOptions rosenbrock_options;
  rosenbrock->add_option("--step-full", rosenbrock_options.step_full)->capture_default_str();
  rosenbrock->add_option("--step-reduced", rosenbrock_options.step_reduced)
      ->capture_default_str();

  auto* cubic = app.add_subcommand("cubic", "Cubic example surface, reduced curve and reports");
  CubicOptions cubic_options;
  cubic->add_option("--resolution", cubic_options.resolution)->capture_default_str();

  auto* matfac = app.add_subcommand("matfac", "Rank-1 factorization reduced landscape grid");
  MatfacOptions matfac_options;
  matfac->add_option("--resolution", matfac_options.resolution)->capture_default_str();
  matfac->add_option("--lo", matfac_options.lo)->capture_default_str();
  matfac->add_option("--hi", matfac_options.hi)->capture_default_str();

  auto* grassmann = app.add_subcommand("grassmann", "Rank-r subspace objective sampling");
  GrassmannOptions grassmann_options;
  grassmann->add_option("--d1", grassmann_options.d1)->capture_default_str();
  grassmann->add_option("--d2", grassmann_options.d2)->capture_default_str();
  grassmann->add_option("--rank", grassmann_options.rank)->capture_default_str();
  grassmann->add_option("--samples", grassmann_options.samples)->capture_default_str();

  auto* landscape = app.add_subcommand("landscape", "Two-parameter model cost surfaces");
  std::string landscape_model = "mlp";
  LandscapeOptions landscape_options;
  bool wn_set = false;
  bool wl_set = false;
  landscape->add_option("--model", landscape_model, "mlp or rbf")->capture_default_str();
  landscape->add_option("--wn-min", landscape_options.wn_lo)->each([&](const std::string&) {
    wn_set = true;
  });
  landscape->add_option("--wn-max", landscape_options.wn_hi)->each([&](const std::string&) {
    wn_set = true;
  });
  landscape->add_option("--wl-min", landscape_options.wl_lo)->each([&](const std::string&) {
    wl_set = true;
  });
  landscape->add_option("--wl-max", landscape_options.wl_hi)->each([&](const std::string&) {
    wl_set = true;
  });
  landscape->add_option("--wn-res", landscape_options.wn_res)->capture_default_str();
  landscape->add_option("--wl-res", landscape_options.wl_res)->capture_default_str();

  auto* teacher = app.add_subcommand("teacher-student", "Joint vs VarPro LM study");
  TeacherStudentOptions teacher_options;

  auto* resnet = app.add_subcommand("resnet", "GD vs LSGD training dynamics");
  ResnetOptions resnet_options;
  resnet->add_option("--blocks", resnet_options.spec.blocks)->capture_default_str();
  resnet->add_option("--width", resnet_options.spec.width)->capture_default_str();
  resnet->add_option("--grid", resnet_options.spec.grid_n)->capture_default_str();
  resnet->add_option("--epochs", resnet_options.spec.epochs)->capture_default_str();
  resnet->add_option("--lr-gd", resnet_options.lr_gd, "0 re-tunes on the rate grid")
      ->capture_default_str();
  resnet->add_option("--lr-lsgd", resnet_options.lr_lsgd, "0 re-tunes on the rate grid")
      ->capture_default_str();

  auto* classify = app.add_subcommand("classify", "Stationary-point reports for a problem");
  ClassifyOptions classify_options;
  std::string candidates_text;
  classify->add_option("--problem", classify_options.problem,
                       "rosenbrock|cubic|appendix-b|matfac|two-param-mlp|two-param-rbf")
      ->capture_default_str();
  classify->add_option("--candidates", candidates_text,
                       "Semicolon-separated points, comma-separated coordinates (e.g. \"-1;3\")")
      ->required();
  classify->add_option("--stationarity-tol", classify_options.stationarity_tol)
      ->capture_default_str();

  auto* appendix_a = app.add_subcommand("appendix-a", "Exact vs approximate linear-update study");
  AppendixAOptions appendix_a_options;
  appendix_a->add_option("--instances", appendix_a_options.instances)->capture_default_str();

  auto* appendix_b = app.add_subcommand("appendix-b", "Filtered-critical-point demonstration");
  (void)appendix_b;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string experiment = app.get_subcommands().front()->get_name();
    const fs::path dir = out_dir.empty() ? fs::path("out") / experiment : fs::path(out_dir);

    if (rosenbrock->parsed()) {
      if (max_iters > 0) rosenbrock_options.max_iters = max_iters;
      report_outputs(run_rosenbrock(rosenbrock_options, dir), dir);
    } else if (cubic->parsed()) {
      report_outputs(run_cubic(cubic_options, dir), dir);
    } else if (matfac->parsed()) {
      report_outputs(run_matfac(matfac_options, dir), dir);
    } else if (grassmann->parsed()) {
      grassmann_options.seed = seed;
      report_outputs(run_grassmann(grassmann_options, dir), dir);
    } else if (landscape->parsed()) {
      if (landscape_model != "mlp" && landscape_model != "rbf") {
        throw ValidationError("landscape: --model must be mlp or rbf");
      }
      const TwoParamModel model =
          landscape_model == "mlp" ? TwoParamModel::Mlp : TwoParamModel::Rbf;
      const LandscapeOptions defaults = LandscapeOptions::defaults(model);
      LandscapeOptions options = landscape_options;
      options.model = model;
      if (!wn_set) {
        options.wn_lo = defaults.wn_lo;
        options.wn_hi = defaults.wn_hi;
      }
      if (!wl_set) {
        options.wl_lo = defaults.wl_lo;
        options.wl_hi = defaults.wl_hi;
      }
      report_outputs(run_landscape(options, dir), dir);
    } else if (teacher->parsed()) {
      teacher_options.seed = seed;
      teacher_options.paper_scale = paper_scale;
      if (trials > 0) teacher_options.trials = trials;
      if (max_iters > 0) teacher_options.max_iters = max_iters;
      report_outputs(run_teacher_student(teacher_options, dir), dir);
    } else if (resnet->parsed()) {
      if (paper_scale) {
        const int grid = resnet_options.spec.grid_n;
        resnet_options.spec = ResNetSpec::paper_scale();
        resnet_options.spec.grid_n = grid;
      }
      resnet_options.spec.seed = seed;
      if (trials > 0) resnet_options.spec.trials = trials;
      report_outputs(run_resnet(resnet_options, dir), dir);
    } else if (classify->parsed()) {
      classify_options.candidates = parse_candidates(candidates_text);
      report_outputs(run_classify(classify_options, dir), dir);
    } else if (appendix_a->parsed()) {
      appendix_a_options.seed = seed;
      report_outputs(run_appendix_a(appendix_a_options, dir), dir);
    } else {
      report_outputs(run_appendix_b(dir), dir);
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
