#include "cyltri/cli.hpp"

#include "cyltri/geometry.hpp"
#include "cyltri/pipeline.hpp"
#include "cyltri/robust.hpp"
#include "cyltri/scene_io.hpp"
#include "cyltri/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cyltri {
namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return 1;  // bad flags / configuration: usage error
    case ErrorCode::SchemaError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidInput:
      return 3;  // the input data is at fault
    default:
      return 2;  // the estimation itself failed
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_result(const ResultFile& result, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << result_to_json(result);
  } else {
    save_result(result, output_path);
  }
}

ResultEntry result_entry(const CylinderResult& r, std::optional<double> focal) {
  ResultEntry e;
  e.direction = r.cylinder.direction;
  e.axis_point = r.cylinder.axis_point;
  e.radius = r.cylinder.radius;
  e.inlier_lines = r.inlier_lines;
  e.max_defect = r.max_defect;
  e.mean_defect = r.mean_defect;
  if (focal) {
    e.max_defect_px = r.max_defect * *focal;
    e.mean_defect_px = r.mean_defect * *focal;
  }
  e.method = r.method;
  e.conic_class = r.conic_class;
  return e;
}

struct TriangulateArgs {
  std::string scene_path;
  std::string direction = "lsq";
  std::string cross_section = "constrained-lsq";
  double threshold = 0.01;
  int iterations = 1000;
  bool exhaustive = false;
  int min_inliers = 4;
  double direction_tol = 0.02;
  std::uint64_t seed = 0;
  bool group = false;
  std::string output;
};

PipelineConfig pipeline_config(const TriangulateArgs& a) {
  PipelineConfig cfg;
  if (a.direction == "lsq") {
    cfg.direction.method = DirectionMethod::LeastSquares;
  } else if (a.direction == "ransac") {
    cfg.direction.method = DirectionMethod::Ransac;
  } else {
    fail(ErrorCode::InvalidConfig, "--direction must be lsq or ransac");
  }
  cfg.cross_section = cross_section_method_from_name(a.cross_section);
  cfg.inlier_threshold = a.threshold;
  cfg.iterations = a.iterations;
  cfg.exhaustive = a.exhaustive;
  cfg.min_inliers = a.min_inliers;
  cfg.direction_tol = a.direction_tol;
  cfg.seed = a.seed;
  cfg.direction.seed = a.seed;
  return cfg;
}

int run_triangulate(const TriangulateArgs& a) {
  const SceneFile scene = load_scene(a.scene_path);
  const PipelineConfig cfg = pipeline_config(a);
  const std::optional<double> focal = scene.focal_length();

  ResultFile result;
  result.config = {{"command", "triangulate"},
                   {"direction", a.direction},
                   {"cross_section", a.cross_section},
                   {"threshold", fmt(a.threshold)},
                   {"iterations", std::to_string(a.iterations)},
                   {"exhaustive", a.exhaustive ? "true" : "false"},
                   {"min_inliers", std::to_string(a.min_inliers)},
                   {"direction_tol", fmt(a.direction_tol)},
                   {"seed", std::to_string(a.seed)},
                   {"group", a.group ? "true" : "false"}};

  if (a.group) {
    for (const auto& [group_id, r] : triangulate_groups(scene.lines, scene.cameras, cfg)) {
      ResultEntry e = result_entry(r, focal);
      result.config["group_" + std::to_string(group_id)] =
          std::to_string(result.cylinders.size());
      result.cylinders.push_back(e);
    }
  } else {
    result.cylinders.push_back(
        result_entry(triangulate_cylinder(scene.lines, scene.cameras, cfg), focal));
  }
  emit_result(result, a.output);
  return 0;
}

struct MatchArgs {
  std::string scene_path;
  std::string ref_image;
  std::string direction = "lsq";
  double threshold = 0.01;
  int min_inliers = 4;
  double direction_tol = 0.02;
  std::uint64_t seed = 0;
  std::string output;
};

int run_match(const MatchArgs& a) {
  const SceneFile scene = load_scene(a.scene_path);
  int ref_index = -1;
  for (size_t i = 0; i < scene.cameras.size(); ++i) {
    if (scene.cameras[i].id == a.ref_image) ref_index = static_cast<int>(i);
  }
  if (ref_index < 0) {
    fail(ErrorCode::InvalidInput,
         "unknown reference image '" + a.ref_image + "'");
  }

  MultiCylinderConfig cfg;
  cfg.inlier_threshold = a.threshold;
  cfg.min_inliers = a.min_inliers;
  cfg.direction_tol = a.direction_tol;
  if (a.direction == "lsq") {
    cfg.direction.method = DirectionMethod::LeastSquares;
  } else if (a.direction == "ransac") {
    cfg.direction.method = DirectionMethod::Ransac;
  } else {
    fail(ErrorCode::InvalidConfig, "--direction must be lsq or ransac");
  }
  cfg.direction.seed = a.seed;

  const MultiCylinderResult res =
      exhaustive_multi_cylinder(scene.lines, scene.cameras, ref_index, cfg);
  const std::optional<double> focal = scene.focal_length();

  ResultFile result;
  result.config = {{"command", "match"},
                   {"ref_image", a.ref_image},
                   {"direction", a.direction},
                   {"threshold", fmt(a.threshold)},
                   {"min_inliers", std::to_string(a.min_inliers)},
                   {"direction_tol", fmt(a.direction_tol)},
                   {"seed", std::to_string(a.seed)},
                   {"hypotheses", std::to_string(res.hypotheses)},
                   {"skipped_pairs", std::to_string(res.skipped_pairs.size())}};

  for (const MatchResult& m : res.matches) {
    CylinderResult r;
    r.cylinder = m.cylinder;
    for (const auto& [cam, line] : m.matched_lines) r.inlier_lines.push_back(line);
    // residual statistics against the matched cross-section
    const Eigen::Matrix3d r_align = rotation_to_y_axis(m.cylinder.direction);
    const Eigen::Vector3d c = r_align * m.cylinder.axis_point;
    const Circle2D circle{c(0), c(2), m.cylinder.radius};
    double max_defect = 0.0, sum_defect = 0.0;
    for (int id : r.inlier_lines) {
      const ImageLine& line = scene.lines[id];
      const Eigen::Vector3d l2d = backproject_line_2d(
          line.l, scene.cameras[line.camera], r_align, cfg.direction_tol);
      const double d = std::abs(geometric_line_residual(l2d, circle));
      max_defect = std::max(max_defect, d);
      sum_defect += d;
    }
    r.max_defect = max_defect;
    r.mean_defect = r.inlier_lines.empty() ? 0.0 : sum_defect / r.inlier_lines.size();
    r.method = "match";
    r.conic_class = "circle";
    result.cylinders.push_back(result_entry(r, focal));
  }
  emit_result(result, a.output);
  return 0;
}

struct SynthArgs {
  std::string experiment;
  std::string out;
  bool timing = false;
  BenchmarkConfig cfg;
};

int run_synth(const SynthArgs& a) {
  std::vector<BenchmarkRow> rows = run_benchmark(a.experiment, a.cfg);
  if (!a.timing) {
    // wall-clock timings are the one nondeterministic column; zero them so
    // equal seeds give byte-identical files (opt back in with --timing)
    for (BenchmarkRow& row : rows) row.runtime_us = 0.0;
  }
  if (a.out.empty()) {
    write_benchmark_csv(std::cout, rows);
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot open '" + a.out + "' for writing");
    write_benchmark_csv(f, rows);
    if (!f.good()) fail(ErrorCode::IoError, "failed writing '" + a.out + "'");
  }
  return 0;
}

int run_validate(const std::string& scene_path) {
  const SceneFile scene = load_scene(scene_path);
  std::cout << "ok: " << scene.cameras.size() << " cameras, "
            << scene.lines.size() << " lines\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"infinite-cylinder triangulation from image silhouette lines",
               "cyltri"};
  app.require_subcommand(1);

  TriangulateArgs tri;
  CLI::App* tri_cmd = app.add_subcommand(
      "triangulate", "estimate one cylinder (or one per --group label) from a scene file");
  tri_cmd->add_option("scene", tri.scene_path, "scene file (JSON)")->required();
  tri_cmd->add_option("--direction", tri.direction, "axis estimator: lsq | ransac")
      ->check(CLI::IsMember({"lsq", "ransac"}));
  tri_cmd->add_option("--cross-section", tri.cross_section,
                      "cross-section estimator: minimal-ransac | constrained-lsq | linear")
      ->check(CLI::IsMember({"minimal-ransac", "constrained-lsq", "linear"}));
  tri_cmd->add_option("--threshold", tri.threshold, "inlier tangency-defect threshold");
  tri_cmd->add_option("--iterations", tri.iterations, "sampling iterations");
  tri_cmd->add_flag("--exhaustive", tri.exhaustive, "enumerate all 3-line subsets");
  tri_cmd->add_option("--min-inliers", tri.min_inliers, "minimum consensus size");
  tri_cmd->add_option("--direction-tol", tri.direction_tol,
                      "axis-consistency tolerance for dropping lines");
  tri_cmd->add_option("--seed", tri.seed, "RNG seed");
  tri_cmd->add_flag("--group", tri.group,
                    "treat line group labels as known correspondences");
  tri_cmd->add_option("--output", tri.output, "result file (stdout if omitted)");

  MatchArgs match;
  CLI::App* match_cmd = app.add_subcommand(
      "match", "match and estimate parallel cylinders without correspondences");
  match_cmd->add_option("scene", match.scene_path, "scene file (JSON)")->required();
  match_cmd->add_option("--ref-image", match.ref_image, "reference camera id")
      ->required();
  match_cmd->add_option("--direction", match.direction, "axis estimator: lsq | ransac")
      ->check(CLI::IsMember({"lsq", "ransac"}));
  match_cmd->add_option("--threshold", match.threshold,
                        "inlier tangency-defect threshold");
  match_cmd->add_option("--min-inliers", match.min_inliers, "minimum consensus size");
  match_cmd->add_option("--direction-tol", match.direction_tol,
                        "axis-consistency tolerance");
  match_cmd->add_option("--seed", match.seed, "RNG seed");
  match_cmd->add_option("--output", match.output, "result file (stdout if omitted)");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "run a synthetic benchmark experiment and emit CSV");
  synth_cmd
      ->add_option("experiment", synth.experiment,
                   "numerics | noise_sweep | method_comparison | degeneracy | "
                   "multi_cylinder")
      ->required();
  synth_cmd->add_option("--out", synth.out, "CSV file (stdout if omitted)");
  synth_cmd->add_option("--trials", synth.cfg.trials, "trials per grid point");
  synth_cmd->add_option("--seed", synth.cfg.seed, "master seed");
  synth_cmd->add_flag("--timing", synth.timing,
                      "keep wall-clock runtimes (output no longer deterministic)");
  synth_cmd->add_option("--cameras", synth.cfg.scene.n_cameras, "cameras per scene");
  synth_cmd->add_option("--cylinders", synth.cfg.scene.n_cylinders,
                        "cylinders per scene");
  synth_cmd->add_option("--sigma", synth.cfg.scene.sigma, "scene noise level");
  synth_cmd->add_option("--radius-min", synth.cfg.scene.radius_min, "");
  synth_cmd->add_option("--radius-max", synth.cfg.scene.radius_max, "");
  synth_cmd->add_option("--exclusion", synth.cfg.scene.exclusion_half_width,
                        "camera-free half-width around the origin");
  synth_cmd->add_option("--arc-width", synth.cfg.arc_width_deg,
                        "touch-point arc width (degeneracy), degrees");
  synth_cmd->add_option("--arc-sigma", synth.cfg.arc_sigma,
                        "offset noise (degeneracy)");
  synth_cmd->add_option("--match-threshold", synth.cfg.match_threshold,
                        "inlier threshold (multi_cylinder)");

  std::string validate_path;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a scene file and report its size");
  validate_cmd->add_option("scene", validate_path, "scene file (JSON)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
    if (tri_cmd->parsed()) return run_triangulate(tri);
    if (match_cmd->parsed()) return run_match(match);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (validate_cmd->parsed()) return run_validate(validate_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace cyltri
