#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cyltri/direction.hpp"
#include "cyltri/geometry.hpp"
#include "cyltri/pipeline.hpp"
#include "cyltri/robust.hpp"
#include "cyltri/scene_io.hpp"
#include "cyltri/solvers.hpp"
#include "cyltri/synthetic.hpp"

#include <sstream>

namespace py = pybind11;
using namespace cyltri;

namespace {

PipelineConfig pipeline_config(const std::string& direction,
                               const std::string& cross_section,
                               double threshold, int iterations,
                               bool exhaustive, int min_inliers,
                               double direction_tol, std::uint64_t seed) {
  PipelineConfig cfg;
  if (direction == "lsq") {
    cfg.direction.method = DirectionMethod::LeastSquares;
  } else if (direction == "ransac") {
    cfg.direction.method = DirectionMethod::Ransac;
  } else {
    fail(ErrorCode::InvalidConfig, "direction must be lsq or ransac");
  }
  cfg.cross_section = cross_section_method_from_name(cross_section);
  cfg.inlier_threshold = threshold;
  cfg.iterations = iterations;
  cfg.exhaustive = exhaustive;
  cfg.min_inliers = min_inliers;
  cfg.direction_tol = direction_tol;
  cfg.seed = seed;
  cfg.direction.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "infinite-cylinder triangulation from image silhouette lines";

  py::register_exception<Error>(m, "CyltriError");

  py::class_<Camera>(m, "Camera")
      .def(py::init([](const Eigen::Matrix<double, 3, 4>& P, const std::string& id) {
             return make_camera(P, id);
           }),
           py::arg("P"), py::arg("id") = "")
      .def_readonly("P", &Camera::P)
      .def_readonly("id", &Camera::id)
      .def("rotation", &Camera::rotation)
      .def("translation", &Camera::translation)
      .def("center", &Camera::center)
      .def("__repr__", [](const Camera& c) { return "Camera('" + c.id + "')"; });

  py::class_<ImageLine>(m, "ImageLine")
      .def(py::init([](const Eigen::Vector3d& l, int camera,
                       std::optional<int> label, std::optional<int> pair) {
             return make_image_line(l, camera, label, pair);
           }),
           py::arg("l"), py::arg("camera") = -1, py::arg("label") = py::none(),
           py::arg("pair") = py::none())
      .def_readonly("l", &ImageLine::l)
      .def_readonly("camera", &ImageLine::camera)
      .def_readonly("label", &ImageLine::label)
      .def_readonly("pair", &ImageLine::pair);

  py::class_<Circle2D>(m, "Circle2D")
      .def(py::init<double, double, double>(), py::arg("tx"), py::arg("ty"),
           py::arg("r"))
      .def_readwrite("tx", &Circle2D::tx)
      .def_readwrite("ty", &Circle2D::ty)
      .def_readwrite("r", &Circle2D::r)
      .def("__repr__", [](const Circle2D& c) {
        std::ostringstream ss;
        ss << "Circle2D(tx=" << c.tx << ", ty=" << c.ty << ", r=" << c.r << ")";
        return ss.str();
      });

  py::class_<Cylinder3D>(m, "Cylinder3D")
      .def(py::init([](const Eigen::Vector3d& direction,
                       const Eigen::Vector3d& axis_point, double radius) {
             return make_cylinder(direction, axis_point, radius);
           }),
           py::arg("direction"), py::arg("axis_point"), py::arg("radius"))
      .def_readonly("direction", &Cylinder3D::direction)
      .def_readonly("axis_point", &Cylinder3D::axis_point)
      .def_readonly("radius", &Cylinder3D::radius)
      .def("__repr__", [](const Cylinder3D& c) {
        std::ostringstream ss;
        ss << "Cylinder3D(direction=[" << c.direction.transpose()
           << "], axis_point=[" << c.axis_point.transpose()
           << "], radius=" << c.radius << ")";
        return ss.str();
      });

  py::class_<DualConic2D>(m, "DualConic2D")
      .def_readonly("d", &DualConic2D::d)
      .def("matrix", &DualConic2D::matrix);

  // plane geometry
  m.def("normalize_line", &normalize_line, py::arg("l"),
        "rescale so the first two components have unit norm");
  m.def("rotation_to_y_axis", &rotation_to_y_axis, py::arg("w"),
        "rotation taking the unit direction w to (0, 1, 0)");
  m.def("backproject_line_2d", &backproject_line_2d, py::arg("l"),
        py::arg("camera"), py::arg("r_align"), py::arg("direction_tol") = 1e-6,
        "silhouette line -> rectified 2D line (unit normal, offset)");
  m.def("geometric_line_residual", &geometric_line_residual, py::arg("line"),
        py::arg("circle"), "signed center-to-line distance minus the radius");
  m.def("lift_circle_to_cylinder", &lift_circle_to_cylinder, py::arg("circle"),
        py::arg("r_align"));
  m.def("tangent_lines_from_point", &tangent_lines_from_point, py::arg("circle"),
        py::arg("point"), "the two tangents through an exterior point");

  // cross-section solvers over rectified 2D lines
  m.def(
      "solve_minimal_three_lines",
      [](const std::vector<Eigen::Vector3d>& lines) {
        if (lines.size() != 3) {
          fail(ErrorCode::InvalidInput, "need exactly three lines");
        }
        return solve_minimal_three_lines(lines[0], lines[1], lines[2]);
      },
      py::arg("lines"), "all circles tangent to three lines (up to 4)");
  m.def(
      "solve_constrained_lsq",
      [](const std::vector<Eigen::Vector3d>& lines) {
        const ConstrainedLsqResult r = solve_constrained_lsq(lines);
        return py::make_tuple(r.best, r.stationary, r.costs);
      },
      py::arg("lines"),
      "(best, stationary, costs): circle-constrained least-squares fit");
  m.def("solve_linear_conic", &solve_linear_conic, py::arg("lines"),
        "unconstrained dual-conic fit (needs >= 5 independent lines)");
  m.def(
      "classify_conic",
      [](const DualConic2D& d) { return std::string(conic_class_name(classify_conic(d))); },
      py::arg("conic"));
  m.def(
      "ransac_circle",
      [](const std::vector<Eigen::Vector3d>& lines, double threshold,
         int iterations, bool exhaustive, int min_inliers, std::uint64_t seed) {
        RansacConfig cfg;
        cfg.inlier_threshold = threshold;
        cfg.iterations = iterations;
        cfg.exhaustive = exhaustive;
        cfg.min_inliers = min_inliers;
        cfg.seed = seed;
        const RansacCircle r = ransac_circle(lines, cfg);
        return py::make_tuple(r.circle, r.inlier_ids);
      },
      py::arg("lines"), py::arg("threshold") = 0.01, py::arg("iterations") = 1000,
      py::arg("exhaustive") = false, py::arg("min_inliers") = 4,
      py::arg("seed") = 0, "(circle, inlier_ids): consensus circle fit");

  // axis direction from silhouette lines
  m.def(
      "estimate_direction",
      [](const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
         const std::string& method, double threshold, int iterations,
         std::uint64_t seed) {
        DirectionEstimate est;
        if (method == "lsq") {
          est = estimate_direction_lsq(lines, cameras);
        } else if (method == "ransac") {
          DirectionConfig cfg;
          cfg.method = DirectionMethod::Ransac;
          cfg.inlier_threshold = threshold;
          cfg.ransac_iterations = iterations;
          cfg.seed = seed;
          est = estimate_direction_ransac(lines, cameras, cfg);
        } else {
          fail(ErrorCode::InvalidConfig, "method must be lsq or ransac");
        }
        return py::make_tuple(est.w, est.inlier_ids);
      },
      py::arg("lines"), py::arg("cameras"), py::arg("method") = "lsq",
      py::arg("threshold") = 0.01, py::arg("iterations") = 200,
      py::arg("seed") = 0, "(w, inlier_ids): common axis direction");

  // end-to-end pipeline
  py::class_<CylinderResult>(m, "CylinderResult")
      .def_readonly("cylinder", &CylinderResult::cylinder)
      .def_readonly("inlier_lines", &CylinderResult::inlier_lines)
      .def_readonly("max_defect", &CylinderResult::max_defect)
      .def_readonly("mean_defect", &CylinderResult::mean_defect)
      .def_readonly("method", &CylinderResult::method)
      .def_readonly("conic_class", &CylinderResult::conic_class)
      .def_readonly("n_stationary", &CylinderResult::n_stationary);

  m.def(
      "triangulate_cylinder",
      [](const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
         const std::string& direction, const std::string& cross_section,
         double threshold, int iterations, bool exhaustive, int min_inliers,
         double direction_tol, std::uint64_t seed) {
        return triangulate_cylinder(
            lines, cameras,
            pipeline_config(direction, cross_section, threshold, iterations,
                            exhaustive, min_inliers, direction_tol, seed));
      },
      py::arg("lines"), py::arg("cameras"), py::arg("direction") = "lsq",
      py::arg("cross_section") = "constrained-lsq", py::arg("threshold") = 0.01,
      py::arg("iterations") = 1000, py::arg("exhaustive") = false,
      py::arg("min_inliers") = 4, py::arg("direction_tol") = 0.02,
      py::arg("seed") = 0);
  m.def(
      "triangulate_groups",
      [](const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
         const std::string& direction, const std::string& cross_section,
         double threshold, int iterations, bool exhaustive, int min_inliers,
         double direction_tol, std::uint64_t seed) {
        return triangulate_groups(
            lines, cameras,
            pipeline_config(direction, cross_section, threshold, iterations,
                            exhaustive, min_inliers, direction_tol, seed));
      },
      py::arg("lines"), py::arg("cameras"), py::arg("direction") = "lsq",
      py::arg("cross_section") = "constrained-lsq", py::arg("threshold") = 0.01,
      py::arg("iterations") = 1000, py::arg("exhaustive") = false,
      py::arg("min_inliers") = 4, py::arg("direction_tol") = 0.02,
      py::arg("seed") = 0);
  m.def(
      "match_cylinders",
      [](const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
         int ref_image, double threshold, int min_inliers, double direction_tol,
         std::uint64_t seed) {
        MultiCylinderConfig cfg;
        cfg.inlier_threshold = threshold;
        cfg.min_inliers = min_inliers;
        cfg.direction_tol = direction_tol;
        cfg.direction.seed = seed;
        const MultiCylinderResult res =
            exhaustive_multi_cylinder(lines, cameras, ref_image, cfg);
        py::list matches;
        for (const MatchResult& match : res.matches) {
          matches.append(py::make_tuple(match.cylinder, match.matched_lines,
                                        match.inlier_rate));
        }
        return py::make_tuple(matches, res.skipped_pairs, res.hypotheses);
      },
      py::arg("lines"), py::arg("cameras"), py::arg("ref_image") = 0,
      py::arg("threshold") = 0.01, py::arg("min_inliers") = 4,
      py::arg("direction_tol") = 0.02, py::arg("seed") = 0,
      "(matches, skipped_pairs, hypotheses) for a parallel-cylinder scene");

  // scene / result files
  py::class_<SceneFile>(m, "SceneFile")
      .def(py::init<>())
      .def_readwrite("cameras", &SceneFile::cameras)
      .def_readwrite("lines", &SceneFile::lines)
      .def_readwrite("metadata", &SceneFile::metadata)
      .def("focal_length", &SceneFile::focal_length);
  m.def("load_scene", &load_scene, py::arg("path"));
  m.def("save_scene", &save_scene, py::arg("scene"), py::arg("path"));
  m.def("scene_from_json", &scene_from_json, py::arg("text"));
  m.def("scene_to_json", &scene_to_json, py::arg("scene"));

  // synthetic scenes and benchmarks
  m.def(
      "generate_scene",
      [](int n_cameras, int n_cylinders, double sigma, double radius_min,
         double radius_max, double camera_half_width, double exclusion_half_width,
         std::uint64_t seed) {
        SceneConfig cfg;
        cfg.n_cameras = n_cameras;
        cfg.n_cylinders = n_cylinders;
        cfg.sigma = sigma;
        cfg.radius_min = radius_min;
        cfg.radius_max = radius_max;
        cfg.camera_half_width = camera_half_width;
        cfg.exclusion_half_width = exclusion_half_width;
        cfg.seed = seed;
        std::mt19937_64 rng(seed);
        const SyntheticScene s = generate_scene(cfg, rng);
        py::dict out;
        out["cameras"] = s.cameras;
        out["lines"] = s.lines;
        out["noisy_lines"] = s.noisy_lines;
        out["cylinders"] = s.cylinders;
        return out;
      },
      py::arg("n_cameras") = 6, py::arg("n_cylinders") = 1, py::arg("sigma") = 0.0,
      py::arg("radius_min") = 0.5, py::arg("radius_max") = 2.0,
      py::arg("camera_half_width") = 20.0, py::arg("exclusion_half_width") = 3.0,
      py::arg("seed") = 0, "exact + noisy silhouettes of a sampled scene");
  m.def(
      "run_benchmark",
      [](const std::string& experiment, int trials, std::uint64_t seed) {
        BenchmarkConfig cfg;
        cfg.trials = trials;
        cfg.seed = seed;
        std::ostringstream csv;
        write_benchmark_csv(csv, run_benchmark(experiment, cfg));
        return csv.str();
      },
      py::arg("experiment"), py::arg("trials") = 100, py::arg("seed") = 0,
      "run a named experiment and return its CSV text");
}
