#pragma once

#include "cyltri/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace cyltri {

/// Scene sampling parameters: vertical cylinders near the origin observed by
/// cameras scattered in a square around them, outside an exclusion square
/// that keeps them clear of the geometry.
struct SceneConfig {
  double radius_min = 0.5;
  double radius_max = 2.0;
  double camera_half_width = 20.0;     // cameras land inside this square...
  double exclusion_half_width = 3.0;   // ...but outside this one
  int n_cameras = 6;
  int n_cylinders = 1;
  double sigma = 0.0;  // std-dev of the tangency offset noise, scene units
  std::uint64_t seed = 0;
};

/// A sampled scene. Lines are stored camera-major, cylinder-minor, two
/// tangents each; label and pair are both the owning cylinder index.
struct SyntheticScene {
  std::vector<Camera> cameras;
  std::vector<Cylinder3D> cylinders;
  std::vector<Circle2D> circles;  // ground-truth cross-sections, rectified
  Eigen::Matrix3d r_align = Eigen::Matrix3d::Identity();

  std::vector<ImageLine> lines;        // exact silhouettes
  std::vector<ImageLine> noisy_lines;  // same order, perturbed per sigma
  std::vector<Eigen::Vector3d> lines2d;        // rectified exact tangents
  std::vector<Eigen::Vector3d> noisy_lines2d;  // rectified noisy tangents
};

/// The two tangent lines of a circle through an exterior point, unit normal,
/// ordered by touch angle. Throws InvalidInput when the point is not
/// strictly outside.
std::vector<Eigen::Vector3d> tangent_lines_from_point(const Circle2D& c,
                                                      const Eigen::Vector2d& q);

/// Samples a scene. Cameras that would fall inside a cylinder are resampled;
/// throws InvalidConfig when the configuration leaves no room for the
/// cylinders or the cameras.
SyntheticScene generate_scene(const SceneConfig& cfg, std::mt19937_64& rng);

/// Perturbs the offset of a 2D line by a zero-mean Gaussian draw of the
/// given std-dev; the normal direction is unchanged. The line is
/// renormalized to unit normal first so sigma is in scene units.
Eigen::Vector3d add_line_noise(const Eigen::Vector3d& line2d, double sigma,
                               std::mt19937_64& rng);

struct ErrorMetrics {
  double center_error = 0.0;
  double radius_error = 0.0;
  double direction_angle = 0.0;  // radians; 0 for planar comparisons
};

ErrorMetrics eval_error(const Circle2D& estimate, const Circle2D& truth);
/// center_error is the distance between the axis lines; direction_angle
/// treats axes as undirected (range [0, pi/2]).
ErrorMetrics eval_error(const Cylinder3D& estimate, const Cylinder3D& truth);

/// Frobenius norm of the difference of the symmetric conic matrices after
/// normalizing each to the d6 = -1 gauge; conics with vanishing d6 fall back
/// to unit-norm coefficients with a fixed sign.
double frobenius_conic_error(const DualConic2D& estimate, const DualConic2D& truth);

/// Ten evenly spaced noise levels spanning [0, 0.02].
std::vector<double> default_sigma_grid();

struct BenchmarkConfig {
  SceneConfig scene;  // base scene; experiments read counts and ranges from it
  int trials = 100;   // per grid point
  std::vector<int> line_counts = {4, 6, 10};        // noise_sweep grid
  std::vector<double> sigmas = default_sigma_grid();  // noise_sweep grid
  std::vector<int> view_counts = {2, 3, 5, 10, 15};  // method_comparison grid
  double comparison_sigma = 0.005;   // noise level for method_comparison
  double arc_width_deg = 20.0;       // degeneracy: tangent touch-point arc
  double arc_sigma = 1e-3;           // degeneracy: offset noise
  double match_threshold = 1e-6;     // multi_cylinder: inlier threshold
  std::uint64_t seed = 0;
};

struct BenchmarkRow {
  std::string experiment;
  std::uint64_t seed = 0;
  int n_lines = 0;
  double sigma = 0.0;
  std::string method;
  double center_error = 0.0;
  double radius_error = 0.0;
  double frobenius_error = 0.0;
  std::string conic_class;
  double runtime_us = 0.0;
  int n_solutions = 0;
};

/// Runs one named experiment (numerics | noise_sweep | method_comparison |
/// degeneracy | multi_cylinder) and returns one row per trial and method.
/// Trials are seeded independently from (cfg.seed, grid point, trial index),
/// so any evaluation order produces identical rows.
std::vector<BenchmarkRow> run_benchmark(const std::string& experiment,
                                        const BenchmarkConfig& cfg);

/// CSV with the fixed header
/// experiment,seed,n_lines,sigma,method,center_error,radius_error,
/// frobenius_error,conic_class,runtime_us,n_solutions
/// (one line), LF endings, floats at 17 significant digits.
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace cyltri
