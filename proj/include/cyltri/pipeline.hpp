#pragma once

#include "cyltri/direction.hpp"
#include "cyltri/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cyltri {

enum class CrossSectionMethod { MinimalRansac, ConstrainedLsq, Linear };

const char* cross_section_method_name(CrossSectionMethod m);
/// Accepts the names produced by cross_section_method_name
/// (minimal-ransac | constrained-lsq | linear); throws InvalidConfig.
CrossSectionMethod cross_section_method_from_name(const std::string& name);

struct PipelineConfig {
  DirectionConfig direction;  // carries its own seed
  CrossSectionMethod cross_section = CrossSectionMethod::ConstrainedLsq;
  double inlier_threshold = 0.01;  // minimal-ransac consensus gate
  int iterations = 1000;
  bool exhaustive = false;
  int min_inliers = 4;
  std::uint64_t seed = 0;     // cross-section sampling seed
  double direction_tol = 0.02;  // backprojection consistency gate
};

struct CylinderResult {
  Cylinder3D cylinder;
  std::vector<int> inlier_lines;  // indices into the input line list
  double max_defect = 0.0;        // tangency statistics over the inliers
  double mean_defect = 0.0;
  std::string method;
  std::string conic_class;
  int n_stationary = 0;  // stationary-point count of the constrained fit
};

/// Full triangulation of one cylinder: axis direction (least-squares or
/// RANSAC) -> rectifying rotation -> backprojection of every line into the
/// cross-section plane -> circle fit by the configured method -> lift back
/// to a world cylinder. No non-linear refinement runs afterwards. Lines
/// whose backprojection is inconsistent with the axis direction are dropped
/// from the fit (never counted as inliers). Errors name the failing stage.
CylinderResult triangulate_cylinder(const std::vector<ImageLine>& lines,
                                    const std::vector<Camera>& cameras,
                                    const PipelineConfig& cfg);

/// Known-correspondence mode: every line must carry a group label; each
/// group is triangulated independently. Results sorted by group id.
std::vector<std::pair<int, CylinderResult>> triangulate_groups(
    const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
    const PipelineConfig& cfg);

}  // namespace cyltri
