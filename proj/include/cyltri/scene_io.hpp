#pragma once

#include "cyltri/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cyltri {

/// On-disk scene: cameras with row-major 3x4 projections, image lines
/// referencing cameras by id, free-form string metadata. The optional group
/// field of a line marks known correspondences (lines of the same physical
/// cylinder) and doubles as the silhouette pair id in the reference image.
struct SceneFile {
  std::vector<Camera> cameras;
  std::vector<ImageLine> lines;  // camera field = index into cameras
  std::map<std::string, std::string> metadata;

  /// metadata["focal_length"] parsed as a number, when present and valid.
  std::optional<double> focal_length() const;
};

/// One estimated cylinder with its fit diagnostics.
struct ResultEntry {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  Eigen::Vector3d axis_point = Eigen::Vector3d::Zero();
  double radius = 0.0;
  std::vector<int> inlier_lines;  // indices into the scene line list
  double max_defect = 0.0;        // residual statistics, scene units
  double mean_defect = 0.0;
  std::optional<double> max_defect_px;  // defect x focal length, when known
  std::optional<double> mean_defect_px;
  std::string method;
  std::string conic_class;
};

struct ResultFile {
  std::vector<ResultEntry> cylinders;
  std::map<std::string, std::string> config;  // echo of the run parameters
};

/// Parsing throws SchemaError on malformed documents or broken references
/// (messages name the offending element) and never partially succeeds.
SceneFile scene_from_json(const std::string& text);
std::string scene_to_json(const SceneFile& scene);

/// Directions are renormalized on load.
ResultFile result_from_json(const std::string& text);
std::string result_to_json(const ResultFile& result);

/// File wrappers; throw IoError when the path cannot be read or written.
SceneFile load_scene(const std::string& path);
void save_scene(const SceneFile& scene, const std::string& path);
ResultFile load_result(const std::string& path);
void save_result(const ResultFile& result, const std::string& path);

}  // namespace cyltri
