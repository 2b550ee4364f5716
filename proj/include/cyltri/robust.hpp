#pragma once

#include "cyltri/direction.hpp"
#include "cyltri/types.hpp"

#include <cstdint>
#include <utility>

namespace cyltri {

struct RansacConfig {
  int iterations = 1000;           // ignored when exhaustive
  bool exhaustive = false;         // enumerate every 3-subset instead of sampling
  double inlier_threshold = 0.01;  // scene-unit tangency defect
  int min_inliers = 4;
  std::uint64_t seed = 0;
};

struct RansacCircle {
  Circle2D circle;
  std::vector<int> inlier_ids;  // indices into the input line list
};

/// Consensus circle fit over rectified 2D lines: 3-line minimal hypotheses
/// scored by |geometric_line_residual| <= threshold. The best hypothesis is
/// refined with the constrained least-squares solver on its inliers (>= 4);
/// the refinement is kept only if it does not lose consensus, and the
/// returned inlier ids are re-evaluated against the returned circle.
/// Throws NoConsensus when the best count is below cfg.min_inliers.
RansacCircle ransac_circle(const std::vector<Eigen::Vector3d>& lines2d,
                           const RansacConfig& cfg);

struct MatchResult {
  Cylinder3D cylinder;
  std::vector<std::pair<int, int>> matched_lines;  // (camera index, line index)
  double inlier_rate = 0.0;   // matched / rectifiable lines
  double outlier_rate = 0.0;  // 1 - inlier_rate
};

struct MultiCylinderConfig {
  double inlier_threshold = 0.01;
  int min_inliers = 4;
  DirectionConfig direction;   // shared_direction must be true (parallel scene)
  double direction_tol = 0.02; // backprojection consistency tolerance
};

struct MultiCylinderResult {
  std::vector<MatchResult> matches;      // descending consensus order
  std::vector<int> skipped_pairs;        // reference pair ids with no consensus
  long hypotheses = 0;                   // (ref pairs) x (lines outside ref image)
};

/// Joint matching + estimation for scenes of parallel cylinders: one shared
/// axis direction is estimated from all lines, every line is backprojected to
/// the rectified plane (DirectionInconsistent lines are excluded from scoring
/// entirely), and each left/right silhouette pair of the reference image is
/// combined with every single line from the other images as an exhaustive
/// 3-line hypothesis set. Per pair the max-consensus circle is kept and
/// refined; lines are then assigned to at most one cylinder, greedily by
/// descending inlier count, and models left with fewer than min_inliers
/// assigned lines are pruned.
MultiCylinderResult exhaustive_multi_cylinder(const std::vector<ImageLine>& lines,
                                              const std::vector<Camera>& cameras,
                                              int ref_image,
                                              const MultiCylinderConfig& cfg);

}  // namespace cyltri
