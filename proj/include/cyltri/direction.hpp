#pragma once

#include "cyltri/types.hpp"

#include <cstdint>

namespace cyltri {

struct DirectionEstimate {
  Eigen::Vector3d w = Eigen::Vector3d::UnitY();
  std::vector<int> inlier_ids;        // indices into the input line list
  Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();
};

enum class DirectionMethod { LeastSquares, Ransac };

struct DirectionConfig {
  DirectionMethod method = DirectionMethod::LeastSquares;
  int ransac_iterations = 200;
  double inlier_threshold = 0.01;  // radians of angular residual
  int sample_size = 2;
  bool shared_direction = true;    // pool all cylinders' lines
  std::uint64_t seed = 0;
};

/// Angular deviation of w from the backprojected plane of one line:
/// |asin(l^T R w / ||R^T l||)|, clamped into the principal branch.
double angular_direction_residual(const ImageLine& line, const Camera& cam,
                                  const Eigen::Vector3d& w);

/// Axis direction as the smallest right singular vector of the stacked rows
/// l_i^T R_i. Sign canonicalized: largest-|component| positive (ties broken
/// by first index). Throws RankDeficient when the rows span < 2 dimensions.
DirectionEstimate estimate_direction_lsq(const std::vector<ImageLine>& lines,
                                         const std::vector<Camera>& cameras);

/// RANSAC over random samples of cfg.sample_size lines; hypothesis via
/// estimate_direction_lsq on the sample, angular inlier test against
/// cfg.inlier_threshold, final re-estimation on the consensus set.
DirectionEstimate estimate_direction_ransac(const std::vector<ImageLine>& lines,
                                            const std::vector<Camera>& cameras,
                                            const DirectionConfig& cfg);

}  // namespace cyltri
