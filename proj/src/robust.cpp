#include "cyltri/robust.hpp"

#include "cyltri/geometry.hpp"
#include "cyltri/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace cyltri {

namespace {

int count_inliers(const std::vector<Eigen::Vector3d>& lines2d, const Circle2D& c,
                  double threshold, std::vector<int>* ids) {
  int count = 0;
  for (size_t i = 0; i < lines2d.size(); ++i) {
    if (std::abs(geometric_line_residual(lines2d[i], c)) <= threshold) {
      ++count;
      if (ids) ids->push_back(static_cast<int>(i));
    }
  }
  return count;
}

/// Constrained least-squares refit on the inlier subset. The refinement is
/// kept only when it does not lose consensus; ids are re-evaluated against
/// whichever circle is returned.
void refine_on_inliers(const std::vector<Eigen::Vector3d>& lines2d, double threshold,
                       Circle2D* circle, std::vector<int>* ids) {
  if (ids->size() >= 4) {
    std::vector<Eigen::Vector3d> subset;
    subset.reserve(ids->size());
    for (int i : *ids) subset.push_back(lines2d[i]);
    try {
      const Circle2D refined = solve_constrained_lsq(subset).best;
      if (count_inliers(lines2d, refined, threshold, nullptr) >=
          static_cast<int>(ids->size())) {
        *circle = refined;
      }
    } catch (const Error&) {
      // keep the minimal-solver circle
    }
  }
  ids->clear();
  count_inliers(lines2d, *circle, threshold, ids);
}

}  // namespace

RansacCircle ransac_circle(const std::vector<Eigen::Vector3d>& lines2d,
                           const RansacConfig& cfg) {
  const int n = static_cast<int>(lines2d.size());
  if (n < 3) fail(ErrorCode::InvalidInput, "circle consensus needs >= 3 lines");
  if (cfg.inlier_threshold <= 0.0) {
    fail(ErrorCode::InvalidConfig, "inlier_threshold must be > 0");
  }
  if (!cfg.exhaustive && cfg.iterations < 1) {
    fail(ErrorCode::InvalidConfig, "iterations must be >= 1");
  }

  Circle2D best;
  int best_count = -1;
  auto score_triple = [&](int i, int j, int k) {
    std::vector<Circle2D> circles;
    try {
      circles = solve_minimal_three_lines(lines2d[i], lines2d[j], lines2d[k]);
    } catch (const Error&) {
      return;  // degenerate or circle-free triple
    }
    for (const Circle2D& c : circles) {
      const int count = count_inliers(lines2d, c, cfg.inlier_threshold, nullptr);
      if (count > best_count) {
        best_count = count;
        best = c;
      }
    }
  };

  if (cfg.exhaustive) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) score_triple(i, j, k);
      }
    }
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    int sample[3];
    for (int it = 0; it < cfg.iterations; ++it) {
      for (int k = 0; k < 3; ++k) {
        int idx = pick(rng);
        while (std::find(sample, sample + k, idx) != sample + k) idx = pick(rng);
        sample[k] = idx;
      }
      score_triple(sample[0], sample[1], sample[2]);
    }
  }

  if (best_count < cfg.min_inliers) {
    fail(ErrorCode::NoConsensus,
         "best consensus " + std::to_string(std::max(best_count, 0)) +
             " below min_inliers " + std::to_string(cfg.min_inliers));
  }

  RansacCircle result;
  result.circle = best;
  count_inliers(lines2d, best, cfg.inlier_threshold, &result.inlier_ids);
  refine_on_inliers(lines2d, cfg.inlier_threshold, &result.circle, &result.inlier_ids);
  return result;
}

MultiCylinderResult exhaustive_multi_cylinder(const std::vector<ImageLine>& lines,
                                              const std::vector<Camera>& cameras,
                                              int ref_image,
                                              const MultiCylinderConfig& cfg) {
  if (lines.empty()) fail(ErrorCode::InvalidInput, "no lines");
  if (ref_image < 0 || ref_image >= static_cast<int>(cameras.size())) {
    fail(ErrorCode::InvalidInput, "reference image out of range");
  }
  if (cfg.inlier_threshold <= 0.0) {
    fail(ErrorCode::InvalidConfig, "inlier_threshold must be > 0");
  }
  if (!cfg.direction.shared_direction) {
    fail(ErrorCode::InvalidConfig,
         "per-cylinder directions need grouped lines; matching requires the "
         "shared (parallel) direction model");
  }

  const DirectionEstimate dir =
      cfg.direction.method == DirectionMethod::Ransac
          ? estimate_direction_ransac(lines, cameras, cfg.direction)
          : estimate_direction_lsq(lines, cameras);
  const Eigen::Matrix3d r_align = rotation_to_y_axis(dir.w);

  // Rectify every line; direction-inconsistent ones never take part in
  // scoring (they belong to no candidate under this axis).
  struct Rectified {
    int line = -1;  // index into the input line list
    int cam = -1;
    Eigen::Vector3d l2d = Eigen::Vector3d::Zero();
  };
  std::vector<Rectified> rect;
  rect.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    const ImageLine& line = lines[i];
    if (line.camera < 0 || line.camera >= static_cast<int>(cameras.size())) {
      fail(ErrorCode::InvalidInput,
           "line " + std::to_string(i) + " references camera " +
               std::to_string(line.camera) + " out of range");
    }
    try {
      const Eigen::Vector3d l2d = backproject_line_2d(
          line.l, cameras[line.camera], r_align, cfg.direction_tol);
      rect.push_back({static_cast<int>(i), line.camera, l2d});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DirectionInconsistent) throw;
    }
  }

  std::map<int, std::vector<int>> pairs;  // pair id -> indices into rect
  for (size_t k = 0; k < rect.size(); ++k) {
    if (rect[k].cam != ref_image) continue;
    const std::optional<int>& pid = lines[rect[k].line].pair;
    if (pid) pairs[*pid].push_back(static_cast<int>(k));
  }
  if (pairs.empty()) {
    fail(ErrorCode::InvalidInput, "reference image has no silhouette pairs");
  }
  for (const auto& [pid, members] : pairs) {
    if (members.size() != 2) {
      fail(ErrorCode::InvalidInput,
           "silhouette pair " + std::to_string(pid) + " has " +
               std::to_string(members.size()) + " lines, expected 2");
    }
  }

  std::vector<Eigen::Vector3d> rect_lines;
  rect_lines.reserve(rect.size());
  for (const Rectified& r : rect) rect_lines.push_back(r.l2d);

  struct PairModel {
    int pid = -1;
    int count = -1;
    Circle2D circle;
    std::vector<int> inliers;  // indices into rect
  };
  MultiCylinderResult result;
  std::vector<PairModel> models;
  for (const auto& [pid, members] : pairs) {
    PairModel model;
    model.pid = pid;
    for (size_t k = 0; k < rect.size(); ++k) {
      if (rect[k].cam == ref_image) continue;
      ++result.hypotheses;
      std::vector<Circle2D> circles;
      try {
        circles = solve_minimal_three_lines(rect_lines[members[0]],
                                            rect_lines[members[1]], rect_lines[k]);
      } catch (const Error&) {
        continue;
      }
      for (const Circle2D& c : circles) {
        const int count = count_inliers(rect_lines, c, cfg.inlier_threshold, nullptr);
        if (count > model.count) {
          model.count = count;
          model.circle = c;
        }
      }
    }
    if (model.count < cfg.min_inliers) {
      result.skipped_pairs.push_back(pid);
      continue;
    }
    count_inliers(rect_lines, model.circle, cfg.inlier_threshold, &model.inliers);
    refine_on_inliers(rect_lines, cfg.inlier_threshold, &model.circle, &model.inliers);
    model.count = static_cast<int>(model.inliers.size());
    models.push_back(std::move(model));
  }

  // One line belongs to at most one cylinder: strongest consensus first.
  std::stable_sort(models.begin(), models.end(),
                   [](const PairModel& a, const PairModel& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return a.pid < b.pid;
                   });
  std::vector<char> taken(rect.size(), 0);
  for (const PairModel& model : models) {
    std::vector<int> kept;
    for (int k : model.inliers) {
      if (!taken[k]) kept.push_back(k);
    }
    if (static_cast<int>(kept.size()) < cfg.min_inliers) continue;  // dominated
    for (int k : kept) taken[k] = 1;
    MatchResult match;
    match.cylinder = lift_circle_to_cylinder(model.circle, r_align);
    for (int k : kept) match.matched_lines.emplace_back(rect[k].cam, rect[k].line);
    match.inlier_rate = static_cast<double>(kept.size()) / rect.size();
    match.outlier_rate = 1.0 - match.inlier_rate;
    result.matches.push_back(std::move(match));
  }
  return result;
}

}  // namespace cyltri
