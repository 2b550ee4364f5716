#include "cyltri/pipeline.hpp"

#include "cyltri/geometry.hpp"
#include "cyltri/robust.hpp"
#include "cyltri/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cyltri {

namespace {

[[noreturn]] void rethrow_with_stage(const Error& e, const char* stage) {
  const std::string what = e.what();
  const std::string prefix = std::string(error_code_name(e.code())) + ": ";
  const std::string body =
      what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
  fail(e.code(), std::string(stage) + ": " + body);
}

struct RectifiedLine {
  Eigen::Vector3d l2d;
  int source = -1;
};

}  // namespace

const char* cross_section_method_name(CrossSectionMethod m) {
  switch (m) {
    case CrossSectionMethod::MinimalRansac:
      return "minimal-ransac";
    case CrossSectionMethod::ConstrainedLsq:
      return "constrained-lsq";
    case CrossSectionMethod::Linear:
      return "linear";
  }
  return "unknown";
}

CrossSectionMethod cross_section_method_from_name(const std::string& name) {
  if (name == "minimal-ransac") return CrossSectionMethod::MinimalRansac;
  if (name == "constrained-lsq") return CrossSectionMethod::ConstrainedLsq;
  if (name == "linear") return CrossSectionMethod::Linear;
  fail(ErrorCode::InvalidConfig, "unknown cross-section method: " + name);
}

CylinderResult triangulate_cylinder(const std::vector<ImageLine>& lines,
                                    const std::vector<Camera>& cameras,
                                    const PipelineConfig& cfg) {
  if (cameras.size() < 2) {
    fail(ErrorCode::InvalidInput, "direction stage: need at least two cameras");
  }

  DirectionEstimate dir;
  try {
    dir = cfg.direction.method == DirectionMethod::Ransac
              ? estimate_direction_ransac(lines, cameras, cfg.direction)
              : estimate_direction_lsq(lines, cameras);
  } catch (const Error& e) {
    rethrow_with_stage(e, "direction stage");
  }
  const Eigen::Matrix3d r_align = rotation_to_y_axis(dir.w);

  std::vector<RectifiedLine> rect;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].camera < 0 || lines[i].camera >= static_cast<int>(cameras.size())) {
      fail(ErrorCode::InvalidInput,
           "cross-section stage: line " + std::to_string(i) +
               " references camera " + std::to_string(lines[i].camera) +
               " out of range");
    }
    try {
      rect.push_back({backproject_line_2d(lines[i].l, cameras[lines[i].camera],
                                          r_align, cfg.direction_tol),
                      static_cast<int>(i)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DirectionInconsistent) {
        rethrow_with_stage(e, "cross-section stage");
      }
      // inconsistent with the estimated axis: excluded from the fit
    }
  }

  const size_t needed = cfg.cross_section == CrossSectionMethod::MinimalRansac ? 3
                        : cfg.cross_section == CrossSectionMethod::ConstrainedLsq
                            ? 4
                            : 5;
  if (rect.size() < needed) {
    fail(ErrorCode::InvalidInput,
         "cross-section stage: only " + std::to_string(rect.size()) +
             " usable lines, " + cross_section_method_name(cfg.cross_section) +
             " needs " + std::to_string(needed));
  }
  std::vector<Eigen::Vector3d> lines2d;
  for (const RectifiedLine& r : rect) lines2d.push_back(r.l2d);

  CylinderResult result;
  result.method = cross_section_method_name(cfg.cross_section);
  Circle2D circle;
  try {
    switch (cfg.cross_section) {
      case CrossSectionMethod::MinimalRansac: {
        RansacConfig rc;
        rc.iterations = cfg.iterations;
        rc.exhaustive = cfg.exhaustive;
        rc.inlier_threshold = cfg.inlier_threshold;
        rc.min_inliers = cfg.min_inliers;
        rc.seed = cfg.seed;
        const RansacCircle rr = ransac_circle(lines2d, rc);
        circle = rr.circle;
        for (int id : rr.inlier_ids) result.inlier_lines.push_back(rect[id].source);
        result.conic_class = conic_class_name(ConicClass::Circle);
        break;
      }
      case CrossSectionMethod::ConstrainedLsq: {
        const ConstrainedLsqResult res = solve_constrained_lsq(lines2d);
        circle = res.best;
        result.n_stationary = static_cast<int>(res.stationary.size());
        for (const RectifiedLine& r : rect) result.inlier_lines.push_back(r.source);
        result.conic_class = conic_class_name(ConicClass::Circle);
        break;
      }
      case CrossSectionMethod::Linear: {
        const DualConic2D est = solve_linear_conic(lines2d);
        const ConicClass cls = classify_conic(est);
        result.conic_class = conic_class_name(cls);
        if (cls != ConicClass::Circle && cls != ConicClass::Ellipse) {
          fail(ErrorCode::DegenerateConic,
               std::string("linear fit classifies as ") + conic_class_name(cls) +
                   ", not a circle");
        }
        circle = circle_from_dual_conic(est);
        for (const RectifiedLine& r : rect) result.inlier_lines.push_back(r.source);
        break;
      }
    }
  } catch (const Error& e) {
    rethrow_with_stage(e, "cross-section stage");
  }

  result.cylinder = lift_circle_to_cylinder(circle, r_align);

  double sum = 0.0;
  std::map<int, const RectifiedLine*> by_source;
  for (const RectifiedLine& r : rect) by_source[r.source] = &r;
  for (int id : result.inlier_lines) {
    const double defect = std::abs(geometric_line_residual(by_source[id]->l2d, circle));
    result.max_defect = std::max(result.max_defect, defect);
    sum += defect;
  }
  if (!result.inlier_lines.empty()) {
    result.mean_defect = sum / static_cast<double>(result.inlier_lines.size());
  }
  return result;
}

std::vector<std::pair<int, CylinderResult>> triangulate_groups(
    const std::vector<ImageLine>& lines, const std::vector<Camera>& cameras,
    const PipelineConfig& cfg) {
  std::map<int, std::vector<size_t>> groups;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].label) {
      fail(ErrorCode::InvalidInput,
           "group mode requires a group label on every line; line " +
               std::to_string(i) + " has none");
    }
    groups[*lines[i].label].push_back(i);
  }
  if (groups.empty()) fail(ErrorCode::InvalidInput, "no lines");

  std::vector<std::pair<int, CylinderResult>> results;
  for (const auto& [group, ids] : groups) {
    std::vector<ImageLine> subset;
    for (size_t i : ids) subset.push_back(lines[i]);
    try {
      CylinderResult r = triangulate_cylinder(subset, cameras, cfg);
      for (int& id : r.inlier_lines) id = static_cast<int>(ids[id]);
      results.emplace_back(group, std::move(r));
    } catch (const Error& e) {
      rethrow_with_stage(e, ("group " + std::to_string(group)).c_str());
    }
  }
  return results;
}

}  // namespace cyltri
