#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyltri {

using Mat34 = Eigen::Matrix<double, 3, 4>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  RankDeficient,
  NoConsensus,
  DegenerateLines,
  NonFiniteSolutionSet,
  NoRealCircle,
  EliminationSingular,
  DegenerateConic,
  ImaginaryRadius,
  DirectionInconsistent,
  SchemaError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

/// Calibrated camera P = [R | t] mapping homogeneous world points to
/// normalized image coordinates. R must be a proper rotation.
struct Camera {
  Mat34 P = Mat34::Zero();
  std::string id;

  Eigen::Matrix3d rotation() const { return P.leftCols<3>(); }
  Eigen::Vector3d translation() const { return P.col(3); }
  Eigen::Vector3d center() const { return -rotation().transpose() * translation(); }
};

/// Validates orthonormality (within 1e-9) and positive determinant.
Camera make_camera(const Mat34& P, std::string id = {});

/// Homogeneous image line, stored scaled so that the normal part (l1, l2)
/// has unit Euclidean length. Lines at infinity are rejected.
struct ImageLine {
  Eigen::Vector3d l = Eigen::Vector3d::Zero();
  int camera = -1;              // index into the owning scene's camera list
  std::optional<int> label;     // ground-truth identity, evaluation only
  std::optional<int> pair;      // silhouette pair id within its image
};

/// Rescales l so ||(l1, l2)|| = 1; throws InvalidInput for lines at infinity.
Eigen::Vector3d normalize_line(const Eigen::Vector3d& l);

ImageLine make_image_line(const Eigen::Vector3d& l, int camera = -1,
                          std::optional<int> label = std::nullopt,
                          std::optional<int> pair = std::nullopt);

/// Plane in homogeneous coordinates (pi1, pi2, pi3, pi4), scale-free.
struct Plane3D {
  Eigen::Vector4d pi = Eigen::Vector4d::Zero();
};

/// Circle in the rectified plane: center (tx, ty), radius r > 0.
struct Circle2D {
  double tx = 0.0;
  double ty = 0.0;
  double r = 0.0;
};

/// Symmetric 3x3 dual conic [[d1,d2,d3],[d2,d4,d5],[d3,d5,d6]] packed as
/// coefficients (d1..d6). Lines r tangent to the conic satisfy r^T d r = 0.
struct DualConic2D {
  Vec6 d = Vec6::Zero();

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m;
    m << d(0), d(1), d(2), d(1), d(3), d(4), d(2), d(4), d(5);
    return m;
  }
  static DualConic2D from_matrix(const Eigen::Matrix3d& m) {
    DualConic2D c;
    c.d << m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2);
    return c;
  }
};

/// Infinite circular cylinder: unit axis direction, axis point with
/// p . w = 0 (canonical), radius r > 0.
struct Cylinder3D {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  Eigen::Vector3d axis_point = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Canonicalizes direction to unit norm and axis_point to the plane
/// orthogonal to the direction.
Cylinder3D make_cylinder(const Eigen::Vector3d& direction,
                         const Eigen::Vector3d& axis_point, double radius);

/// Rank-3 quadric envelope of a cylinder, stored as the aligning rotation
/// plus the 2D cross-section dual conic instead of a dense 4x4.
struct DualQuadricCylinder {
  Eigen::Matrix3d r_align = Eigen::Matrix3d::Identity();
  DualConic2D cross_section;

  Eigen::Vector3d direction() const { return r_align.row(1).transpose(); }
  /// Dense 4x4 envelope in world coordinates (for tests and projection).
  Eigen::Matrix4d envelope_matrix() const;
};

/// A direction-rectified instance: rotation taking the axis to +y and the
/// backprojected 2D lines with their source line indices.
struct RectifiedProblem {
  Eigen::Matrix3d r_align = Eigen::Matrix3d::Identity();
  std::vector<Eigen::Vector3d> lines2d;
  std::vector<int> source;  // index of each 2D line in the input line list
};

}  // namespace cyltri
