#include "cyltri/geometry.hpp"

#include <cmath>
#include <limits>

namespace cyltri {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::DegenerateLines: return "DegenerateLines";
    case ErrorCode::NonFiniteSolutionSet: return "NonFiniteSolutionSet";
    case ErrorCode::NoRealCircle: return "NoRealCircle";
    case ErrorCode::EliminationSingular: return "EliminationSingular";
    case ErrorCode::DegenerateConic: return "DegenerateConic";
    case ErrorCode::ImaginaryRadius: return "ImaginaryRadius";
    case ErrorCode::DirectionInconsistent: return "DirectionInconsistent";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Camera make_camera(const Mat34& P, std::string id) {
  const Eigen::Matrix3d R = P.leftCols<3>();
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9) {
    fail(ErrorCode::InvalidInput,
         "camera rotation block is not orthonormal (deviation " +
             std::to_string(ortho) + ")");
  }
  if (R.determinant() < 0.0) {
    fail(ErrorCode::InvalidInput, "camera rotation block has negative determinant");
  }
  Camera cam;
  cam.P = P;
  cam.id = std::move(id);
  return cam;
}

Eigen::Vector3d normalize_line(const Eigen::Vector3d& l) {
  const double n = l.head<2>().norm();
  if (n <= 1e-12 * l.norm() || n == 0.0) {
    fail(ErrorCode::InvalidInput, "line at infinity: (l1, l2) vanishes");
  }
  // already unit to rounding error: keep the bits so stored lines round-trip
  if (std::abs(n - 1.0) < 16 * std::numeric_limits<double>::epsilon()) return l;
  return l / n;
}

ImageLine make_image_line(const Eigen::Vector3d& l, int camera,
                          std::optional<int> label, std::optional<int> pair) {
  ImageLine out;
  out.l = normalize_line(l);
  out.camera = camera;
  out.label = label;
  out.pair = pair;
  return out;
}

Cylinder3D make_cylinder(const Eigen::Vector3d& direction,
                         const Eigen::Vector3d& axis_point, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidInput, "cylinder radius must be > 0");
  const double n = direction.norm();
  if (n == 0.0) fail(ErrorCode::InvalidInput, "cylinder direction must be nonzero");
  Cylinder3D cyl;
  cyl.direction = direction / n;
  cyl.axis_point = axis_point - axis_point.dot(cyl.direction) * cyl.direction;
  cyl.radius = radius;
  return cyl;
}

Eigen::Matrix4d DualQuadricCylinder::envelope_matrix() const {
  const Vec6& d = cross_section.d;
  Eigen::Matrix4d rect = Eigen::Matrix4d::Zero();
  rect(0, 0) = d(0);
  rect(0, 2) = rect(2, 0) = d(1);
  rect(0, 3) = rect(3, 0) = d(2);
  rect(2, 2) = d(3);
  rect(2, 3) = rect(3, 2) = d(4);
  rect(3, 3) = d(5);
  Eigen::Matrix4d B = Eigen::Matrix4d::Identity();
  B.topLeftCorner<3, 3>() = r_align;
  return B.transpose() * rect * B;
}

Eigen::Matrix3d project_dual_quadric(const Camera& cam, const Eigen::Matrix4d& D) {
  const Eigen::Matrix3d m = cam.P * D * cam.P.transpose();
  return 0.5 * (m + m.transpose());
}

double direction_residual(const ImageLine& line, const Camera& cam,
                          const Eigen::Vector3d& w) {
  return line.l.dot(cam.rotation() * w);
}

Eigen::Matrix3d rotation_to_y_axis(const Eigen::Vector3d& w_in) {
  const Eigen::Vector3d w = w_in.normalized();
  const Eigen::Vector3d k = w.cross(Eigen::Vector3d::UnitY());
  const double s2 = k.squaredNorm();
  if (std::sqrt(s2) < 1e-8) {
    if (w.y() >= 0.0) return Eigen::Matrix3d::Identity();
    Eigen::Matrix3d half_turn_x = Eigen::Matrix3d::Identity();
    half_turn_x(1, 1) = -1.0;
    half_turn_x(2, 2) = -1.0;
    return half_turn_x;
  }
  const double c = w.y();
  Eigen::Matrix3d kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Eigen::Matrix3d::Identity() + kx + kx * kx * ((1.0 - c) / s2);
}

Eigen::Vector3d backproject_line_2d(const Eigen::Vector3d& l, const Camera& cam,
                                    const Eigen::Matrix3d& r_align,
                                    double direction_tol) {
  Eigen::Vector4d pi;
  pi.head<3>() = r_align * (cam.rotation().transpose() * l);
  pi(3) = cam.translation().dot(l);
  if (std::abs(pi(1)) > direction_tol * pi.norm()) {
    fail(ErrorCode::DirectionInconsistent,
         "backprojected plane not parallel to the axis: |pi2|/||Pi|| = " +
             std::to_string(std::abs(pi(1)) / pi.norm()));
  }
  return normalize_line(Eigen::Vector3d(pi(0), pi(2), pi(3)));
}

DualConic2D dual_conic_from_circle(const Circle2D& c) {
  DualConic2D out;
  const double r2 = c.r * c.r;
  out.d << r2 - c.tx * c.tx, -c.tx * c.ty, -c.tx, r2 - c.ty * c.ty, -c.ty, -1.0;
  return out;
}

Circle2D circle_from_dual_conic(const DualConic2D& dc) {
  const Vec6& d = dc.d;
  if (std::abs(d(5)) <= 1e-12 * d.norm()) {
    fail(ErrorCode::DegenerateConic, "d6 vanishes: circle center at infinity");
  }
  const Vec6 dn = d / (-d(5));
  const double tx = -dn(2);
  const double ty = -dn(4);
  const double r2 = dn(0) + dn(2) * dn(2);
  if (!(r2 > 0.0)) {
    fail(ErrorCode::ImaginaryRadius, "r^2 = " + std::to_string(r2) + " <= 0");
  }
  Circle2D c;
  c.tx = tx;
  c.ty = ty;
  c.r = std::sqrt(r2);
  return c;
}

Eigen::Vector2d manifold_residuals(const DualConic2D& dc) {
  const double n = dc.d.norm();
  if (n == 0.0) fail(ErrorCode::InvalidInput, "zero dual conic");
  const Vec6 d = dc.d / n;
  const double c1 = d(2) * d(4) - d(1) * d(5);
  const double c2 = d(4) * d(4) - d(2) * d(2) + d(0) * d(5) - d(3) * d(5);
  return {c1, c2};
}

bool on_manifold(const DualConic2D& d, double eps) {
  const Eigen::Vector2d c = manifold_residuals(d);
  return std::abs(c(0)) <= eps && std::abs(c(1)) <= eps;
}

double geometric_line_residual(const Eigen::Vector3d& line, const Circle2D& c) {
  const Eigen::Vector3d l = normalize_line(line);
  return std::abs(l(0) * c.tx + l(1) * c.ty + l(2)) - c.r;
}

double algebraic_residual(const Eigen::Vector3d& line, const DualConic2D& d) {
  const Eigen::Vector3d l = normalize_line(line);
  return l.dot(d.matrix() * l);
}

Cylinder3D lift_circle_to_cylinder(const Circle2D& c, const Eigen::Matrix3d& r_align) {
  const Eigen::Vector3d w = r_align.transpose() * Eigen::Vector3d::UnitY();
  const Eigen::Vector3d q = r_align.transpose() * Eigen::Vector3d(c.tx, 0.0, c.ty);
  return make_cylinder(w, q, c.r);
}

DualQuadricCylinder dual_quadric_from_cylinder(const Cylinder3D& cyl) {
  DualQuadricCylinder q;
  q.r_align = rotation_to_y_axis(cyl.direction);
  const Eigen::Vector3d c = q.r_align * cyl.axis_point;
  Circle2D circle;
  circle.tx = c.x();
  circle.ty = c.z();
  circle.r = cyl.radius;
  q.cross_section = dual_conic_from_circle(circle);
  return q;
}

Cylinder3D cylinder_from_dual_quadric(const DualQuadricCylinder& q) {
  return lift_circle_to_cylinder(circle_from_dual_conic(q.cross_section), q.r_align);
}

}  // namespace cyltri
