#pragma once

#include "cyltri/types.hpp"

namespace cyltri {

/// Projects a 4x4 quadric envelope to the image dual conic P * D * P^T.
Eigen::Matrix3d project_dual_quadric(const Camera& cam, const Eigen::Matrix4d& D);

/// Axis-direction constraint residual l^T R w (zero for silhouette lines of
/// a cylinder with axis direction w).
double direction_residual(const ImageLine& line, const Camera& cam,
                          const Eigen::Vector3d& w);

/// Rotation taking w to (0,1,0). Rodrigues about w x (0,1,0); near the poles
/// (cross norm < 1e-8) returns identity (+y) or a half turn about x (-y).
Eigen::Matrix3d rotation_to_y_axis(const Eigen::Vector3d& w);

/// Backprojects an image line to the rectified y=0 plane. The plane
/// Pi = P'^T l of the axis-aligned camera P' = [R R_align^T | t] must have
/// |pi2| <= direction_tol * ||Pi||, else DirectionInconsistent. Returns the
/// 2D line (pi1, pi3, pi4) normalized.
Eigen::Vector3d backproject_line_2d(const Eigen::Vector3d& l, const Camera& cam,
                                    const Eigen::Matrix3d& r_align,
                                    double direction_tol = 1e-6);

/// Dual conic of a circle, in the d6 = -1 gauge.
DualConic2D dual_conic_from_circle(const Circle2D& c);

/// Inverse of dual_conic_from_circle. Throws DegenerateConic when
/// |d6| <= 1e-12 ||d||, ImaginaryRadius when r^2 <= 0.
Circle2D circle_from_dual_conic(const DualConic2D& d);

/// Circle-manifold constraint values (c1, c2) evaluated on d normalized to
/// unit norm: c1 = d3 d5 - d2 d6, c2 = d5^2 - d3^2 + d1 d6 - d4 d6.
Eigen::Vector2d manifold_residuals(const DualConic2D& d);

/// True when both manifold residuals of the normalized d are within eps.
bool on_manifold(const DualConic2D& d, double eps = 1e-8);

/// Signed tangency defect |l1 tx + l2 ty + l3| - r in scene units. The line
/// is renormalized, so the value is invariant to its scale.
double geometric_line_residual(const Eigen::Vector3d& line, const Circle2D& c);

/// Tangency residual r^T d r (homogeneous of degree 2 in d; the line is
/// renormalized to unit normal).
double algebraic_residual(const Eigen::Vector3d& line, const DualConic2D& d);

/// Lifts a rectified-plane circle back to a world cylinder:
/// w = R_align^T (0,1,0), axis point = projection of R_align^T (tx, 0, ty)
/// onto the plane orthogonal to w.
Cylinder3D lift_circle_to_cylinder(const Circle2D& c, const Eigen::Matrix3d& r_align);

/// Envelope representation of a cylinder (aligning rotation + cross-section).
DualQuadricCylinder dual_quadric_from_cylinder(const Cylinder3D& cyl);

/// Inverse of dual_quadric_from_cylinder.
Cylinder3D cylinder_from_dual_quadric(const DualQuadricCylinder& q);

}  // namespace cyltri
