#pragma once

#include "cyltri/types.hpp"

#include <vector>

namespace cyltri {

/// Row of the linear tangency system for a 2D line (a, b, c):
/// (a^2, 2ab, 2ac, b^2, 2bc, c^2), so that row . d = r^T M(d) r.
Vec6 tangency_row(const Eigen::Vector3d& line);

/// Affine parametrization d = x * d_alpha + y * d_beta + d_gamma of the
/// solutions of three homogeneous tangency equations.
struct NullspaceBasis {
  Vec6 d_alpha = Vec6::Zero();
  Vec6 d_beta = Vec6::Zero();
  Vec6 d_gamma = Vec6::Zero();
};

/// Two bivariate quadratics, coefficients ordered (x^2, xy, y^2, x, y, 1).
struct QuadraticPair {
  Eigen::Matrix<double, 6, 1> q1 = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 1> q2 = Eigen::Matrix<double, 6, 1>::Zero();
};

/// Dense trivariate polynomial of total degree <= 3 in (d3, d4, d5).
struct TriPoly3 {
  // coeff(mono_index(i,j,k)) multiplies d3^i d4^j d5^k.
  Eigen::Matrix<double, 20, 1> coeff = Eigen::Matrix<double, 20, 1>::Zero();

  static int mono_index(int i, int j, int k);
  double eval(const Eigen::Vector3d& d345) const;
  /// Largest total degree whose coefficients exceed tol * max|coeff|.
  int total_degree(double tol = 1e-12) const;
};

/// The tangency least-squares stationarity conditions in the d6 = -1 gauge,
/// after the four equations linear in (d1, d2, lambda1, lambda2) have been
/// eliminated: three polynomials in (d3, d4, d5) plus the back-substitution
/// recovering the eliminated unknowns.
struct StationarySystem {
  TriPoly3 grad_d3;  // total degree 3
  TriPoly3 grad_d4;  // total degree 2
  TriPoly3 grad_d5;  // total degree 3
  TriPoly3 d1_of, d2_of, lambda1_of, lambda2_of;  // degree <= 2 each

  /// (d1, d2, lambda1, lambda2) at a point of the reduced system.
  Eigen::Vector4d back_substitute(const Eigen::Vector3d& d345) const;
  /// Values of (grad_d3, grad_d4, grad_d5) at a point.
  Eigen::Vector3d residuals(const Eigen::Vector3d& d345) const;
};

enum class ConicClass { Circle, Ellipse, Hyperbola, Parabola, Degenerate };

const char* conic_class_name(ConicClass c);

/// Basis of all dual conics tangent to three lines. d_gamma is the unit
/// nullspace vector with the largest attainable |d6|; d_alpha and d_beta
/// complete an orthonormal basis and have zero d6 component, so the affine
/// slice covers every solution except the d6 = 0 degenerate ones.
/// Throws DegenerateLines when the tangency system has rank < 3.
NullspaceBasis nullspace_parametrization(const Eigen::Vector3d& r1,
                                         const Eigen::Vector3d& r2,
                                         const Eigen::Vector3d& r3);

/// Both circle-manifold constraints restricted to the affine slice of a
/// nullspace basis, as quadratics in the slice coordinates (x, y).
QuadraticPair constraint_quadratics(const NullspaceBasis& basis);

/// All real common roots of a bivariate quadratic pair (at most four),
/// via resultant elimination to a univariate polynomial solved by
/// companion-matrix eigenvalues, then Newton-polished. Roots are sorted
/// lexicographically. Throws NonFiniteSolutionSet when the resultant
/// vanishes identically.
std::vector<Eigen::Vector2d> solve_quadratic_pair(const QuadraticPair& q);

/// All circles tangent to three pairwise-distinct lines (at most four),
/// sorted by (tx, ty, r). Throws DegenerateLines for a rank-deficient
/// tangency system and NoRealCircle when no real circle survives.
std::vector<Circle2D> solve_minimal_three_lines(const Eigen::Vector3d& r1,
                                                const Eigen::Vector3d& r2,
                                                const Eigen::Vector3d& r3);

/// Reduces stationarity of sum_i (r_i^T M(d) r_i)^2 over the circle manifold
/// (d6 = -1) to three polynomials in (d3, d4, d5). Lines are renormalized to
/// unit normal. Throws EliminationSingular when all lines are parallel and
/// InvalidInput for fewer than 4 lines.
StationarySystem build_stationary_system(const std::vector<Eigen::Vector3d>& lines);

struct ConstrainedLsqResult {
  Circle2D best;
  std::vector<Circle2D> stationary;  // every real stationary circle, <= 9
  std::vector<double> costs;         // tangency cost per stationary circle
};

/// Global constrained least-squares circle fit: finds all real stationary
/// points of the reduced system (at most nine), maps them to circles, and
/// returns the one of minimum tangency cost in the d6 = -1 gauge.
/// Throws NoRealCircle when every stationary point is imaginary.
ConstrainedLsqResult solve_constrained_lsq(const std::vector<Eigen::Vector3d>& lines);

/// Unconstrained linear baseline: smallest right singular vector of the
/// stacked tangency rows (each line scaled to unit Euclidean norm first).
/// Not restricted to circles. Throws RankDeficient when rank < 5.
DualConic2D solve_linear_conic(const std::vector<Eigen::Vector3d>& lines);

/// Classifies a dual conic by its adjugate point conic: sign of the leading
/// 2x2 minor determinant (positive: ellipse family, negative: hyperbola,
/// near zero: parabola); the circle label additionally requires circle
/// manifold residuals < 1e-8 and a real radius.
ConicClass classify_conic(const DualConic2D& d);

}  // namespace cyltri
