#include "cyltri/solvers.hpp"

#include "cyltri/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

namespace cyltri {

namespace {

constexpr double kRankTol = 1e-10;

// ---------------------------------------------------------------------------
// Small dense univariate polynomials, coefficient index = power of x.

using Poly1 = std::array<double, 5>;  // degree <= 4

Poly1 poly_mul(const Poly1& p, const Poly1& q) {
  Poly1 out{};
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j) out[i + j] += p[i] * q[j];
  return out;
}

Poly1 poly_axpy(double s, const Poly1& p, const Poly1& q) {  // s*p + q
  Poly1 out = q;
  for (int i = 0; i <= 4; ++i) out[i] += s * p[i];
  return out;
}

/// Real roots of sum_i coeffs[i] x^i via companion-matrix eigenvalues.
/// Near-zero leading coefficients are stripped relative to the largest one.
std::vector<double> real_poly_roots(const Poly1& coeffs) {
  double scale = 0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0) return {};
  int deg = 4;
  while (deg > 0 && std::abs(coeffs[deg]) <= 1e-12 * scale) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(0, i) = -coeffs[deg - 1 - i] / coeffs[deg];
  companion.block(1, 0, deg - 1, deg - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) return {};
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z.real()))) {
      roots.push_back(z.real());
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// ---------------------------------------------------------------------------
// Similarity normalization of a line set for conditioning: recenter on the
// point minimizing the summed squared line distances, rescale to unit RMS
// distance. Exactly equivariant, so solutions map back without error beyond
// roundoff.

struct Similarity {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double scale = 1.0;

  Circle2D restore(const Circle2D& c) const {
    return Circle2D{scale * c.tx + center(0), scale * c.ty + center(1),
                    scale * c.r};
  }
};

Similarity condition_lines(const std::vector<Eigen::Vector3d>& lines,
                           std::vector<Eigen::Vector3d>* out) {
  Similarity sim;
  Eigen::Matrix2d N = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (const auto& l : lines) {
    const Eigen::Vector2d n = l.head<2>();
    N += n * n.transpose();
    rhs -= l(2) * n;
  }
  if (std::abs(N.determinant()) > 1e-12 * N.trace() * N.trace()) {
    sim.center = N.ldlt().solve(rhs);
  }
  double ms = 0;
  for (const auto& l : lines) {
    const double delta = l.head<2>().dot(sim.center) + l(2);
    ms += delta * delta;
  }
  sim.scale = std::sqrt(ms / static_cast<double>(lines.size()));
  if (!(sim.scale > 1e-12)) sim.scale = 1.0;
  out->clear();
  for (const auto& l : lines) {
    const double c = (l.head<2>().dot(sim.center) + l(2)) / sim.scale;
    out->push_back(Eigen::Vector3d(l(0), l(1), c));
  }
  return sim;
}

// ---------------------------------------------------------------------------
// Bilinear forms of the two circle-manifold quadrics (0-based indices):
// form1(d, d) = d3 d5 - d2 d6, form2(d, d) = d5^2 - d3^2 + d1 d6 - d4 d6.

double manifold_form1(const Vec6& u, const Vec6& v) {
  return 0.5 * (u(2) * v(4) + u(4) * v(2) - u(1) * v(5) - u(5) * v(1));
}

double manifold_form2(const Vec6& u, const Vec6& v) {
  return u(4) * v(4) - u(2) * v(2) +
         0.5 * (u(0) * v(5) + u(5) * v(0) - u(3) * v(5) - u(5) * v(3));
}

Vec6 canonical_sign6(Vec6 v) {
  int imax = 0;
  for (int k = 1; k < 6; ++k) {
    if (std::abs(v(k)) > std::abs(v(imax))) imax = k;
  }
  if (v(imax) < 0) v = -v;
  return v;
}

// ---------------------------------------------------------------------------
// Bivariate quadratic pair: resultant elimination and root polishing.

double eval_quad(const Eigen::Matrix<double, 6, 1>& q, double x, double y) {
  return q(0) * x * x + q(1) * x * y + q(2) * y * y + q(3) * x + q(4) * y + q(5);
}

Eigen::Vector2d grad_quad(const Eigen::Matrix<double, 6, 1>& q, double x, double y) {
  return {2 * q(0) * x + q(1) * y + q(3), q(1) * x + 2 * q(2) * y + q(4)};
}

/// Coefficients of q viewed as a polynomial in y: q = py2 y^2 + py1(x) y + py0(x).
void y_coefficients(const Eigen::Matrix<double, 6, 1>& q, double* py2, Poly1* py1,
                    Poly1* py0) {
  *py2 = q(2);
  *py1 = Poly1{q(4), q(1), 0, 0, 0};
  *py0 = Poly1{q(5), q(3), q(0), 0, 0};
}

int effective_y_degree(const Eigen::Matrix<double, 6, 1>& q, double scale) {
  if (std::abs(q(2)) > 1e-12 * scale) return 2;
  if (std::max(std::abs(q(1)), std::abs(q(4))) > 1e-12 * scale) return 1;
  return 0;
}

bool polish_pair_root(const QuadraticPair& q, Eigen::Vector2d* p) {
  double best = std::hypot(eval_quad(q.q1, (*p)(0), (*p)(1)),
                           eval_quad(q.q2, (*p)(0), (*p)(1)));
  for (int it = 0; it < 3; ++it) {
    Eigen::Matrix2d J;
    J.row(0) = grad_quad(q.q1, (*p)(0), (*p)(1)).transpose();
    J.row(1) = grad_quad(q.q2, (*p)(0), (*p)(1)).transpose();
    const Eigen::Vector2d f(eval_quad(q.q1, (*p)(0), (*p)(1)),
                            eval_quad(q.q2, (*p)(0), (*p)(1)));
    if (std::abs(J.determinant()) < 1e-14 * (1.0 + J.cwiseAbs().maxCoeff())) break;
    const Eigen::Vector2d cand = *p - J.inverse() * f;
    const double res = std::hypot(eval_quad(q.q1, cand(0), cand(1)),
                                  eval_quad(q.q2, cand(0), cand(1)));
    if (res >= best) break;
    best = res;
    *p = cand;
  }
  return true;
}

std::vector<double> real_y_roots_at(const Eigen::Matrix<double, 6, 1>& q, double x) {
  // q(x, y) as univariate in y: q2 y^2 + (q1 x + q4) y + (q0 x^2 + q3 x + q5).
  Poly1 uni{q(0) * x * x + q(3) * x + q(5), q(1) * x + q(4), q(2), 0, 0};
  return real_poly_roots(uni);
}

std::vector<Eigen::Vector2d> quadratic_pair_roots(const QuadraticPair& q,
                                                  bool* resultant_deficient) {
  const double s1 = q.q1.cwiseAbs().maxCoeff();
  const double s2 = q.q2.cwiseAbs().maxCoeff();
  if (s1 == 0 || s2 == 0) {
    fail(ErrorCode::NonFiniteSolutionSet, "a quadratic vanishes identically");
  }
  const int deg1 = effective_y_degree(q.q1, s1);
  const int deg2 = effective_y_degree(q.q2, s2);
  if (resultant_deficient) *resultant_deficient = (deg1 != 2 || deg2 != 2);

  std::vector<double> xs;
  double res_scale = s1 * s2;
  Poly1 res{};
  bool have_resultant = false;

  if (deg1 == 0 && deg2 == 0) {
    // Two univariate polynomials in x; a common root makes y free.
    const std::vector<double> r1 = real_poly_roots(Poly1{q.q1(5), q.q1(3), q.q1(0), 0, 0});
    for (double x : r1) {
      if (std::abs(eval_quad(q.q2, x, 0)) <= 1e-8 * s2 * (1 + x * x)) {
        fail(ErrorCode::NonFiniteSolutionSet,
             "both quadratics independent of one variable");
      }
    }
    return {};
  }
  if (deg1 == 0 || deg2 == 0) {
    // One polynomial pins x on its own; the other supplies y.
    const auto& fixer = (deg1 == 0) ? q.q1 : q.q2;
    xs = real_poly_roots(Poly1{fixer(5), fixer(3), fixer(0), 0, 0});
  } else {
    double p2, r2;
    Poly1 p1, p0, r1, r0;
    y_coefficients(q.q1, &p2, &p1, &p0);
    y_coefficients(q.q2, &r2, &r1, &r0);
    if (deg1 == 2 && deg2 == 2) {
      const Poly1 t1 = poly_axpy(-r2, p0, Poly1{p2 * r0[0], p2 * r0[1], p2 * r0[2], 0, 0});
      const Poly1 t2 = poly_axpy(-r2, p1, Poly1{p2 * r1[0], p2 * r1[1], 0, 0, 0});
      const Poly1 t3 = poly_axpy(-1.0, poly_mul(r1, p0), poly_mul(p1, r0));
      res = poly_axpy(-1.0, poly_mul(t2, t3), poly_mul(t1, t1));
      res_scale = s1 * s1 * s2 * s2;
    } else if (deg1 == 2) {  // q2 linear in y
      res = poly_axpy(-1.0, poly_mul(p1, poly_mul(r1, r0)),
                      poly_axpy(p2, poly_mul(r0, r0), poly_mul(p0, poly_mul(r1, r1))));
      res_scale = s1 * s2 * s2;
    } else if (deg2 == 2) {  // q1 linear in y
      res = poly_axpy(-1.0, poly_mul(r1, poly_mul(p1, p0)),
                      poly_axpy(r2, poly_mul(p0, p0), poly_mul(r0, poly_mul(p1, p1))));
      res_scale = s1 * s1 * s2;
    } else {  // both linear in y
      res = poly_axpy(-1.0, poly_mul(r1, p0), poly_mul(p1, r0));
    }
    double rmax = 0;
    for (double c : res) rmax = std::max(rmax, std::abs(c));
    if (rmax <= 1e-13 * res_scale) {
      fail(ErrorCode::NonFiniteSolutionSet, "resultant vanishes identically");
    }
    if (resultant_deficient && std::abs(res[4]) <= 1e-10 * rmax) {
      *resultant_deficient = true;
    }
    xs = real_poly_roots(res);
    have_resultant = true;
  }
  (void)have_resultant;

  std::vector<Eigen::Vector2d> candidates;
  for (double x : xs) {
    for (double y : real_y_roots_at(q.q1, x)) candidates.push_back({x, y});
    for (double y : real_y_roots_at(q.q2, x)) candidates.push_back({x, y});
    if (deg1 >= 1 && deg2 >= 1) {
      // Linear elimination of y^2 between the two quadratics at fixed x.
      const double den = q.q2(2) * (q.q1(1) * x + q.q1(4)) -
                         q.q1(2) * (q.q2(1) * x + q.q2(4));
      const double num = q.q1(2) * (q.q2(0) * x * x + q.q2(3) * x + q.q2(5)) -
                         q.q2(2) * (q.q1(0) * x * x + q.q1(3) * x + q.q1(5));
      if (std::abs(den) > 1e-10 * (s1 + s2) * (1 + std::abs(x))) {
        candidates.push_back({x, num / den});
      }
    }
  }

  std::vector<Eigen::Vector2d> roots;
  std::vector<double> root_res;
  for (Eigen::Vector2d cand : candidates) {
    polish_pair_root(q, &cand);
    const double m = 1.0 + cand.squaredNorm();
    const double f1 = std::abs(eval_quad(q.q1, cand(0), cand(1)));
    const double f2 = std::abs(eval_quad(q.q2, cand(0), cand(1)));
    if (f1 > 1e-8 * s1 * m || f2 > 1e-8 * s2 * m) continue;
    bool dup = false;
    for (size_t i = 0; i < roots.size(); ++i) {
      if ((roots[i] - cand).norm() <= 1e-7 * (1.0 + cand.norm())) {
        if (f1 + f2 < root_res[i]) {
          roots[i] = cand;
          root_res[i] = f1 + f2;
        }
        dup = true;
        break;
      }
    }
    if (!dup) {
      roots.push_back(cand);
      root_res.push_back(f1 + f2);
    }
  }
  if (roots.size() > 4) {
    std::vector<size_t> order(roots.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return root_res[i] < root_res[j]; });
    std::vector<Eigen::Vector2d> kept;
    for (size_t k = 0; k < 4; ++k) kept.push_back(roots[order[k]]);
    roots = std::move(kept);
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return a(0) != b(0) ? a(0) < b(0) : a(1) < b(1);
  });
  return roots;
}

// ---------------------------------------------------------------------------
// Constrained least squares in circle coordinates p = (tx, ty, rho = r^2).
// Stationarity of sum_i (rho - delta_i^2)^2 with rho eliminated reduces to
// two bivariate cubics in (tx, ty); see the system residuals below.

struct LineData {
  Eigen::VectorXd a, b, c;
  int n = 0;
};

LineData pack_lines(const std::vector<Eigen::Vector3d>& lines) {
  LineData d;
  d.n = static_cast<int>(lines.size());
  d.a.resize(d.n);
  d.b.resize(d.n);
  d.c.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    d.a(i) = lines[i](0);
    d.b(i) = lines[i](1);
    d.c(i) = lines[i](2);
  }
  return d;
}

Eigen::Vector3d stationarity_residual(const LineData& d, const Eigen::Vector3d& p) {
  const Eigen::ArrayXd delta = (d.a * p(0) + d.b * p(1) + d.c).array();
  const Eigen::ArrayXd e = p(2) - delta.square();
  return {(e * d.a.array() * delta).sum(), (e * d.b.array() * delta).sum(), e.sum()};
}

Eigen::Matrix3d stationarity_jacobian(const LineData& d, const Eigen::Vector3d& p) {
  const Eigen::ArrayXd delta = (d.a * p(0) + d.b * p(1) + d.c).array();
  const Eigen::ArrayXd e = p(2) - delta.square();
  const Eigen::ArrayXd t = e - 2.0 * delta.square();
  const Eigen::ArrayXd a = d.a.array(), b = d.b.array();
  Eigen::Matrix3d J;
  J << (a * a * t).sum(), (a * b * t).sum(), (a * delta).sum(),
      (a * b * t).sum(), (b * b * t).sum(), (b * delta).sum(),
      -2.0 * (a * delta).sum(), -2.0 * (b * delta).sum(), double(d.n);
  return J;
}

double stationarity_scale(const LineData& d, const Eigen::Vector3d& p) {
  const Eigen::ArrayXd delta = (d.a * p(0) + d.b * p(1) + d.c).array();
  return std::max(1.0, ((std::abs(p(2)) + delta.square()) * (1.0 + delta.abs())).sum());
}

void polish_stationary(const LineData& d, Eigen::Vector3d* p, int iters) {
  double best = stationarity_residual(d, *p).norm();
  for (int it = 0; it < iters; ++it) {
    const Eigen::Matrix3d J = stationarity_jacobian(d, *p);
    const Eigen::Vector3d f = stationarity_residual(d, *p);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
    if (!lu.isInvertible()) break;
    Eigen::Vector3d step = lu.solve(f);
    bool accepted = false;
    for (int half = 0; half < 5 && !accepted; ++half) {
      const Eigen::Vector3d cand = *p - step;
      const double res = stationarity_residual(d, cand).norm();
      if (res < best) {
        best = res;
        *p = cand;
        accepted = true;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
}

/// Dense bivariate polynomial of total degree <= 3: c[i][j] * x^i y^j.
struct Poly2 {
  double c[4][4] = {};

  static Poly2 linear(double cx, double cy, double c0) {
    Poly2 p;
    p.c[1][0] = cx;
    p.c[0][1] = cy;
    p.c[0][0] = c0;
    return p;
  }
  Poly2 operator*(const Poly2& o) const {
    Poly2 out;
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; i + j <= 3; ++j)
        for (int k = 0; i + k <= 3; ++k)
          for (int l = 0; i + j + k + l <= 3; ++l)
            out.c[i + k][j + l] += c[i][j] * o.c[k][l];
    return out;
  }
  Poly2& axpy(double s, const Poly2& o) {
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 3; ++j) c[i][j] += s * o.c[i][j];
    return *this;
  }
};

/// The two reduced cubics G1 = sum e_i a_i delta_i, G2 = sum e_i b_i delta_i
/// with e_i = mean_j(delta_j^2) - delta_i^2, as coefficient tables.
void reduced_cubics(const LineData& d, Poly2* g1, Poly2* g2) {
  Poly2 s2;  // mean squared distance
  Poly2 u1, v1;
  *g1 = Poly2{};
  *g2 = Poly2{};
  for (int i = 0; i < d.n; ++i) {
    const Poly2 delta = Poly2::linear(d.a(i), d.b(i), d.c(i));
    s2.axpy(1.0 / d.n, delta * delta);
    u1.axpy(d.a(i), delta);
    v1.axpy(d.b(i), delta);
  }
  for (int i = 0; i < d.n; ++i) {
    const Poly2 delta = Poly2::linear(d.a(i), d.b(i), d.c(i));
    const Poly2 d3 = (delta * delta) * delta;
    g1->axpy(-d.a(i), d3);
    g2->axpy(-d.b(i), d3);
  }
  g1->axpy(1.0, u1 * s2);
  g2->axpy(1.0, v1 * s2);
}

/// Real x-roots of det(Sylvester_y(G1, G2))(x) via companion linearization of
/// the 6x6 cubic matrix polynomial into an 18x18 generalized eigenproblem.
std::vector<double> sylvester_roots(const Poly2& g1, const Poly2& g2) {
  // Entry (row of coefficients in y) as polynomials in x.
  auto ycoef = [](const Poly2& g, int k) {
    return Poly1{g.c[0][k], g.c[1][k], g.c[2][k], g.c[3][k], 0};
  };
  std::array<Poly1, 4> p, q;
  for (int k = 0; k <= 3; ++k) {
    p[k] = ycoef(g1, k);
    q[k] = ycoef(g2, k);
  }
  std::array<Eigen::Matrix<double, 6, 6>, 4> S;
  for (auto& m : S) m.setZero();
  for (int m = 0; m <= 3; ++m) {
    for (int shift = 0; shift < 3; ++shift) {
      for (int k = 0; k <= 3; ++k) {
        S[m](shift, shift + 3 - k) = p[k][m];
        S[m](3 + shift, shift + 3 - k) = q[k][m];
      }
    }
  }
  // Identically-zero determinant means a shared component: nothing to report.
  {
    double hadamard = 0, dets = 0;
    for (double x : {0.31, -0.77, 1.13, -1.87, 2.41}) {
      Eigen::Matrix<double, 6, 6> Sx = S[0] + x * S[1] + x * x * S[2] + x * x * x * S[3];
      double rowprod = 1;
      for (int r = 0; r < 6; ++r) rowprod *= std::max(Sx.row(r).norm(), 1e-300);
      hadamard = std::max(hadamard, rowprod);
      dets = std::max(dets, std::abs(Sx.determinant()));
    }
    if (dets <= 1e-10 * hadamard) return {};
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(18, 18);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(18, 18);
  A.block<6, 6>(0, 6).setIdentity();
  A.block<6, 6>(6, 12).setIdentity();
  A.block<6, 6>(12, 0) = -S[0];
  A.block<6, 6>(12, 6) = -S[1];
  A.block<6, 6>(12, 12) = -S[2];
  B.block<6, 6>(12, 12) = S[3];
  // QZ can fail to converge on badly scaled pencils, and GeneralizedEigenSolver
  // offers no safe failure report (its accessors require convergence), so run
  // RealQZ directly; an empty return routes the caller to its grid fallback.
  Eigen::RealQZ<Eigen::MatrixXd> qz(18);
  qz.compute(A, B, false);
  if (qz.info() != Eigen::Success) return {};
  const Eigen::MatrixXd& QS = qz.matrixS();
  const Eigen::MatrixXd& QT = qz.matrixT();
  std::vector<double> xs;
  const auto push_if_real = [&xs](const std::complex<double>& z) {
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real()))) return;
    if (std::abs(z.real()) > 1e8) return;
    xs.push_back(z.real());
  };
  for (int i = 0; i < 18;) {
    if (i == 17 || QS(i + 1, i) == 0.0) {
      const double alpha = QS(i, i), beta = QT(i, i);
      if (std::abs(beta) > 1e-12 * (1.0 + std::abs(alpha))) {
        push_if_real({alpha / beta, 0.0});
      }
      i += 1;
    } else {
      // 2x2 block: eigenvalue pair of det(QS - x QT) = 0 with QT upper
      // triangular. Usually conjugate; keep near-real roots as above.
      const double a = QT(i, i) * QT(i + 1, i + 1);
      const double b = -(QS(i, i) * QT(i + 1, i + 1) +
                         QS(i + 1, i + 1) * QT(i, i) -
                         QT(i, i + 1) * QS(i + 1, i));
      const double c = QS(i, i) * QS(i + 1, i + 1) - QS(i, i + 1) * QS(i + 1, i);
      const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
      if (scale > 0 && std::abs(a) > 1e-12 * scale) {
        const std::complex<double> disc =
            std::sqrt(std::complex<double>(b * b - 4.0 * a * c, 0.0));
        push_if_real((-b + disc) / (2.0 * a));
        push_if_real((-b - disc) / (2.0 * a));
      } else if (scale > 0 && std::abs(b) > 1e-12 * scale) {
        push_if_real({-c / b, 0.0});
      }
      i += 2;
    }
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

std::vector<double> cubic_y_roots_at(const Poly2& g, double x) {
  Poly1 uni{};
  for (int k = 0; k <= 3; ++k) {
    uni[k] = g.c[0][k] + x * (g.c[1][k] + x * (g.c[2][k] + x * g.c[3][k]));
  }
  return real_poly_roots(uni);
}

std::vector<Eigen::Vector3d> stationary_candidates(const LineData& d) {
  Poly2 g1, g2;
  reduced_cubics(d, &g1, &g2);
  std::vector<Eigen::Vector3d> cands;
  for (double x : sylvester_roots(g1, g2)) {
    std::vector<double> ys = cubic_y_roots_at(g1, x);
    const std::vector<double> ys2 = cubic_y_roots_at(g2, x);
    ys.insert(ys.end(), ys2.begin(), ys2.end());
    for (double y : ys) {
      const Eigen::ArrayXd delta = (d.a * x + d.b * y + d.c).array();
      Eigen::Vector3d p(x, y, delta.square().mean());
      polish_stationary(d, &p, 3);
      cands.push_back(p);
    }
  }
  if (cands.empty()) {
    // Symmetric line sets can make the two cubics share a factor with no real
    // zeros; the resultant then vanishes identically even though the real
    // roots stay isolated. A coarse Newton grid over the conditioned frame
    // recovers them (junk starts are removed by the stationarity filter).
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      for (double y : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const Eigen::ArrayXd delta = (d.a * x + d.b * y + d.c).array();
        Eigen::Vector3d p(x, y, delta.square().mean());
        polish_stationary(d, &p, 40);
        cands.push_back(p);
      }
    }
  }
  return cands;
}

void dedupe_points(std::vector<Eigen::Vector3d>* pts, const LineData& d) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& p : *pts) {
    bool dup = false;
    for (auto& kept : out) {
      const double tol = 1e-6 * (1.0 + kept.norm());
      if ((kept - p).norm() <= tol) {
        if (stationarity_residual(d, p).norm() <
            stationarity_residual(d, kept).norm()) {
          kept = p;
        }
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  *pts = std::move(out);
}

double circle_cost(const LineData& d, const Circle2D& c) {
  const Eigen::ArrayXd delta = (d.a * c.tx + d.b * c.ty + d.c).array();
  return (c.r * c.r - delta.square()).square().sum();
}

// ---------------------------------------------------------------------------
// Normalize every line to a unit normal, throwing InvalidInput for lines at
// infinity, and require a minimum count.

std::vector<Eigen::Vector3d> unit_normal_lines(const std::vector<Eigen::Vector3d>& in,
                                               size_t min_count, const char* who) {
  if (in.size() < min_count) {
    fail(ErrorCode::InvalidInput, std::string(who) + " needs >= " +
                                      std::to_string(min_count) + " lines");
  }
  std::vector<Eigen::Vector3d> out;
  out.reserve(in.size());
  for (const auto& l : in) out.push_back(normalize_line(l));
  return out;
}

bool all_parallel(const std::vector<Eigen::Vector3d>& lines) {
  for (size_t i = 1; i < lines.size(); ++i) {
    if (std::abs(lines[0](0) * lines[i](1) - lines[0](1) * lines[i](0)) > 1e-10) {
      return false;
    }
  }
  return true;
}

// Weighted accumulation of the tangency value r^T M(d) r as a polynomial in
// (d3, d4, d5) after substituting d1 = d5^2 - d3^2 + d4, d2 = -d3 d5, d6 = -1.
void add_weighted_tangency(TriPoly3* p, double w, double a, double b, double c) {
  auto at = [&](int i, int j, int k) -> double& {
    return p->coeff(TriPoly3::mono_index(i, j, k));
  };
  at(2, 0, 0) += -w * a * a;
  at(1, 0, 1) += -2 * w * a * b;
  at(0, 0, 2) += w * a * a;
  at(0, 1, 0) += w;
  at(1, 0, 0) += 2 * w * a * c;
  at(0, 0, 1) += 2 * w * b * c;
  at(0, 0, 0) += -w * c * c;
}

TriPoly3 shifted(const TriPoly3& p, int di, int dj, int dk) {
  TriPoly3 out;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) {
        const double v = p.coeff(TriPoly3::mono_index(i, j, k));
        if (v == 0) continue;
        if (i + di + j + dj + k + dk <= 3) {
          out.coeff(TriPoly3::mono_index(i + di, j + dj, k + dk)) += v;
        }
      }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TriPoly3

int TriPoly3::mono_index(int i, int j, int k) {
  static const auto table = [] {
    std::array<std::array<std::array<int, 4>, 4>, 4> t{};
    int idx = 0;
    for (int deg = 0; deg <= 3; ++deg)
      for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b) t[a][b][deg - a - b] = idx++;
    return t;
  }();
  return table[i][j][k];
}

double TriPoly3::eval(const Eigen::Vector3d& d345) const {
  double px[4], py[4], pz[4];
  px[0] = py[0] = pz[0] = 1.0;
  for (int t = 1; t <= 3; ++t) {
    px[t] = px[t - 1] * d345(0);
    py[t] = py[t - 1] * d345(1);
    pz[t] = pz[t - 1] * d345(2);
  }
  double v = 0;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) {
        v += coeff(mono_index(i, j, k)) * px[i] * py[j] * pz[k];
      }
  return v;
}

int TriPoly3::total_degree(double tol) const {
  const double maxabs = coeff.cwiseAbs().maxCoeff();
  if (maxabs == 0) return 0;
  int deg = 0;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) {
        if (std::abs(coeff(mono_index(i, j, k))) > tol * maxabs) {
          deg = std::max(deg, i + j + k);
        }
      }
  return deg;
}

// ---------------------------------------------------------------------------
// StationarySystem

Eigen::Vector4d StationarySystem::back_substitute(const Eigen::Vector3d& d345) const {
  return {d1_of.eval(d345), d2_of.eval(d345), lambda1_of.eval(d345),
          lambda2_of.eval(d345)};
}

Eigen::Vector3d StationarySystem::residuals(const Eigen::Vector3d& d345) const {
  return {grad_d3.eval(d345), grad_d4.eval(d345), grad_d5.eval(d345)};
}

// ---------------------------------------------------------------------------

const char* conic_class_name(ConicClass c) {
  switch (c) {
    case ConicClass::Circle: return "circle";
    case ConicClass::Ellipse: return "ellipse";
    case ConicClass::Hyperbola: return "hyperbola";
    case ConicClass::Parabola: return "parabola";
    case ConicClass::Degenerate: return "degenerate";
  }
  return "unknown";
}

Vec6 tangency_row(const Eigen::Vector3d& line) {
  const double a = line(0), b = line(1), c = line(2);
  Vec6 m;
  m << a * a, 2 * a * b, 2 * a * c, b * b, 2 * b * c, c * c;
  return m;
}

NullspaceBasis nullspace_parametrization(const Eigen::Vector3d& r1,
                                         const Eigen::Vector3d& r2,
                                         const Eigen::Vector3d& r3) {
  Eigen::Matrix<double, 3, 6> A;
  A.row(0) = tangency_row(normalize_line(r1)).transpose();
  A.row(1) = tangency_row(normalize_line(r2)).transpose();
  A.row(2) = tangency_row(normalize_line(r3)).transpose();
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(2) <= kRankTol * sv(0)) {
    fail(ErrorCode::DegenerateLines, "tangency system has rank < 3");
  }
  const Eigen::Matrix<double, 6, 3> null_basis = svd.matrixV().rightCols<3>();
  // Unit nullspace vector with maximal |d6|: normalized projection of e6.
  const Eigen::Vector3d w6 = null_basis.row(5).transpose();
  NullspaceBasis basis;
  if (w6.norm() > 1e-12) {
    basis.d_gamma = canonical_sign6((null_basis * w6).normalized());
  } else {
    // Every tangent conic has d6 = 0; any representative keeps the contract.
    basis.d_gamma = canonical_sign6(null_basis.col(0));
  }
  // Two remaining orthonormal directions, deterministically from the columns.
  std::array<Vec6, 2> rest;
  int found = 0;
  for (int i = 0; i < 3 && found < 2; ++i) {
    Vec6 u = null_basis.col(i) - (null_basis.col(i).dot(basis.d_gamma)) * basis.d_gamma;
    if (found == 1) u -= u.dot(rest[0]) * rest[0];
    if (u.norm() > 1e-6) rest[found++] = u.normalized();
  }
  basis.d_alpha = canonical_sign6(rest[0]);
  basis.d_beta = canonical_sign6(rest[1]);
  return basis;
}

QuadraticPair constraint_quadratics(const NullspaceBasis& basis) {
  const Vec6 &u = basis.d_alpha, &v = basis.d_beta, &g = basis.d_gamma;
  QuadraticPair q;
  q.q1 << manifold_form1(u, u), 2 * manifold_form1(u, v), manifold_form1(v, v),
      2 * manifold_form1(u, g), 2 * manifold_form1(v, g), manifold_form1(g, g);
  q.q2 << manifold_form2(u, u), 2 * manifold_form2(u, v), manifold_form2(v, v),
      2 * manifold_form2(u, g), 2 * manifold_form2(v, g), manifold_form2(g, g);
  return q;
}

std::vector<Eigen::Vector2d> solve_quadratic_pair(const QuadraticPair& q) {
  return quadratic_pair_roots(q, nullptr);
}

std::vector<Circle2D> solve_minimal_three_lines(const Eigen::Vector3d& r1,
                                                const Eigen::Vector3d& r2,
                                                const Eigen::Vector3d& r3) {
  const std::vector<Eigen::Vector3d> lines =
      unit_normal_lines({r1, r2, r3}, 3, "minimal solver");
  std::vector<Eigen::Vector3d> scaled;
  const Similarity sim = condition_lines(lines, &scaled);

  const NullspaceBasis basis =
      nullspace_parametrization(scaled[0], scaled[1], scaled[2]);
  std::vector<Vec6> duals;
  bool deficient = false;
  try {
    for (const auto& xy : quadratic_pair_roots(constraint_quadratics(basis),
                                               &deficient)) {
      duals.push_back(xy(0) * basis.d_alpha + xy(1) * basis.d_beta + basis.d_gamma);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteSolutionSet) throw;
    deficient = true;
  }
  if (deficient) {
    // Rotate the affine slice once so solutions near the old slice's infinity
    // become representable; keep the union of both attempts.
    const double ct = std::cos(0.35), st = std::sin(0.35);
    NullspaceBasis rot;
    rot.d_gamma =
        (ct * basis.d_gamma + st * (0.6 * basis.d_alpha + 0.8 * basis.d_beta))
            .normalized();
    const Vec6 u = basis.d_alpha - basis.d_alpha.dot(rot.d_gamma) * rot.d_gamma;
    rot.d_alpha = u.normalized();
    Vec6 v = basis.d_beta - basis.d_beta.dot(rot.d_gamma) * rot.d_gamma;
    v -= v.dot(rot.d_alpha) * rot.d_alpha;
    rot.d_beta = v.normalized();
    try {
      for (const auto& xy : quadratic_pair_roots(constraint_quadratics(rot),
                                                 nullptr)) {
        duals.push_back(xy(0) * rot.d_alpha + xy(1) * rot.d_beta + rot.d_gamma);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteSolutionSet) throw;
    }
  }

  std::vector<Circle2D> circles;
  const double res_tol = 1e-8 * std::max(1.0, sim.scale);
  for (const Vec6& d : duals) {
    Circle2D c;
    try {
      c = circle_from_dual_conic(DualConic2D{d});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateConic ||
          e.code() == ErrorCode::ImaginaryRadius) {
        continue;
      }
      throw;
    }
    c = sim.restore(c);
    // Exact tangency re-solve: with the sign pattern fixed, tangency to three
    // lines is linear in (tx, ty, r).
    {
      Eigen::Matrix3d M;
      Eigen::Vector3d rhs;
      for (int i = 0; i < 3; ++i) {
        const double sgn =
            (lines[i].head<2>().dot(Eigen::Vector2d(c.tx, c.ty)) + lines[i](2)) >= 0
                ? 1.0
                : -1.0;
        M.row(i) << lines[i](0), lines[i](1), -sgn;
        rhs(i) = -lines[i](2);
      }
      Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
      if (lu.isInvertible()) {
        const Eigen::Vector3d sol = lu.solve(rhs);
        if (sol(2) > 0) {
          const Circle2D refined{sol(0), sol(1), sol(2)};
          double worst_old = 0, worst_new = 0;
          for (int i = 0; i < 3; ++i) {
            worst_old = std::max(worst_old,
                                 std::abs(geometric_line_residual(lines[i], c)));
            worst_new = std::max(
                worst_new, std::abs(geometric_line_residual(lines[i], refined)));
          }
          if (worst_new < worst_old) c = refined;
        }
      }
    }
    bool tangent = true;
    for (int i = 0; i < 3 && tangent; ++i) {
      tangent = std::abs(geometric_line_residual(lines[i], c)) <= res_tol;
    }
    if (!tangent) continue;
    bool dup = false;
    for (const auto& k : circles) {
      const double tol =
          1e-7 * (1.0 + std::abs(k.tx) + std::abs(k.ty) + k.r);
      if (std::abs(k.tx - c.tx) <= tol && std::abs(k.ty - c.ty) <= tol &&
          std::abs(k.r - c.r) <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) circles.push_back(c);
  }
  if (circles.empty()) {
    fail(ErrorCode::NoRealCircle, "no real tangent circle for the three lines");
  }
  std::sort(circles.begin(), circles.end(), [](const Circle2D& a, const Circle2D& b) {
    if (a.tx != b.tx) return a.tx < b.tx;
    if (a.ty != b.ty) return a.ty < b.ty;
    return a.r < b.r;
  });
  if (circles.size() > 4) circles.resize(4);
  return circles;
}

StationarySystem build_stationary_system(const std::vector<Eigen::Vector3d>& raw) {
  const std::vector<Eigen::Vector3d> lines =
      unit_normal_lines(raw, 4, "least-squares fit");
  if (all_parallel(lines)) {
    fail(ErrorCode::EliminationSingular,
         "all lines parallel: center unconstrained along them");
  }
  StationarySystem s;
  TriPoly3 sum_e, sum_aae, sum_abe, sum_ace, sum_bce;
  for (const auto& l : lines) {
    const double a = l(0), b = l(1), c = l(2);
    add_weighted_tangency(&sum_e, 1.0, a, b, c);
    add_weighted_tangency(&sum_aae, a * a, a, b, c);
    add_weighted_tangency(&sum_abe, a * b, a, b, c);
    add_weighted_tangency(&sum_ace, a * c, a, b, c);
    add_weighted_tangency(&sum_bce, b * c, a, b, c);
  }
  s.lambda2_of.coeff = 2.0 * sum_aae.coeff;
  s.lambda1_of.coeff = -4.0 * sum_abe.coeff;
  s.grad_d4.coeff = 2.0 * sum_e.coeff;
  s.grad_d3.coeff = 4.0 * sum_ace.coeff +
                    shifted(s.lambda1_of, 0, 0, 1).coeff -
                    2.0 * shifted(s.lambda2_of, 1, 0, 0).coeff;
  s.grad_d5.coeff = 4.0 * sum_bce.coeff + shifted(s.lambda1_of, 1, 0, 0).coeff +
                    2.0 * shifted(s.lambda2_of, 0, 0, 1).coeff;
  s.d1_of.coeff(TriPoly3::mono_index(0, 1, 0)) = 1.0;
  s.d1_of.coeff(TriPoly3::mono_index(0, 0, 2)) = 1.0;
  s.d1_of.coeff(TriPoly3::mono_index(2, 0, 0)) = -1.0;
  s.d2_of.coeff(TriPoly3::mono_index(1, 0, 1)) = -1.0;
  return s;
}

ConstrainedLsqResult solve_constrained_lsq(const std::vector<Eigen::Vector3d>& raw) {
  const std::vector<Eigen::Vector3d> lines =
      unit_normal_lines(raw, 4, "least-squares fit");
  if (all_parallel(lines)) {
    fail(ErrorCode::EliminationSingular,
         "all lines parallel: center unconstrained along them");
  }
  std::vector<Eigen::Vector3d> scaled;
  const Similarity sim = condition_lines(lines, &scaled);
  const LineData data = pack_lines(scaled);

  std::vector<Eigen::Vector3d> cands = stationary_candidates(data);
  if (cands.empty()) {
    // Retry with the coordinate roles swapped in case the hidden variable was
    // unlucky (identically singular resultant in that direction).
    std::vector<Eigen::Vector3d> swapped;
    for (const auto& l : scaled) swapped.push_back({l(1), l(0), l(2)});
    for (const auto& p : stationary_candidates(pack_lines(swapped))) {
      cands.push_back({p(1), p(0), p(2)});
    }
  }
  dedupe_points(&cands, data);

  // Map to the original frame, re-polish there, and keep true stationary points.
  const LineData orig = pack_lines(lines);
  std::vector<Eigen::Vector3d> points;
  for (const auto& p : cands) {
    Eigen::Vector3d q(sim.scale * p(0) + sim.center(0),
                      sim.scale * p(1) + sim.center(1),
                      sim.scale * sim.scale * p(2));
    polish_stationary(orig, &q, 3);
    const double res = stationarity_residual(orig, q).norm();
    if (res <= 1e-8 * stationarity_scale(orig, q)) points.push_back(q);
  }
  dedupe_points(&points, orig);

  ConstrainedLsqResult result;
  for (const auto& p : points) {
    if (!(p(2) > 0)) continue;  // imaginary radius
    const Circle2D c{p(0), p(1), std::sqrt(p(2))};
    result.stationary.push_back(c);
    result.costs.push_back(circle_cost(orig, c));
  }
  if (result.stationary.empty()) {
    fail(ErrorCode::NoRealCircle, "no real stationary circle");
  }
  std::vector<size_t> order(result.stationary.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    if (result.costs[i] != result.costs[j]) return result.costs[i] < result.costs[j];
    const Circle2D &a = result.stationary[i], &b = result.stationary[j];
    if (a.tx != b.tx) return a.tx < b.tx;
    if (a.ty != b.ty) return a.ty < b.ty;
    return a.r < b.r;
  });
  if (order.size() > 9) order.resize(9);
  ConstrainedLsqResult sorted;
  for (size_t k : order) {
    sorted.stationary.push_back(result.stationary[k]);
    sorted.costs.push_back(result.costs[k]);
  }
  sorted.best = sorted.stationary.front();
  return sorted;
}

DualConic2D solve_linear_conic(const std::vector<Eigen::Vector3d>& raw) {
  if (raw.size() < 5) {
    fail(ErrorCode::RankDeficient, "linear fit needs >= 5 independent lines");
  }
  Eigen::MatrixXd A(raw.size(), 6);
  for (size_t i = 0; i < raw.size(); ++i) {
    const Eigen::Vector3d l = normalize_line(raw[i]);  // validates the line
    A.row(i) = tangency_row(l / l.norm()).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(4) <= kRankTol * sv(0)) {
    fail(ErrorCode::RankDeficient, "tangency system rank < 5");
  }
  Vec6 d = svd.matrixV().col(5);
  if (std::abs(d(5)) > 1e-14) {
    if (d(5) > 0) d = -d;
  } else {
    d = canonical_sign6(d);
  }
  return DualConic2D{d};
}

ConicClass classify_conic(const DualConic2D& dc) {
  const double norm = dc.d.norm();
  if (norm == 0) fail(ErrorCode::InvalidInput, "zero conic");
  const Eigen::Matrix3d M = dc.matrix();
  if (std::abs(M.determinant()) < 1e-12 * norm * norm * norm) {
    return ConicClass::Degenerate;
  }
  // Adjugate: the point conic up to scale.
  Eigen::Matrix3d adj;
  adj << M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1),
      M(0, 2) * M(2, 1) - M(0, 1) * M(2, 2),
      M(0, 1) * M(1, 2) - M(0, 2) * M(1, 1),
      M(1, 2) * M(2, 0) - M(1, 0) * M(2, 2),
      M(0, 0) * M(2, 2) - M(0, 2) * M(2, 0),
      M(0, 2) * M(1, 0) - M(0, 0) * M(1, 2),
      M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0),
      M(0, 1) * M(2, 0) - M(0, 0) * M(2, 1),
      M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  const double minor = adj(0, 0) * adj(1, 1) - adj(0, 1) * adj(1, 0);
  const double scale = adj.norm();
  if (std::abs(minor) <= 1e-10 * scale * scale) return ConicClass::Parabola;
  if (minor < 0) return ConicClass::Hyperbola;
  if (on_manifold(dc, 1e-8)) {
    try {
      circle_from_dual_conic(dc);
      return ConicClass::Circle;
    } catch (const Error&) {
      // imaginary or degenerate circle: fall through to the ellipse family
    }
  }
  return ConicClass::Ellipse;
}

}  // namespace cyltri
