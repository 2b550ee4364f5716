#include "doctest.h"

#include "cyltri/geometry.hpp"
#include "cyltri/solvers.hpp"
#include "support/oracle.hpp"
#include "support/test_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cyltri;
using namespace cyltri::testing;

namespace {

double eval_pair_poly(const Eigen::Matrix<double, 6, 1>& q, double x, double y) {
  return q(0) * x * x + q(1) * x * y + q(2) * y * y + q(3) * x + q(4) * y + q(5);
}

/// Grid-seeded Newton root finder for a bivariate quadratic pair, independent
/// of the resultant-based implementation.
std::vector<Eigen::Vector2d> grid_newton_roots(const QuadraticPair& q, double reach) {
  std::vector<Eigen::Vector2d> roots;
  const double s1 = q.q1.cwiseAbs().maxCoeff();
  const double s2 = q.q2.cwiseAbs().maxCoeff();
  for (double x0 = -reach; x0 <= reach; x0 += reach / 25.0) {
    for (double y0 = -reach; y0 <= reach; y0 += reach / 25.0) {
      Eigen::Vector2d p(x0, y0);
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const Eigen::Vector2d f(eval_pair_poly(q.q1, p(0), p(1)),
                                eval_pair_poly(q.q2, p(0), p(1)));
        Eigen::Matrix2d J;
        J << 2 * q.q1(0) * p(0) + q.q1(1) * p(1) + q.q1(3),
            q.q1(1) * p(0) + 2 * q.q1(2) * p(1) + q.q1(4),
            2 * q.q2(0) * p(0) + q.q2(1) * p(1) + q.q2(3),
            q.q2(1) * p(0) + 2 * q.q2(2) * p(1) + q.q2(4);
        if (std::abs(J.determinant()) < 1e-13) break;
        const Eigen::Vector2d step = J.inverse() * f;
        p -= step;
        if (!p.allFinite() || p.norm() > 1e6) break;
        if (step.norm() < 1e-14 * (1 + p.norm())) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const double m = 1 + p.squaredNorm();
      if (std::abs(eval_pair_poly(q.q1, p(0), p(1))) > 1e-9 * s1 * m) continue;
      if (std::abs(eval_pair_poly(q.q2, p(0), p(1))) > 1e-9 * s2 * m) continue;
      bool dup = false;
      for (const auto& r : roots) {
        if ((r - p).norm() < 1e-6 * (1 + p.norm())) {
          dup = true;
          break;
        }
      }
      if (!dup) roots.push_back(p);
    }
  }
  return roots;
}

double hausdorff(const std::vector<Eigen::Vector2d>& a,
                 const std::vector<Eigen::Vector2d>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return 1e9;
  double h = 0;
  for (const auto& p : a) {
    double best = 1e9;
    for (const auto& r : b) best = std::min(best, (p - r).norm());
    h = std::max(h, best);
  }
  for (const auto& r : b) {
    double best = 1e9;
    for (const auto& p : a) best = std::min(best, (p - r).norm());
    h = std::max(h, best);
  }
  return h;
}

bool contains_circle(const std::vector<Circle2D>& set, const Circle2D& c,
                     double tol) {
  return std::any_of(set.begin(), set.end(), [&](const Circle2D& k) {
    return std::abs(k.tx - c.tx) <= tol && std::abs(k.ty - c.ty) <= tol &&
           std::abs(k.r - c.r) <= tol;
  });
}

}  // namespace

TEST_CASE("tangency row matches the quadratic form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector3d l(u(rng), u(rng), u(rng));
    Vec6 d;
    d << u(rng), u(rng), u(rng), u(rng), u(rng), u(rng);
    const DualConic2D dc{d};
    CHECK(tangency_row(l).dot(d) ==
          doctest::Approx((l.transpose() * dc.matrix() * l)(0)).epsilon(1e-12));
  }
}

TEST_CASE("nullspace basis spans the tangent conics of three lines") {
  const Eigen::Vector3d r1(1, 0, -1), r2(1, 0, 1), r3(0, 1, -1);
  const NullspaceBasis basis = nullspace_parametrization(r1, r2, r3);
  for (const Vec6& v : {basis.d_alpha, basis.d_beta, basis.d_gamma}) {
    for (const auto& l : {r1, r2, r3}) {
      CHECK(std::abs(tangency_row(l).dot(v)) < 1e-10);
    }
  }
  // The unit-circle dual conic is a tangent conic, so it must lie in the span.
  Vec6 d_unit;
  d_unit << 1, 0, 0, 1, 0, -1;
  Vec6 proj = basis.d_alpha * basis.d_alpha.dot(d_unit) +
              basis.d_beta * basis.d_beta.dot(d_unit) +
              basis.d_gamma * basis.d_gamma.dot(d_unit);
  CHECK((proj - d_unit).norm() < 1e-12);
  // Slice orientation: the affine representative keeps the largest |d6|.
  CHECK(std::abs(basis.d_alpha(5)) < 1e-12);
  CHECK(std::abs(basis.d_beta(5)) < 1e-12);
  CHECK(std::abs(basis.d_gamma(5)) > 0.1);
}

TEST_CASE("nullspace basis rejects repeated lines") {
  try {
    nullspace_parametrization({1, 0, -1}, {1, 0, -1}, {0, 1, -1});
    CHECK_MESSAGE(false, "expected DegenerateLines");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateLines);
  }
}

TEST_CASE("nullspace basis satisfies the tangency equations for random lines") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d r1(u(rng), u(rng), u(rng));
    const Eigen::Vector3d r2(u(rng), u(rng), u(rng));
    const Eigen::Vector3d r3(u(rng), u(rng), u(rng));
    if (r1.head<2>().norm() < 0.2 || r2.head<2>().norm() < 0.2 ||
        r3.head<2>().norm() < 0.2) {
      continue;
    }
    NullspaceBasis basis;
    try {
      basis = nullspace_parametrization(r1, r2, r3);
    } catch (const Error&) {
      continue;
    }
    for (const Vec6& v : {basis.d_alpha, basis.d_beta, basis.d_gamma}) {
      CHECK(std::abs(v.norm() - 1.0) < 1e-12);
      for (const auto& l : {r1, r2, r3}) {
        CHECK(std::abs(tangency_row(normalize_line(l)).dot(v)) < 1e-10);
      }
    }
  }
}

TEST_CASE("quadratic pair: circle and line") {
  QuadraticPair q;
  q.q1 << 1, 0, 1, 0, 0, -1;  // x^2 + y^2 - 1
  q.q2 << 0, 0, 0, 1, -1, 0;  // x - y
  const auto roots = solve_quadratic_pair(q);
  REQUIRE(roots.size() == 2);
  const double s = std::sqrt(2.0) / 2.0;
  CHECK((roots[0] - Eigen::Vector2d(-s, -s)).norm() < 1e-12);
  CHECK((roots[1] - Eigen::Vector2d(s, s)).norm() < 1e-12);
}

TEST_CASE("quadratic pair: empty real intersection") {
  QuadraticPair q;
  q.q1 << 1, 0, 1, 0, 0, 1;  // x^2 + y^2 + 1
  q.q2 << 0, 0, 0, 1, -1, 0;
  CHECK(solve_quadratic_pair(q).empty());
}

TEST_CASE("quadratic pair: identically zero resultant") {
  QuadraticPair q;
  q.q1 << 1, 0, 1, 0, 0, -1;
  q.q2 << 2, 0, 2, 0, 0, -2;  // same conic, scaled
  try {
    solve_quadratic_pair(q);
    CHECK_MESSAGE(false, "expected NonFiniteSolutionSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteSolutionSet);
  }
}

TEST_CASE("quadratic pair matches the grid-seeded Newton oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  while (tested < 200) {
    QuadraticPair q;
    for (int i = 0; i < 6; ++i) {
      q.q1(i) = u(rng);
      q.q2(i) = u(rng);
    }
    std::vector<Eigen::Vector2d> mine;
    try {
      mine = solve_quadratic_pair(q);
    } catch (const Error&) {
      continue;
    }
    // Keep instances whose roots are well inside the oracle grid and
    // well-conditioned, so the oracle is trustworthy.
    const auto ref = grid_newton_roots(q, 8.0);
    bool usable = true;
    for (const auto& r : ref) usable = usable && r.norm() < 6.0;
    for (const auto& r : mine) usable = usable && r.norm() < 6.0;
    if (!usable) continue;
    ++tested;
    CHECK(hausdorff(mine, ref) < 1e-6);
  }
}

TEST_CASE("minimal solver: two vertical tangents and one horizontal") {
  const auto circles =
      solve_minimal_three_lines({1, 0, -1}, {1, 0, 1}, {0, 1, -1});
  REQUIRE(circles.size() == 2);
  CHECK(std::abs(circles[0].tx) < 1e-9);
  CHECK(std::abs(circles[0].ty) < 1e-9);
  CHECK(std::abs(circles[0].r - 1) < 1e-9);
  CHECK(std::abs(circles[1].tx) < 1e-9);
  CHECK(std::abs(circles[1].ty - 2) < 1e-9);
  CHECK(std::abs(circles[1].r - 1) < 1e-9);
}

TEST_CASE("minimal solver: right isoceles triangle") {
  const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), hyp(1, 1, -2);
  const auto circles = solve_minimal_three_lines(e1, e2, hyp);
  for (const auto& c : circles) {
    for (const auto& l : {e1, e2, hyp}) {
      CHECK(std::abs(geometric_line_residual(l, c)) < 1e-10);
    }
  }
  const double in_r = 2.0 - std::sqrt(2.0);
  CHECK(contains_circle(circles, Circle2D{in_r, in_r, in_r}, 1e-9));
  // Inscribed plus the three escribed circles.
  CHECK(circles.size() == 4);
  const double ex = 2.0 + std::sqrt(2.0);
  CHECK(contains_circle(circles, Circle2D{ex, ex, ex}, 1e-9));
  const double s2 = std::sqrt(2.0);
  CHECK(contains_circle(circles, Circle2D{-s2, s2, s2}, 1e-9));
  CHECK(contains_circle(circles, Circle2D{s2, -s2, s2}, 1e-9));
}

TEST_CASE("minimal solver: constructed tangents always contain the truth") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> ur(0.2, 2.0);
  std::uniform_real_distribution<double> ua(0.0, 2 * M_PI);
  int done = 0;
  while (done < 2000) {
    const Circle2D truth{u(rng), u(rng), ur(rng)};
    const double a1 = ua(rng), a2 = ua(rng), a3 = ua(rng);
    // Keep tangent directions separated to avoid near-degenerate triples.
    auto gap = [](double x, double y) {
      double d = std::abs(std::remainder(x - y, 2 * M_PI));
      return std::min(d, M_PI - std::abs(d - M_PI));
    };
    if (gap(a1, a2) < 0.15 || gap(a1, a3) < 0.15 || gap(a2, a3) < 0.15) continue;
    ++done;
    const auto circles = solve_minimal_three_lines(
        tangent_line(truth, a1), tangent_line(truth, a2), tangent_line(truth, a3));
    CHECK(circles.size() <= 4);
    CHECK(contains_circle(circles, truth, 1e-8));
    for (const auto& c : circles) {
      for (double a : {a1, a2, a3}) {
        CHECK(std::abs(geometric_line_residual(tangent_line(truth, a), c)) < 1e-8);
      }
    }
  }
}

TEST_CASE("minimal solver: similarity equivariance") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> ur(0.3, 1.5);
  std::uniform_real_distribution<double> ua(0.0, 2 * M_PI);
  std::uniform_real_distribution<double> us(0.1, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Circle2D truth{u(rng), u(rng), ur(rng)};
    const double a1 = ua(rng), a2 = a1 + 1.3, a3 = a1 + 2.9;
    const Eigen::Vector3d l1 = tangent_line(truth, a1);
    const Eigen::Vector3d l2 = tangent_line(truth, a2);
    const Eigen::Vector3d l3 = tangent_line(truth, a3);
    const double s = us(rng);
    const Eigen::Vector2d t(u(rng) * 5, u(rng) * 5);
    // X -> s X + t maps line (a, b, c) to (a, b, s c - a t_x - b t_y) after
    // renormalization of the homogeneous scale.
    auto map_line = [&](const Eigen::Vector3d& l) {
      return Eigen::Vector3d(l(0), l(1), s * l(2) - l(0) * t(0) - l(1) * t(1));
    };
    const auto base = solve_minimal_three_lines(l1, l2, l3);
    const auto mapped =
        solve_minimal_three_lines(map_line(l1), map_line(l2), map_line(l3));
    REQUIRE(base.size() == mapped.size());
    for (const auto& c : base) {
      const Circle2D expect{s * c.tx + t(0), s * c.ty + t(1), s * c.r};
      const double tol = 1e-8 * std::max(1.0, s);
      CHECK(contains_circle(mapped, expect, tol));
    }
  }
}

TEST_CASE("minimal solver: no real circle for three concurrent lines") {
  try {
    solve_minimal_three_lines({1, 0, 0}, {0, 1, 0}, {1, 1, 0});
    CHECK_MESSAGE(false, "expected NoRealCircle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRealCircle);
  }
}

TEST_CASE("minimal solver: parallel tangents with no common circle") {
  // Three parallel lines at distinct offsets admit no tangent circle.
  try {
    solve_minimal_three_lines({1, 0, -1}, {1, 0, 0}, {1, 0, 1});
    CHECK_MESSAGE(false, "expected NoRealCircle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRealCircle);
  }
}

TEST_CASE("minimal solver: degenerate input propagates") {
  try {
    solve_minimal_three_lines({1, 0, -1}, {2, 0, -2}, {0, 1, -1});
    CHECK_MESSAGE(false, "expected DegenerateLines");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateLines);
  }
}
