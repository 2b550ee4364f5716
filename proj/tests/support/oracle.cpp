#include "support/oracle.hpp"

#include <cmath>

namespace cyltri::testing {

double tangency_cost(const std::vector<Eigen::Vector3d>& lines, const Circle2D& c) {
  double cost = 0.0;
  for (const Eigen::Vector3d& l : lines) {
    const double delta = l(0) * c.tx + l(1) * c.ty + l(2);
    const double e = c.r * c.r - delta * delta;
    cost += e * e;
  }
  return cost;
}

namespace {

/// One Levenberg-Marquardt descent on residuals e_i = r^2 - delta_i^2 over
/// x = (tx, ty, r). Returns the reached cost.
double lm_descend(const std::vector<Eigen::Vector3d>& lines, Eigen::Vector3d& x) {
  const int n = static_cast<int>(lines.size());
  Eigen::VectorXd e(n);
  Eigen::MatrixXd J(n, 3);
  auto eval = [&](const Eigen::Vector3d& p, Eigen::VectorXd& res) {
    for (int i = 0; i < n; ++i) {
      const double delta = lines[i](0) * p(0) + lines[i](1) * p(1) + lines[i](2);
      res(i) = p(2) * p(2) - delta * delta;
    }
  };
  eval(x, e);
  double cost = e.squaredNorm();
  double mu = 1e-3;
  for (int it = 0; it < 100; ++it) {
    for (int i = 0; i < n; ++i) {
      const double delta = lines[i](0) * x(0) + lines[i](1) * x(1) + lines[i](2);
      J(i, 0) = -2.0 * delta * lines[i](0);
      J(i, 1) = -2.0 * delta * lines[i](1);
      J(i, 2) = 2.0 * x(2);
    }
    const Eigen::Matrix3d H = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * e;
    if (g.norm() < 1e-14 * (1.0 + cost)) break;
    bool stepped = false;
    for (int tries = 0; tries < 12; ++tries) {
      const Eigen::Matrix3d A = H + mu * Eigen::Matrix3d::Identity();
      const Eigen::Vector3d step = A.ldlt().solve(-g);
      const Eigen::Vector3d cand = x + step;
      Eigen::VectorXd ec(n);
      eval(cand, ec);
      const double cc = ec.squaredNorm();
      if (cc < cost) {
        x = cand;
        e = ec;
        cost = cc;
        mu = std::max(mu * 0.3, 1e-12);
        stepped = true;
        break;
      }
      mu *= 4.0;
    }
    if (!stepped) break;
  }
  return cost;
}

}  // namespace

Circle2D oracle_lsq(const std::vector<Eigen::Vector3d>& lines, int starts,
                    std::uint64_t seed) {
  if (lines.size() < 4) fail(ErrorCode::InvalidInput, "oracle_lsq needs >= 4 lines");

  // Data-driven start region: the point closest to all lines and the spread
  // of the line offsets around it.
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (const Eigen::Vector3d& l : lines) {
    const Eigen::Vector2d n = l.head<2>();
    A += n * n.transpose();
    b -= n * l(2);
  }
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
  if (std::abs(A.determinant()) > 1e-12) p0 = A.ldlt().solve(b);
  double spread = 0.0;
  for (const Eigen::Vector3d& l : lines) {
    const double delta = l(0) * p0(0) + l(1) * p0(1) + l(2);
    spread += delta * delta;
  }
  spread = std::sqrt(spread / static_cast<double>(lines.size()));
  spread = std::max(spread, 0.1);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.05, 2.5);

  Eigen::Vector3d best(p0(0), p0(1), spread);
  double best_cost = lm_descend(lines, best);
  for (int s = 1; s < starts; ++s) {
    Eigen::Vector3d x(p0(0) + 2.0 * spread * gauss(rng),
                      p0(1) + 2.0 * spread * gauss(rng), unif(rng) * spread);
    const double cost = lm_descend(lines, x);
    if (cost < best_cost && std::abs(x(2)) > 1e-12) {
      best_cost = cost;
      best = x;
    }
  }
  Circle2D c;
  c.tx = best(0);
  c.ty = best(1);
  c.r = std::abs(best(2));
  return c;
}

Eigen::Vector3d fd_cost_gradient(const std::vector<Eigen::Vector3d>& lines,
                                 const Circle2D& c, double step) {
  Eigen::Vector3d g;
  const double base[3] = {c.tx, c.ty, c.r};
  for (int k = 0; k < 3; ++k) {
    double lo[3] = {base[0], base[1], base[2]};
    double hi[3] = {base[0], base[1], base[2]};
    lo[k] -= step;
    hi[k] += step;
    const Circle2D clo{lo[0], lo[1], lo[2]};
    const Circle2D chi{hi[0], hi[1], hi[2]};
    g(k) = (tangency_cost(lines, chi) - tangency_cost(lines, clo)) / (2.0 * step);
  }
  return g;
}

Eigen::Vector3d tangent_line(const Circle2D& c, double psi) {
  const double nx = std::cos(psi);
  const double ny = std::sin(psi);
  return {nx, ny, -(nx * c.tx + ny * c.ty + c.r)};
}

std::vector<Eigen::Vector3d> tangents_from_point(const Circle2D& c,
                                                 const Eigen::Vector2d& q) {
  const Eigen::Vector2d v = q - Eigen::Vector2d(c.tx, c.ty);
  const double dist = v.norm();
  if (dist <= c.r) {
    fail(ErrorCode::InvalidInput, "tangent point inside or on the circle");
  }
  const double base = std::atan2(v(1), v(0));
  const double open = std::acos(c.r / dist);
  std::vector<Eigen::Vector3d> out;
  for (const double sgn : {+1.0, -1.0}) {
    const double psi = base + sgn * open;
    out.push_back(tangent_line(c, psi));
  }
  return out;
}

}  // namespace cyltri::testing
