#include "cyltri/synthetic.hpp"

#include "cyltri/geometry.hpp"
#include "cyltri/robust.hpp"
#include "cyltri/solvers.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cyltri {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent per-trial stream so evaluation order cannot change results.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t grid, std::uint64_t trial) {
  return splitmix64(master ^ splitmix64(grid * 0x100000001b3ULL + trial));
}

template <class F>
double timed_us(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
      .count();
}

Camera look_at(const Eigen::Vector3d& c, const Eigen::Vector3d& target,
               const std::string& id) {
  const Eigen::Vector3d fwd = (target - c).normalized();
  Eigen::Vector3d up = Eigen::Vector3d::UnitY();
  if (std::abs(fwd.dot(up)) > 0.99) up = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d x = up.cross(fwd).normalized();
  const Eigen::Vector3d y = fwd.cross(x);
  Mat34 P;
  P.row(0).head<3>() = x;
  P.row(1).head<3>() = y;
  P.row(2).head<3>() = fwd;
  P.col(3) = -P.leftCols<3>() * c;
  return make_camera(P, id);
}

/// Circle estimate extracted leniently from a general conic (for scoring the
/// unconstrained baseline): center from the d6 = -1 gauge, radius from the
/// mean squared axis when real. NaN fields where undefined.
void lenient_circle_metrics(const DualConic2D& dc, const Circle2D& truth,
                            BenchmarkRow* row) {
  row->center_error = kNan;
  row->radius_error = kNan;
  Vec6 d = dc.d;
  if (std::abs(d(5)) < 1e-12 * d.norm()) return;
  d /= -d(5);
  const double tx = -d(2);
  const double ty = -d(4);
  row->center_error = std::hypot(tx - truth.tx, ty - truth.ty);
  const double r2 = 0.5 * (d(0) + tx * tx + d(3) + ty * ty);
  if (r2 > 0) row->radius_error = std::abs(std::sqrt(r2) - truth.r);
}

void closest_to_truth(const std::vector<Circle2D>& sols, const Circle2D& gt,
                      BenchmarkRow* row) {
  double best = std::numeric_limits<double>::infinity();
  for (const Circle2D& c : sols) {
    const double e = std::hypot(c.tx - gt.tx, c.ty - gt.ty) + std::abs(c.r - gt.r);
    if (e < best) {
      best = e;
      row->center_error = std::hypot(c.tx - gt.tx, c.ty - gt.ty);
      row->radius_error = std::abs(c.r - gt.r);
      row->frobenius_error =
          frobenius_conic_error(dual_conic_from_circle(c), dual_conic_from_circle(gt));
    }
  }
}

BenchmarkRow base_row(const std::string& experiment, std::uint64_t seed, int n_lines,
                      double sigma, const std::string& method) {
  BenchmarkRow row;
  row.experiment = experiment;
  row.seed = seed;
  row.n_lines = n_lines;
  row.sigma = sigma;
  row.method = method;
  row.center_error = kNan;
  row.radius_error = kNan;
  row.frobenius_error = kNan;
  row.conic_class = conic_class_name(ConicClass::Degenerate);
  return row;
}

std::vector<BenchmarkRow> run_numerics(const BenchmarkConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t s = trial_seed(cfg.seed, 0, t);
    std::mt19937_64 rng(s);
    SceneConfig sc = cfg.scene;
    sc.n_cylinders = 1;
    sc.n_cameras = 2;  // two tangents from one camera, one from the other
    sc.sigma = 0.0;
    const SyntheticScene scene = generate_scene(sc, rng);
    BenchmarkRow row = base_row("numerics", s, 3, 0.0, "minimal");
    try {
      std::vector<Circle2D> sols;
      row.runtime_us = timed_us([&] {
        sols = solve_minimal_three_lines(scene.lines2d[0], scene.lines2d[1],
                                         scene.lines2d[2]);
      });
      row.n_solutions = static_cast<int>(sols.size());
      row.conic_class = conic_class_name(ConicClass::Circle);
      closest_to_truth(sols, scene.circles[0], &row);
    } catch (const Error&) {
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchmarkRow> run_noise_sweep(const BenchmarkConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  std::uint64_t grid = 1;
  for (int n : cfg.line_counts) {
    for (double sigma : cfg.sigmas) {
      for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t s = trial_seed(cfg.seed, grid, t);
        std::mt19937_64 rng(s);
        SceneConfig sc = cfg.scene;
        sc.n_cylinders = 1;
        sc.n_cameras = (n + 1) / 2;
        sc.sigma = sigma;
        const SyntheticScene scene = generate_scene(sc, rng);
        const std::vector<Eigen::Vector3d> lines(scene.noisy_lines2d.begin(),
                                                 scene.noisy_lines2d.begin() + n);
        BenchmarkRow row = base_row("noise_sweep", s, n, sigma, "lsq");
        try {
          ConstrainedLsqResult res;
          row.runtime_us = timed_us([&] { res = solve_constrained_lsq(lines); });
          row.n_solutions = static_cast<int>(res.stationary.size());
          row.conic_class = conic_class_name(ConicClass::Circle);
          const ErrorMetrics m = eval_error(res.best, scene.circles[0]);
          row.center_error = m.center_error;
          row.radius_error = m.radius_error;
          row.frobenius_error =
              frobenius_conic_error(dual_conic_from_circle(res.best),
                                    dual_conic_from_circle(scene.circles[0]));
        } catch (const Error&) {
        }
        rows.push_back(row);
      }
      ++grid;
    }
  }
  return rows;
}

std::vector<BenchmarkRow> run_method_comparison(const BenchmarkConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  std::uint64_t grid = 1;
  for (int views : cfg.view_counts) {
    for (int t = 0; t < cfg.trials; ++t) {
      const std::uint64_t s = trial_seed(cfg.seed, grid, t);
      std::mt19937_64 rng(s);
      SceneConfig sc = cfg.scene;
      sc.n_cylinders = 1;
      sc.n_cameras = views;
      sc.sigma = cfg.comparison_sigma;
      const SyntheticScene scene = generate_scene(sc, rng);
      const Circle2D& gt = scene.circles[0];
      const DualConic2D gt_conic = dual_conic_from_circle(gt);
      const int n = static_cast<int>(scene.noisy_lines2d.size());

      BenchmarkRow lsq = base_row("method_comparison", s, n, sc.sigma, "lsq");
      try {
        ConstrainedLsqResult res;
        lsq.runtime_us = timed_us([&] { res = solve_constrained_lsq(scene.noisy_lines2d); });
        lsq.n_solutions = static_cast<int>(res.stationary.size());
        lsq.conic_class = conic_class_name(ConicClass::Circle);
        const ErrorMetrics m = eval_error(res.best, gt);
        lsq.center_error = m.center_error;
        lsq.radius_error = m.radius_error;
        lsq.frobenius_error =
            frobenius_conic_error(dual_conic_from_circle(res.best), gt_conic);
      } catch (const Error&) {
      }
      rows.push_back(lsq);

      BenchmarkRow lin = base_row("method_comparison", s, n, sc.sigma, "linear");
      try {
        DualConic2D est;
        lin.runtime_us = timed_us([&] { est = solve_linear_conic(scene.noisy_lines2d); });
        lin.n_solutions = 1;
        lin.conic_class = conic_class_name(classify_conic(est));
        lin.frobenius_error = frobenius_conic_error(est, gt_conic);
        lenient_circle_metrics(est, gt, &lin);
      } catch (const Error&) {
      }
      rows.push_back(lin);
    }
    ++grid;
  }
  return rows;
}

std::vector<BenchmarkRow> run_degeneracy(const BenchmarkConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  const Circle2D gt{0.0, 0.0, 1.0};
  const DualConic2D gt_conic = dual_conic_from_circle(gt);
  const int n = 12;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t s = trial_seed(cfg.seed, 0, t);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // A dozen tangents whose touch points cover only a narrow arc: every
    // line sees the circle from the same side, which starves the tangency
    // system of curvature information.
    const double arc = cfg.arc_width_deg * M_PI / 180.0;
    const double base = 2.0 * M_PI * u01(rng);
    std::vector<Eigen::Vector3d> lines;
    for (int k = 0; k < n; ++k) {
      const double psi = base - arc / 2 + arc * k / (n - 1);
      Eigen::Vector3d l(std::cos(psi), std::sin(psi), -gt.r);
      l(2) += cfg.arc_sigma * gauss(rng);
      lines.push_back(l);
    }

    BenchmarkRow lin = base_row("degeneracy", s, n, cfg.arc_sigma, "linear");
    try {
      DualConic2D est;
      lin.runtime_us = timed_us([&] { est = solve_linear_conic(lines); });
      lin.n_solutions = 1;
      lin.conic_class = conic_class_name(classify_conic(est));
      lin.frobenius_error = frobenius_conic_error(est, gt_conic);
      lenient_circle_metrics(est, gt, &lin);
    } catch (const Error&) {
    }
    rows.push_back(lin);

    BenchmarkRow lsq = base_row("degeneracy", s, n, cfg.arc_sigma, "lsq");
    try {
      ConstrainedLsqResult res;
      lsq.runtime_us = timed_us([&] { res = solve_constrained_lsq(lines); });
      lsq.n_solutions = static_cast<int>(res.stationary.size());
      lsq.conic_class = conic_class_name(ConicClass::Circle);
      const ErrorMetrics m = eval_error(res.best, gt);
      lsq.center_error = m.center_error;
      lsq.radius_error = m.radius_error;
      lsq.frobenius_error =
          frobenius_conic_error(dual_conic_from_circle(res.best), gt_conic);
    } catch (const Error&) {
    }
    rows.push_back(lsq);
  }
  return rows;
}

std::vector<BenchmarkRow> run_multi_cylinder(const BenchmarkConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t s = trial_seed(cfg.seed, 0, t);
    std::mt19937_64 rng(s);
    const SyntheticScene scene = generate_scene(cfg.scene, rng);
    MultiCylinderConfig mc;
    mc.inlier_threshold = cfg.match_threshold;
    try {
      MultiCylinderResult res;
      const double us = timed_us(
          [&] { res = exhaustive_multi_cylinder(scene.noisy_lines, scene.cameras, 0, mc); });
      for (const MatchResult& m : res.matches) {
        // ground-truth identity of a match = majority label of its lines
        std::vector<int> votes(scene.circles.size(), 0);
        for (const auto& [cam, idx] : m.matched_lines) {
          if (scene.noisy_lines[idx].label) votes[*scene.noisy_lines[idx].label]++;
        }
        const int label = static_cast<int>(
            std::max_element(votes.begin(), votes.end()) - votes.begin());
        BenchmarkRow row = base_row("multi_cylinder", s,
                                    static_cast<int>(m.matched_lines.size()),
                                    cfg.scene.sigma, "match");
        row.runtime_us = us;
        row.n_solutions = static_cast<int>(res.matches.size());
        row.conic_class = conic_class_name(ConicClass::Circle);
        const ErrorMetrics em = eval_error(m.cylinder, scene.cylinders[label]);
        row.center_error = em.center_error;
        row.radius_error = em.radius_error;
        const Eigen::Vector3d p = scene.r_align * m.cylinder.axis_point;
        const Circle2D est{p(0), p(2), m.cylinder.radius};
        row.frobenius_error =
            frobenius_conic_error(dual_conic_from_circle(est),
                                  dual_conic_from_circle(scene.circles[label]));
        rows.push_back(row);
      }
    } catch (const Error&) {
      rows.push_back(base_row("multi_cylinder", s, 0, cfg.scene.sigma, "match"));
    }
  }
  return rows;
}

}  // namespace

std::vector<Eigen::Vector3d> tangent_lines_from_point(const Circle2D& c,
                                                      const Eigen::Vector2d& q) {
  const Eigen::Vector2d rel = q - Eigen::Vector2d(c.tx, c.ty);
  const double d = rel.norm();
  if (d <= c.r) {
    fail(ErrorCode::InvalidInput, "no tangent lines from a point inside the circle");
  }
  const double phi = std::atan2(rel(1), rel(0));
  const double alpha = std::acos(c.r / d);
  std::vector<Eigen::Vector3d> lines;
  for (double psi : {phi - alpha, phi + alpha}) {
    const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
    lines.emplace_back(n(0), n(1), -(n(0) * c.tx + n(1) * c.ty + c.r));
  }
  return lines;
}

SyntheticScene generate_scene(const SceneConfig& cfg, std::mt19937_64& rng) {
  if (cfg.radius_min <= 0 || cfg.radius_max < cfg.radius_min) {
    fail(ErrorCode::InvalidConfig, "radius range must satisfy 0 < min <= max");
  }
  if (cfg.exclusion_half_width <= 0 ||
      cfg.camera_half_width <= cfg.exclusion_half_width) {
    fail(ErrorCode::InvalidConfig, "camera square must strictly contain the exclusion square");
  }
  if (cfg.n_cameras < 1 || cfg.n_cylinders < 1) {
    fail(ErrorCode::InvalidConfig, "need at least one camera and one cylinder");
  }
  if (cfg.sigma < 0) fail(ErrorCode::InvalidConfig, "sigma must be non-negative");

  SyntheticScene s;
  s.r_align = rotation_to_y_axis(Eigen::Vector3d::UnitY());

  std::uniform_real_distribution<double> uradius(cfg.radius_min, cfg.radius_max);
  std::uniform_real_distribution<double> ubox(-cfg.camera_half_width,
                                              cfg.camera_half_width);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Cross-sections: the first cylinder sits at the origin; further ones are
  // packed around it inside the exclusion square with surface clearance.
  const double place_radius = cfg.exclusion_half_width - cfg.radius_max - 0.5;
  for (int j = 0; j < cfg.n_cylinders; ++j) {
    const double r = uradius(rng);
    Circle2D c{0.0, 0.0, r};
    if (j > 0) {
      if (place_radius <= 0) {
        fail(ErrorCode::InvalidConfig,
             "no room for several cylinders; widen the exclusion square or shrink radii");
      }
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const double rho = place_radius * std::sqrt(u01(rng));
        const double ang = 2.0 * M_PI * u01(rng);
        c.tx = rho * std::cos(ang);
        c.ty = rho * std::sin(ang);
        placed = true;
        for (const Circle2D& other : s.circles) {
          const double sep = std::hypot(c.tx - other.tx, c.ty - other.ty);
          if (sep < c.r + other.r + 0.2) placed = false;
        }
      }
      if (!placed) {
        fail(ErrorCode::InvalidConfig,
             "cylinder placement failed; widen the exclusion square or shrink radii");
      }
    }
    s.circles.push_back(c);
    s.cylinders.push_back(lift_circle_to_cylinder(c, s.r_align));
  }

  for (int i = 0; i < cfg.n_cameras; ++i) {
    Eigen::Vector2d q;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      q = {ubox(rng), ubox(rng)};
      if (std::abs(q(0)) <= cfg.exclusion_half_width &&
          std::abs(q(1)) <= cfg.exclusion_half_width) {
        continue;
      }
      ok = true;
      for (const Circle2D& c : s.circles) {
        // a camera inside a cylinder has no tangent lines: resample
        if (std::hypot(q(0) - c.tx, q(1) - c.ty) <= c.r) ok = false;
      }
    }
    if (!ok) fail(ErrorCode::InvalidConfig, "camera placement failed");
    const Eigen::Vector3d center(q(0), 0.0, q(1));
    const Eigen::Vector3d target(s.circles[0].tx, 0.0, s.circles[0].ty);
    const Camera cam = look_at(center, target, "c" + std::to_string(i));

    for (int j = 0; j < cfg.n_cylinders; ++j) {
      const Circle2D& c = s.circles[j];
      const auto exact = tangent_lines_from_point(c, q);
      for (int k = 0; k < 2; ++k) {
        const double eta = cfg.sigma * gauss(rng);
        s.lines2d.push_back(exact[k]);
        Eigen::Vector3d noisy2d = exact[k];
        noisy2d(2) += eta;
        s.noisy_lines2d.push_back(noisy2d);

        const auto lift = [&](const Eigen::Vector3d& r2d) {
          return make_image_line(
              cam.rotation() * s.r_align.transpose() *
                  Eigen::Vector3d(r2d(0), 0.0, r2d(1)),
              i, j, j);
        };
        s.lines.push_back(lift(exact[k]));
        // Image-domain noise must keep the line a silhouette of this camera
        // (its backprojection is pinned to the camera footprint), so the
        // same offset draw is realized by re-tangenting to a shifted radius.
        const Circle2D shifted{c.tx, c.ty, c.r - eta};
        s.noisy_lines.push_back(lift(tangent_lines_from_point(shifted, q)[k]));
      }
    }
    s.cameras.push_back(cam);
  }
  return s;
}

Eigen::Vector3d add_line_noise(const Eigen::Vector3d& line2d, double sigma,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d l = normalize_line(line2d);
  l(2) += sigma * gauss(rng);
  return l;
}

ErrorMetrics eval_error(const Circle2D& estimate, const Circle2D& truth) {
  ErrorMetrics m;
  m.center_error = std::hypot(estimate.tx - truth.tx, estimate.ty - truth.ty);
  m.radius_error = std::abs(estimate.r - truth.r);
  return m;
}

ErrorMetrics eval_error(const Cylinder3D& estimate, const Cylinder3D& truth) {
  ErrorMetrics m;
  const Eigen::Vector3d we = estimate.direction.normalized();
  const Eigen::Vector3d wg = truth.direction.normalized();
  const Eigen::Vector3d cx = we.cross(wg);
  m.direction_angle = std::atan2(cx.norm(), std::abs(we.dot(wg)));
  const Eigen::Vector3d dp = estimate.axis_point - truth.axis_point;
  if (cx.norm() < 1e-9) {
    m.center_error = (dp - dp.dot(wg) * wg).norm();  // parallel axes
  } else {
    m.center_error = std::abs(dp.dot(cx)) / cx.norm();  // skew axes
  }
  m.radius_error = std::abs(estimate.radius - truth.radius);
  return m;
}

double frobenius_conic_error(const DualConic2D& estimate, const DualConic2D& truth) {
  const auto gauge = [](const DualConic2D& dc) {
    Vec6 d = dc.d;
    const double n = d.norm();
    if (n == 0) fail(ErrorCode::InvalidInput, "zero conic has no gauge");
    d /= n;
    if (std::abs(d(5)) >= 1e-12) {
      d /= -d(5);
    } else {
      int imax = 0;
      d.cwiseAbs().maxCoeff(&imax);
      if (d(imax) < 0) d = -d;
    }
    DualConic2D g;
    g.d = d;
    return g.matrix();
  };
  return (gauge(estimate) - gauge(truth)).norm();
}

std::vector<double> default_sigma_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(0.02 * i / 9);
  return grid;
}

std::vector<BenchmarkRow> run_benchmark(const std::string& experiment,
                                        const BenchmarkConfig& cfg) {
  if (cfg.trials < 1) fail(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (experiment == "numerics") return run_numerics(cfg);
  if (experiment == "noise_sweep") return run_noise_sweep(cfg);
  if (experiment == "method_comparison") return run_method_comparison(cfg);
  if (experiment == "degeneracy") return run_degeneracy(cfg);
  if (experiment == "multi_cylinder") return run_multi_cylinder(cfg);
  fail(ErrorCode::InvalidConfig, "unknown experiment: " + experiment);
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "experiment,seed,n_lines,sigma,method,center_error,radius_error,"
         "frobenius_error,conic_class,runtime_us,n_solutions\n";
  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const BenchmarkRow& r : rows) {
    out << r.experiment << ',' << r.seed << ',' << r.n_lines << ',' << fmt(r.sigma)
        << ',' << r.method << ',' << fmt(r.center_error) << ',' << fmt(r.radius_error)
        << ',' << fmt(r.frobenius_error) << ',' << r.conic_class << ','
        << fmt(r.runtime_us) << ',' << r.n_solutions << '\n';
  }
}

}  // namespace cyltri
