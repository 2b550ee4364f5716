#include "doctest.h"

#include "cyltri/geometry.hpp"
#include "cyltri/solvers.hpp"
#include "cyltri/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cyltri;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

bool same_scene(const SyntheticScene& a, const SyntheticScene& b) {
  if (a.cameras.size() != b.cameras.size() || a.lines.size() != b.lines.size()) {
    return false;
  }
  for (size_t i = 0; i < a.cameras.size(); ++i) {
    if (a.cameras[i].P != b.cameras[i].P) return false;
  }
  for (size_t i = 0; i < a.circles.size(); ++i) {
    if (a.circles[i].tx != b.circles[i].tx || a.circles[i].ty != b.circles[i].ty ||
        a.circles[i].r != b.circles[i].r) {
      return false;
    }
  }
  for (size_t i = 0; i < a.lines.size(); ++i) {
    if (a.lines[i].l != b.lines[i].l) return false;
    if (a.noisy_lines[i].l != b.noisy_lines[i].l) return false;
    if (a.lines2d[i] != b.lines2d[i]) return false;
    if (a.noisy_lines2d[i] != b.noisy_lines2d[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tangent lines from an exterior point") {
  const Circle2D c{2.0, -1.0, 1.5};
  const Eigen::Vector2d q(7.0, 3.0);
  const auto lines = tangent_lines_from_point(c, q);
  REQUIRE(lines.size() == 2);
  for (const auto& l : lines) {
    CHECK(std::abs(geometric_line_residual(l, c)) < 1e-14);
    CHECK(std::abs(l(0) * q(0) + l(1) * q(1) + l(2)) < 1e-12);  // through q
  }
  CHECK((lines[0] - lines[1]).norm() > 1e-3);
  CHECK_THROWS_AS(tangent_lines_from_point(c, Eigen::Vector2d(2.5, -1.0)), Error);
}

TEST_CASE("noiseless scenes have exact silhouettes") {
  std::mt19937_64 rng(5);
  SceneConfig cfg;
  cfg.n_cameras = 6;
  cfg.n_cylinders = 1;
  const SyntheticScene s = generate_scene(cfg, rng);
  REQUIRE(s.lines.size() == 12);
  REQUIRE(s.lines2d.size() == 12);
  for (size_t i = 0; i < s.lines.size(); ++i) {
    const int j = *s.lines[i].label;
    CHECK(std::abs(geometric_line_residual(s.lines2d[i], s.circles[j])) < 1e-12);
    // noiseless == noisy at sigma zero
    CHECK(s.noisy_lines2d[i] == s.lines2d[i]);
    CHECK(s.noisy_lines[i].l == s.lines[i].l);
    // lifted lines satisfy the axis-direction constraint and backproject
    // to the same rectified tangent
    const Camera& cam = s.cameras[s.lines[i].camera];
    CHECK(std::abs(direction_residual(s.lines[i], cam, Eigen::Vector3d::UnitY())) <
          1e-12);
    const Eigen::Vector3d r2d = backproject_line_2d(s.lines[i].l, cam, s.r_align);
    const double flip = r2d.dot(s.lines2d[i]) < 0 ? -1.0 : 1.0;
    CHECK((flip * r2d - s.lines2d[i]).norm() < 1e-9);
  }
}

TEST_CASE("camera placement avoids the exclusion square and the cylinders") {
  std::mt19937_64 rng(7);
  SceneConfig cfg;
  cfg.exclusion_half_width = 0.5;  // smaller than the cylinder itself
  cfg.radius_min = 1.9;
  cfg.radius_max = 2.0;
  cfg.n_cameras = 40;
  const SyntheticScene s = generate_scene(cfg, rng);
  for (const Camera& cam : s.cameras) {
    const Eigen::Vector3d c = cam.center();
    const double dist = std::hypot(c(0) - s.circles[0].tx, c(2) - s.circles[0].ty);
    CHECK(dist > s.circles[0].r);  // interior positions were resampled
    CHECK((std::abs(c(0)) > 0.5 || std::abs(c(2)) > 0.5));
    CHECK(std::abs(c(0)) <= 20.0);
    CHECK(std::abs(c(2)) <= 20.0);
  }
}

TEST_CASE("fixed seed reproduces the scene exactly") {
  SceneConfig cfg;
  cfg.n_cameras = 5;
  cfg.n_cylinders = 3;
  cfg.exclusion_half_width = 8.0;
  cfg.radius_min = 0.5;
  cfg.radius_max = 1.0;
  cfg.sigma = 0.01;
  std::mt19937_64 rng1(99), rng2(99);
  const SyntheticScene a = generate_scene(cfg, rng1);
  const SyntheticScene b = generate_scene(cfg, rng2);
  CHECK(same_scene(a, b));
}

TEST_CASE("invalid scene configurations are rejected") {
  std::mt19937_64 rng(1);
  SceneConfig cfg;
  cfg.radius_min = 0.0;
  CHECK_THROWS_AS(generate_scene(cfg, rng), Error);
  cfg = SceneConfig{};
  cfg.exclusion_half_width = 25.0;  // exclusion outside the camera square
  CHECK_THROWS_AS(generate_scene(cfg, rng), Error);
  cfg = SceneConfig{};
  cfg.sigma = -0.1;
  CHECK_THROWS_AS(generate_scene(cfg, rng), Error);
  cfg = SceneConfig{};
  cfg.n_cylinders = 3;  // no room: radii up to 2 inside a 6x6 square
  CHECK_THROWS_AS(generate_scene(cfg, rng), Error);
}

TEST_CASE("offset noise has the requested distribution") {
  std::mt19937_64 rng(11);
  const Eigen::Vector3d l(0.6, 0.8, -2.0);

  const Eigen::Vector3d same = add_line_noise(l, 0.0, rng);
  CHECK(same == normalize_line(l));

  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d noisy = add_line_noise(l, 0.02, rng);
    CHECK(noisy.head<2>() == normalize_line(l).head<2>());
    const double d = noisy(2) - normalize_line(l)(2);
    sum += d;
    sum2 += d * d;
  }
  const double stddev = std::sqrt((sum2 - sum * sum / n) / (n - 1));
  CHECK(stddev > 0.0196);
  CHECK(stddev < 0.0204);
}

TEST_CASE("noisy scene lines carry the same defect in both representations") {
  std::mt19937_64 rng(13);
  SceneConfig cfg;
  cfg.n_cameras = 50;
  cfg.sigma = 0.02;
  const SyntheticScene s = generate_scene(cfg, rng);
  double acc2d = 0.0, acc3d = 0.0;
  for (size_t i = 0; i < s.lines.size(); ++i) {
    const double d2 = geometric_line_residual(s.noisy_lines2d[i], s.circles[0]);
    const Eigen::Vector3d r2d = backproject_line_2d(
        s.noisy_lines[i].l, s.cameras[s.noisy_lines[i].camera], s.r_align);
    const double d3 = geometric_line_residual(r2d, s.circles[0]);
    CHECK(std::abs(d2 - d3) < 1e-10);  // identical per-line draw
    acc2d += d2 * d2;
    acc3d += d3 * d3;
  }
  const double rms = std::sqrt(acc2d / s.lines.size());
  CHECK(rms > 0.01);  // noise actually applied
  CHECK(rms < 0.04);
  CHECK(acc3d > 0.0);
}

TEST_CASE("error metrics") {
  const ErrorMetrics zero = eval_error(Circle2D{1, 2, 3}, Circle2D{1, 2, 3});
  CHECK(zero.center_error == 0.0);
  CHECK(zero.radius_error == 0.0);
  CHECK(zero.direction_angle == 0.0);

  const ErrorMetrics m = eval_error(Circle2D{0, 0, 1}, Circle2D{3, 4, 2});
  CHECK(m.center_error == doctest::Approx(5.0));
  CHECK(m.radius_error == doctest::Approx(1.0));

  const Cylinder3D a = make_cylinder({0, 1, 0}, {0, 0, 0}, 1.0);
  const Cylinder3D b = make_cylinder({1, 0, 0}, {0, 0, 0}, 1.0);
  CHECK(eval_error(a, b).direction_angle == doctest::Approx(M_PI / 2));
  // undirected axes: opposite directions are the same axis
  const Cylinder3D c = make_cylinder({0, -1, 0}, {0, 0, 0}, 1.0);
  CHECK(eval_error(a, c).direction_angle == doctest::Approx(0.0));

  const Cylinder3D off = make_cylinder({0, 1, 0}, {3, 0, 4}, 2.5);
  const ErrorMetrics par = eval_error(a, off);
  CHECK(par.center_error == doctest::Approx(5.0));
  CHECK(par.radius_error == doctest::Approx(1.5));
}

TEST_CASE("frobenius conic distance in the fixed gauge") {
  const DualConic2D a = dual_conic_from_circle(Circle2D{0, 0, 1});
  const DualConic2D b = dual_conic_from_circle(Circle2D{0, 0, 2});
  CHECK(frobenius_conic_error(a, a) == 0.0);
  CHECK(frobenius_conic_error(a, b) == doctest::Approx(3.0 * std::sqrt(2.0)));
  // scale of the input coefficients is irrelevant
  DualConic2D scaled = b;
  scaled.d *= -7.25;
  CHECK(frobenius_conic_error(a, scaled) == doctest::Approx(3.0 * std::sqrt(2.0)));
  // d6 = 0 falls back to unit coefficients with a fixed sign
  DualConic2D flat;
  flat.d << 1, 0, 0, 1, 0, 0;
  DualConic2D flipped;
  flipped.d = -2.0 * flat.d;
  CHECK(frobenius_conic_error(flat, flipped) == doctest::Approx(0.0));

  // ten-view noiseless estimate is exact
  std::mt19937_64 rng(17);
  SceneConfig cfg;
  cfg.n_cameras = 10;
  const SyntheticScene s = generate_scene(cfg, rng);
  const ConstrainedLsqResult res = solve_constrained_lsq(s.lines2d);
  CHECK(frobenius_conic_error(dual_conic_from_circle(res.best),
                              dual_conic_from_circle(s.circles[0])) < 1e-8);
}

TEST_CASE("scaling the scene scales the constrained estimate exactly") {
  std::mt19937_64 rng(19);
  SceneConfig cfg;
  cfg.n_cameras = 5;
  cfg.sigma = 0.01;
  const SyntheticScene s = generate_scene(cfg, rng);
  const Circle2D base = solve_constrained_lsq(s.noisy_lines2d).best;
  const double scale = 7.3;
  std::vector<Eigen::Vector3d> scaled = s.noisy_lines2d;
  for (auto& l : scaled) l(2) *= scale;
  const Circle2D big = solve_constrained_lsq(scaled).best;
  CHECK(big.tx == doctest::Approx(scale * base.tx).epsilon(1e-9));
  CHECK(big.ty == doctest::Approx(scale * base.ty).epsilon(1e-9));
  CHECK(big.r == doctest::Approx(scale * base.r).epsilon(1e-9));
}

TEST_CASE("numerics experiment finds the truth to machine precision") {
  BenchmarkConfig cfg;
  cfg.trials = 300;
  cfg.seed = 21;
  const auto rows = run_benchmark("numerics", cfg);
  REQUIRE(rows.size() == 300);
  for (const BenchmarkRow& r : rows) {
    CHECK(r.experiment == "numerics");
    CHECK(r.method == "minimal");
    CHECK(r.n_lines == 3);
    CHECK(r.n_solutions >= 1);
    CHECK(r.n_solutions <= 4);
    CHECK(r.center_error + r.radius_error < 1e-8);  // truth among the roots
    CHECK(r.runtime_us > 0.0);
  }
}

TEST_CASE("noise sweep: error grows with sigma, exact at zero") {
  BenchmarkConfig cfg;
  cfg.trials = 30;
  cfg.seed = 23;
  cfg.line_counts = {4, 10};
  cfg.sigmas = {0.0, 0.02};
  const auto rows = run_benchmark("noise_sweep", cfg);
  REQUIRE(rows.size() == 2 * 2 * 30);
  for (int n : {4, 10}) {
    std::vector<double> clean, noisy;
    for (const BenchmarkRow& r : rows) {
      if (r.n_lines != n) continue;
      CHECK(r.method == "lsq");
      if (r.sigma == 0.0) {
        CHECK(r.center_error + r.radius_error < 1e-8);
        clean.push_back(r.center_error);
      } else {
        noisy.push_back(r.center_error);
      }
    }
    REQUIRE(clean.size() == 30);
    REQUIRE(noisy.size() == 30);
    CHECK(median(noisy) > median(clean));
    CHECK(median(noisy) > 1e-4);
  }
}

TEST_CASE("method comparison: constrained circle beats the linear fit") {
  BenchmarkConfig cfg;
  cfg.trials = 30;
  cfg.seed = 25;
  cfg.view_counts = {2, 3};
  const auto rows = run_benchmark("method_comparison", cfg);
  REQUIRE(rows.size() == 2 * 2 * 30);
  double lin3 = 0.0, lsq3 = 0.0;
  int lin3_n = 0;
  for (const BenchmarkRow& r : rows) {
    if (r.n_lines == 4 && r.method == "linear") {
      // four tangency rows cannot pin down a five-parameter conic
      CHECK(r.n_solutions == 0);
      CHECK(std::isnan(r.frobenius_error));
    }
    if (r.n_lines == 4 && r.method == "lsq") {
      CHECK(r.n_solutions >= 1);
      CHECK(std::isfinite(r.center_error));
    }
    if (r.n_lines == 6 && r.method == "linear" && std::isfinite(r.frobenius_error)) {
      lin3 += r.frobenius_error;
      ++lin3_n;
    }
    if (r.n_lines == 6 && r.method == "lsq") lsq3 += r.frobenius_error;
  }
  REQUIRE(lin3_n > 0);
  CHECK(lsq3 / 30 < lin3 / lin3_n);
}

TEST_CASE("degeneracy experiment: linear flips class, constrained stays a circle") {
  BenchmarkConfig cfg;
  cfg.trials = 60;
  cfg.seed = 27;
  const auto rows = run_benchmark("degeneracy", cfg);
  REQUIRE(rows.size() == 2 * 60);
  int hyperbola = 0, lin_rows = 0;
  for (const BenchmarkRow& r : rows) {
    if (r.method == "linear") {
      ++lin_rows;
      if (r.conic_class == "hyperbola") ++hyperbola;
    } else {
      CHECK(r.method == "lsq");
      CHECK(r.conic_class == "circle");
      CHECK(r.center_error < 3.0);  // bounded even when the cost is ambiguous
      CHECK(r.n_solutions >= 1);
    }
  }
  CHECK(lin_rows == 60);
  CHECK(hyperbola > 30);
}

TEST_CASE("multi cylinder experiment recovers every cylinder") {
  BenchmarkConfig cfg;
  cfg.trials = 3;
  cfg.seed = 29;
  cfg.scene.n_cylinders = 7;
  cfg.scene.n_cameras = 12;
  cfg.scene.exclusion_half_width = 8.0;
  cfg.scene.radius_min = 0.5;
  cfg.scene.radius_max = 1.0;
  const auto rows = run_benchmark("multi_cylinder", cfg);
  REQUIRE(rows.size() == 3 * 7);
  for (const BenchmarkRow& r : rows) {
    CHECK(r.method == "match");
    CHECK(r.n_solutions == 7);
    CHECK(r.n_lines >= static_cast<int>(0.95 * 24));
    CHECK(r.center_error < 1e-6);
    CHECK(r.radius_error < 1e-6);
    CHECK(r.frobenius_error < 1e-5);
  }
}

TEST_CASE("benchmark validation and determinism") {
  BenchmarkConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_benchmark("numerics", cfg), Error);
  cfg.trials = 5;
  CHECK_THROWS_AS(run_benchmark("everything", cfg), Error);

  cfg.seed = 31;
  cfg.line_counts = {4};
  cfg.sigmas = {0.01};
  const auto a = run_benchmark("noise_sweep", cfg);
  const auto b = run_benchmark("noise_sweep", cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    // identical except wall-clock timing
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].center_error == b[i].center_error);
    CHECK(a[i].radius_error == b[i].radius_error);
    CHECK(a[i].frobenius_error == b[i].frobenius_error);
    CHECK(a[i].conic_class == b[i].conic_class);
    CHECK(a[i].n_solutions == b[i].n_solutions);
  }
}

TEST_CASE("csv output format") {
  BenchmarkRow row;
  row.experiment = "noise_sweep";
  row.seed = 123456789012345ULL;
  row.n_lines = 10;
  row.sigma = 1.0 / 3.0;
  row.method = "lsq";
  row.center_error = 0.1 + 0.2;  // forces full precision
  row.radius_error = std::numeric_limits<double>::quiet_NaN();
  row.frobenius_error = 2.0;
  row.conic_class = "circle";
  row.runtime_us = 12.5;
  row.n_solutions = 4;
  std::ostringstream out;
  write_benchmark_csv(out, {row});
  const std::string text = out.str();
  const std::string header =
      "experiment,seed,n_lines,sigma,method,center_error,radius_error,"
      "frobenius_error,conic_class,runtime_us,n_solutions";
  REQUIRE(text.substr(0, header.size()) == header);
  CHECK(text[header.size()] == '\n');
  CHECK(text.back() == '\n');
  CHECK(text.find("\r") == std::string::npos);

  // fields round-trip at full precision
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::string> fields;
  std::istringstream ls(line);
  std::string f;
  while (std::getline(ls, f, ',')) fields.push_back(f);
  REQUIRE(fields.size() == 11);
  CHECK(fields[0] == "noise_sweep");
  CHECK(fields[1] == "123456789012345");
  CHECK(std::stod(fields[3]) == row.sigma);
  CHECK(std::stod(fields[5]) == row.center_error);
  CHECK(std::isnan(std::stod(fields[6])));
  CHECK(fields[10] == "4");
}
