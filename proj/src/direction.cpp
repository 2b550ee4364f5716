#include "cyltri/direction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cyltri {

namespace {

constexpr double kRankTol = 1e-9;

Eigen::MatrixXd constraint_rows(const std::vector<ImageLine>& lines,
                                const std::vector<Camera>& cameras) {
  Eigen::MatrixXd A(lines.size(), 3);
  for (size_t i = 0; i < lines.size(); ++i) {
    const ImageLine& line = lines[i];
    if (line.camera < 0 || line.camera >= static_cast<int>(cameras.size())) {
      fail(ErrorCode::InvalidInput,
           "line " + std::to_string(i) + " references camera " +
               std::to_string(line.camera) + " out of range");
    }
    A.row(i) = line.l.transpose() * cameras[line.camera].rotation();
  }
  return A;
}

Eigen::Vector3d canonical_sign(Eigen::Vector3d w) {
  int imax = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(w(k)) > std::abs(w(imax))) imax = k;
  }
  if (w(imax) < 0.0) w = -w;
  return w;
}

DirectionEstimate lsq_on_rows(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() < 2 || sv(1) <= kRankTol * sv(0)) {
    fail(ErrorCode::RankDeficient,
         "direction constraints span < 2 dimensions (ambiguous axis)");
  }
  DirectionEstimate est;
  est.w = canonical_sign(svd.matrixV().col(2).normalized());
  est.singular_values = Eigen::Vector3d(sv(0), sv(1), sv.size() > 2 ? sv(2) : 0.0);
  return est;
}

}  // namespace

double angular_direction_residual(const ImageLine& line, const Camera& cam,
                                  const Eigen::Vector3d& w) {
  const Eigen::Vector3d row = cam.rotation().transpose() * line.l;
  const double n = row.norm();
  if (n == 0.0) return 0.0;
  const double s = std::clamp(row.dot(w) / n, -1.0, 1.0);
  return std::abs(std::asin(s));
}

DirectionEstimate estimate_direction_lsq(const std::vector<ImageLine>& lines,
                                         const std::vector<Camera>& cameras) {
  if (lines.size() < 2) {
    fail(ErrorCode::InvalidInput, "direction estimation needs >= 2 lines");
  }
  DirectionEstimate est = lsq_on_rows(constraint_rows(lines, cameras));
  est.inlier_ids.resize(lines.size());
  std::iota(est.inlier_ids.begin(), est.inlier_ids.end(), 0);
  return est;
}

DirectionEstimate estimate_direction_ransac(const std::vector<ImageLine>& lines,
                                            const std::vector<Camera>& cameras,
                                            const DirectionConfig& cfg) {
  const int n = static_cast<int>(lines.size());
  if (cfg.sample_size < 2) fail(ErrorCode::InvalidConfig, "sample_size must be >= 2");
  if (cfg.ransac_iterations < 1) {
    fail(ErrorCode::InvalidConfig, "ransac_iterations must be >= 1");
  }
  if (cfg.inlier_threshold <= 0.0) {
    fail(ErrorCode::InvalidConfig, "inlier_threshold must be > 0");
  }
  if (n < cfg.sample_size) {
    fail(ErrorCode::InvalidInput, "fewer lines than the RANSAC sample size");
  }

  const Eigen::MatrixXd A = constraint_rows(lines, cameras);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);

  auto count_inliers = [&](const Eigen::Vector3d& w, std::vector<int>* ids) {
    int count = 0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d row = A.row(i).transpose();
      const double nr = row.norm();
      const double s = nr == 0.0 ? 0.0 : std::clamp(row.dot(w) / nr, -1.0, 1.0);
      if (std::abs(std::asin(s)) <= cfg.inlier_threshold) {
        ++count;
        if (ids) ids->push_back(i);
      }
    }
    return count;
  };

  Eigen::Vector3d best_w = Eigen::Vector3d::Zero();
  int best_count = -1;
  std::vector<int> sample(cfg.sample_size);
  Eigen::MatrixXd rows(cfg.sample_size, 3);
  for (int it = 0; it < cfg.ransac_iterations; ++it) {
    for (int k = 0; k < cfg.sample_size; ++k) {
      int idx = pick(rng);
      while (std::find(sample.begin(), sample.begin() + k, idx) !=
             sample.begin() + k) {
        idx = pick(rng);
      }
      sample[k] = idx;
      rows.row(k) = A.row(idx);
    }
    Eigen::Vector3d w;
    try {
      w = lsq_on_rows(rows).w;
    } catch (const Error&) {
      continue;  // degenerate sample
    }
    const int count = count_inliers(w, nullptr);
    if (count > best_count) {
      best_count = count;
      best_w = w;
    }
  }

  if (best_count < cfg.sample_size + 1) {
    fail(ErrorCode::NoConsensus,
         "best consensus " + std::to_string(std::max(best_count, 0)) +
             " below sample_size + 1");
  }

  std::vector<int> inliers;
  count_inliers(best_w, &inliers);
  Eigen::MatrixXd inlier_rows(inliers.size(), 3);
  for (size_t i = 0; i < inliers.size(); ++i) inlier_rows.row(i) = A.row(inliers[i]);
  DirectionEstimate est = lsq_on_rows(inlier_rows);
  est.inlier_ids.clear();
  count_inliers(est.w, &est.inlier_ids);
  return est;
}

}  // namespace cyltri
