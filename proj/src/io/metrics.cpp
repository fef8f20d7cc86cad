#include "splat/io/metrics.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "splat/simd/kernels.hpp"

namespace splat {

namespace {

constexpr double kAssocWindowSec = 0.02;
constexpr double kPsnrCapDb = 100.0;
constexpr double kPsnrMseFloor = 1e-10;

} // namespace

double ate_rmse_cm(const Trajectory& estimate, const Trajectory& reference) {
  std::vector<Eigen::Vector3d> est_pts, ref_pts;
  for (const TrajectoryPoint& e : estimate) {
    const TrajectoryPoint* best = nullptr;
    double best_dt = kAssocWindowSec;
    for (const TrajectoryPoint& r : reference) {
      const double dt = std::abs(r.timestamp - e.timestamp);
      if (dt <= best_dt) {
        best_dt = dt;
        best = &r;
      }
    }
    if (!best) continue;
    est_pts.push_back(e.world_from_cam.translation);
    ref_pts.push_back(best->world_from_cam.translation);
  }
  const int n = static_cast<int>(est_pts.size());
  if (n < 3) {
    throw std::runtime_error("trajectory alignment needs at least 3 associated poses, got " +
                             std::to_string(n));
  }

  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (int i = 0; i < n; ++i) {
    src.col(i) = est_pts[static_cast<size_t>(i)];
    dst.col(i) = ref_pts[static_cast<size_t>(i)];
  }
  const Eigen::Matrix4d align = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  const Eigen::Matrix3d rot = align.topLeftCorner<3, 3>();
  const Eigen::Vector3d trans = align.topRightCorner<3, 1>();

  double sq_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d residual = dst.col(i) - (rot * src.col(i) + trans);
    sq_sum += residual.squaredNorm();
  }
  return std::sqrt(sq_sum / n) * 100.0;
}

double psnr(const ImageD& a, const ImageD& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  const size_t n = a.size();
  if (n == 0) throw std::invalid_argument("psnr: empty image");
  const double mse = simd::sum_sq_diff(a.data(), b.data(), n) / static_cast<double>(n);
  if (mse < kPsnrMseFloor) return kPsnrCapDb;
  return 10.0 * std::log10(1.0 / mse);
}

} // namespace splat
