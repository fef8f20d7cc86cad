#include "splat/mapping/insertion.hpp"

#include <cmath>
#include <stdexcept>

namespace splat {

namespace {

constexpr double kCoverageAlpha = 0.5;
constexpr double kMinScale = 1e-3; // 1 mm
constexpr double kMaxScale = 0.5;  // 0.5 m

} // namespace

int insert_gaussians(GaussianMap& map, const Frame& kf, const CameraIntrinsics& cam,
                     const RasterConfig& rcfg, int stride) {
    if (!kf.has_depth()) return 0;
    if (stride < 1) throw std::invalid_argument("insert_gaussians: stride must be >= 1");

    // empty maps render alpha 0 everywhere, so everything below passes
    ImageD alpha;
    if (map.size() > 0) alpha = render(map, kf.pose, cam, rcfg).alpha;

    const Pose world_from_cam = kf.pose.inverse();
    int added = 0;

    for (int y = 0; y < cam.height; y += stride) {
        for (int x = 0; x < cam.width; x += stride) {
            const double d = kf.depth.at(y, x);
            if (d <= 0.0) continue;
            if (!alpha.empty() && alpha.at(y, x) >= kCoverageAlpha) continue;

            const Eigen::Vector3d p_c{(x - cam.cx) / cam.fx * d, (y - cam.cy) / cam.fy * d, d};

            Gaussian g;
            g.position = world_from_cam.apply(p_c);
            const double s =
                std::clamp(d / cam.fx * static_cast<double>(stride) / 2.0, kMinScale, kMaxScale);
            g.log_scale.setConstant(std::log(s));
            g.opacity_logit = logit(0.5);
            for (int c = 0; c < 3; ++c) g.color[c] = kf.rgb.at(y, x, c);
            g.mask_logit = logit(0.99);
            map.add(g);
            ++added;
        }
    }
    return added;
}

} // namespace splat
