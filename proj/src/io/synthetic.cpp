#include "splat/io/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "splat/core/rng.hpp"
#include "splat/render/rasterizer.hpp"

namespace splat {

namespace {

// Camera at `eye` looking at the origin, image-down aligned with world -z
// (standard x-right, y-down, z-forward camera axes).
Pose look_at_origin(const Eigen::Vector3d& eye) {
    const Eigen::Vector3d forward = (-eye).normalized();
    Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d world_from_cam_rot;
    world_from_cam_rot.col(0) = right;
    world_from_cam_rot.col(1) = down;
    world_from_cam_rot.col(2) = forward;
    Pose cam_from_world;
    cam_from_world.rotation = world_from_cam_rot.transpose();
    cam_from_world.translation = -(cam_from_world.rotation * eye);
    return cam_from_world;
}

} // namespace

SyntheticScene generate_synthetic(std::uint64_t seed, const SyntheticSpec& spec) {
    Rng rng(seed);
    SyntheticScene scene;

    for (int i = 0; i < spec.gaussians; ++i) {
        Gaussian g;
        const double h = spec.box_half_extent;
        g.position = Eigen::Vector3d(rng.uniform(-h, h), rng.uniform(-h, h),
                                     rng.uniform(-h, h));
        Eigen::Vector4d q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        if (q.norm() < 1e-9) q = Eigen::Vector4d(1, 0, 0, 0);
        g.rotation = q.normalized();
        for (int k = 0; k < 3; ++k)
            g.log_scale[k] = std::log(rng.uniform(0.04, 0.12));
        // near-solid splats: covered pixels then reach alpha ~= 1, so the
        // composited depth is metric and depth supervision is unbiased
        g.opacity_logit = rng.uniform(2.5, 5.0);
        // quarter of the splats get independent high-contrast colors (texture
        // anchors for photometric tracking), the rest follow a smooth spatial
        // color field so overlapping neighbors look alike and are redundant,
        // the way flat wall regions are in real scenes
        if (rng.uniform() < 0.25) {
            g.color = Eigen::Vector3d(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                                      rng.uniform(0.05, 0.95));
        } else {
            const Eigen::Vector3d& p = g.position;
            g.color = Eigen::Vector3d(
                0.5 + 0.38 * std::sin(1.9 * p.x() + 0.7 * p.z()) + rng.uniform(-0.04, 0.04),
                0.5 + 0.38 * std::sin(1.6 * p.y() - 0.5 * p.x()) + rng.uniform(-0.04, 0.04),
                0.5 + 0.38 * std::sin(1.3 * p.z() + 1.1 * p.y()) + rng.uniform(-0.04, 0.04));
            for (int k = 0; k < 3; ++k) g.color[k] = std::clamp(g.color[k], 0.03, 0.97);
        }
        g.mask_logit = logit(0.99);
        scene.ground_truth_map.add(g);
    }

    CameraIntrinsics cam;
    cam.fx = cam.fy = spec.focal;
    cam.width = cam.height = spec.image_size;
    cam.cx = 0.5 * (spec.image_size - 1);
    cam.cy = 0.5 * (spec.image_size - 1);
    scene.dataset.intrinsics = cam;

    RasterConfig rcfg;
    const double solid_alpha = 0.5;

    const double span = spec.orbit_span_deg * M_PI / 180.0;
    for (int f = 0; f < spec.frames; ++f) {
        const double theta = span * f / spec.frames;
        const Eigen::Vector3d eye(spec.orbit_radius * std::cos(theta),
                                  spec.orbit_radius * std::sin(theta),
                                  spec.camera_height);
        const Pose pose = look_at_origin(eye);
        const RenderOutput out =
            render_reference(scene.ground_truth_map, pose, cam, rcfg);

        DatasetFrame frame;
        frame.timestamp = f / spec.fps;
        frame.rgb = out.color;
        frame.depth = ImageD(cam.height, cam.width, 1);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                const double a = out.alpha.at(y, x, 0);
                if (a >= solid_alpha) {
                    const double d = out.depth.at(y, x, 0) / a +
                                     spec.depth_noise_sigma * rng.normal();
                    frame.depth.at(y, x, 0) = std::max(d, 0.05);
                } else {
                    frame.depth.at(y, x, 0) = 0.0;
                }
            }
        }
        frame.has_gt = true;
        frame.gt_world_from_cam = pose.inverse();
        scene.dataset.frames.push_back(std::move(frame));
    }
    return scene;
}

} // namespace splat
