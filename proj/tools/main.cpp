#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "splat/io/config.hpp"
#include "splat/io/dataset.hpp"
#include "splat/io/image_io.hpp"
#include "splat/io/metrics.hpp"
#include "splat/io/ply.hpp"
#include "splat/io/runner.hpp"
#include "splat/io/synthetic.hpp"
#include "splat/io/trajectory.hpp"
#include "splat/render/rasterizer.hpp"

namespace {

namespace fs = std::filesystem;

struct RunArgs {
  std::string config;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool single_thread = false;
};

int cmd_run(const RunArgs& args) {
  splat::RunConfig cfg = splat::parse_config_file(args.config);
  if (!args.format.empty()) cfg.format = args.format;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.single_thread) cfg.single_thread = true;
  const splat::RunReport report = splat::run_slam(cfg);
  std::printf("%s\n", report.to_json().c_str());
  return 0;
}

struct RenderArgs {
  std::string map_path, pose_path, out_path;
  double fx = 70.0, fy = 70.0, cx = 31.5, cy = 31.5;
  int width = 64, height = 64;
};

int cmd_render(const RenderArgs& args) {
  const splat::GaussianMap map = splat::load_ply(args.map_path);
  const splat::Trajectory poses = splat::load_trajectory(args.pose_path);
  if (poses.empty()) {
    std::fprintf(stderr, "%s: no pose lines\n", args.pose_path.c_str());
    return 1;
  }
  splat::CameraIntrinsics cam;
  cam.fx = args.fx;
  cam.fy = args.fy;
  cam.cx = args.cx;
  cam.cy = args.cy;
  cam.width = args.width;
  cam.height = args.height;
  const splat::Pose cam_from_world = poses.front().world_from_cam.inverse();
  const splat::RenderOutput out = splat::render(map, cam_from_world, cam);
  splat::write_png_rgb(args.out_path, out.color);
  std::printf("rendered %d splats to %s\n", map.size(), args.out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& gt_path) {
  const splat::Trajectory est = splat::load_trajectory(est_path);
  const splat::Trajectory gt = splat::load_trajectory(gt_path);
  const double ate = splat::ate_rmse_cm(est, gt);
  std::printf("ate_rmse_cm %.6f\n", ate);
  return 0;
}

int cmd_synth(std::uint64_t seed, const std::string& out_dir) {
  const splat::SyntheticScene scene = splat::generate_synthetic(seed);
  const splat::Dataset& ds = scene.dataset;
  fs::create_directories(fs::path(out_dir) / "rgb");
  fs::create_directories(fs::path(out_dir) / "depth");

  const splat::CameraIntrinsics& cam = ds.intrinsics;
  {
    std::FILE* f = std::fopen((fs::path(out_dir) / "intrinsics.txt").c_str(), "w");
    if (!f) {
      std::fprintf(stderr, "cannot write intrinsics.txt\n");
      return 1;
    }
    std::fprintf(f, "%.6f %.6f %.6f %.6f %d %d %.1f\n", cam.fx, cam.fy, cam.cx,
                 cam.cy, cam.width, cam.height, cam.depth_scale);
    std::fclose(f);
  }

  splat::Trajectory gt;
  for (size_t i = 0; i < ds.frames.size(); ++i) {
    const splat::DatasetFrame& frame = ds.frames[i];
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.png", i);
    splat::write_png_rgb((fs::path(out_dir) / "rgb" / name).string(), frame.rgb);

    splat::Grid<std::uint16_t> depth16(frame.depth.height(), frame.depth.width(), 1);
    for (int y = 0; y < frame.depth.height(); ++y)
      for (int x = 0; x < frame.depth.width(); ++x) {
        const double d = frame.depth.at(y, x, 0) * cam.depth_scale;
        depth16.at(y, x, 0) =
            static_cast<std::uint16_t>(std::min(d, 65535.0) + 0.5);
      }
    splat::write_png_gray16((fs::path(out_dir) / "depth" / name).string(), depth16);
    gt.push_back({frame.timestamp, frame.gt_world_from_cam});
  }
  splat::export_trajectory((fs::path(out_dir) / "traj.txt").string(), gt);
  splat::export_ply((fs::path(out_dir) / "gt_map.ply").string(),
                    scene.ground_truth_map);
  std::printf("wrote %zu frames to %s\n", ds.frames.size(), out_dir.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGB-D SLAM with compact 3D Gaussian splat maps"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run the full pipeline on a dataset");
  run->add_option("--config", run_args.config, "key = value config file")->required();
  run->add_option("--dataset-format", run_args.format, "override format")
      ->check(CLI::IsMember({"tum", "folder", "synthetic"}));
  CLI::Option* seed_opt = run->add_option("--seed", run_args.seed, "override seed");
  run->add_flag("--single-thread", run_args.single_thread,
                "serial tracking+mapping (reproducible)");

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand("render", "Render a splat map from a pose");
  render->add_option("--map", render_args.map_path, "splat PLY file")->required();
  render->add_option("--pose", render_args.pose_path,
                     "trajectory-format file; first line is used")
      ->required();
  render->add_option("--out", render_args.out_path, "output PNG")->required();
  render->add_option("--fx", render_args.fx);
  render->add_option("--fy", render_args.fy);
  render->add_option("--cx", render_args.cx);
  render->add_option("--cy", render_args.cy);
  render->add_option("--width", render_args.width);
  render->add_option("--height", render_args.height);

  std::string est_path, gt_path;
  CLI::App* eval = app.add_subcommand("eval", "Trajectory error between estimates");
  eval->add_option("--est", est_path, "estimated trajectory")->required();
  eval->add_option("--gt", gt_path, "reference trajectory")->required();

  std::uint64_t synth_seed = 0;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--seed", synth_seed, "scene seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      run_args.seed_set = seed_opt->count() > 0;
      return cmd_run(run_args);
    }
    if (render->parsed()) return cmd_render(render_args);
    if (eval->parsed()) return cmd_eval(est_path, gt_path);
    if (synth->parsed()) return cmd_synth(synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
