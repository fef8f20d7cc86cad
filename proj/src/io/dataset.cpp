#include "splat/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

#include "splat/io/image_io.hpp"
#include "splat/io/trajectory.hpp"

namespace splat {

namespace {

namespace fs = std::filesystem;

constexpr double kAssocWindowSec = 0.02;

struct StampedPath {
  double timestamp;
  std::string path;
};

struct StampedPose {
  double timestamp;
  Pose world_from_cam;
};

// "timestamp path" per line, '#' comments allowed.
std::vector<StampedPath> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<StampedPath> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    StampedPath entry;
    if (!(ss >> entry.timestamp >> entry.path)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed index line");
    }
    out.push_back(std::move(entry));
  }
  std::sort(out.begin(), out.end(),
            [](const StampedPath& a, const StampedPath& b) {
              return a.timestamp < b.timestamp;
            });
  return out;
}

// "timestamp tx ty tz qx qy qz qw" per line (pose of the camera in the world).
std::vector<StampedPose> read_gt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<StampedPose> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed ground-truth line");
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-12) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": zero quaternion");
    }
    q.normalize();
    StampedPose p;
    p.timestamp = ts;
    p.world_from_cam.rotation = q.toRotationMatrix();
    p.world_from_cam.translation = Eigen::Vector3d(tx, ty, tz);
    out.push_back(p);
  }
  return out;
}

// Index of the nearest timestamp within the association window, -1 if none.
template <typename T>
int nearest_within(const std::vector<T>& items, double ts) {
  int best = -1;
  double best_dt = kAssocWindowSec;
  for (size_t i = 0; i < items.size(); ++i) {
    const double dt = std::abs(items[i].timestamp - ts);
    if (dt <= best_dt) {
      best_dt = dt;
      best = static_cast<int>(i);
    }
  }
  return best;
}

ImageD depth_to_meters(const Grid<std::uint16_t>& raw, double depth_scale) {
  ImageD out(raw.height(), raw.width(), 1);
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < raw.width(); ++x)
      out.at(y, x, 0) = raw.at(y, x, 0) / depth_scale;
  return out;
}

std::vector<std::string> sorted_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("missing directory " + dir.string());
  std::vector<std::string> out;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png")
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

Dataset load_tum(const std::string& dir, const CameraIntrinsics& intrinsics) {
  const fs::path root(dir);
  const std::vector<StampedPath> rgb_index =
      read_index_file((root / "rgb.txt").string());
  const std::vector<StampedPath> depth_index =
      read_index_file((root / "depth.txt").string());
  std::vector<StampedPose> gt;
  if (fs::exists(root / "groundtruth.txt"))
    gt = read_gt_file((root / "groundtruth.txt").string());

  Dataset ds;
  ds.intrinsics = intrinsics;
  for (const StampedPath& rgb_entry : rgb_index) {
    const int di = nearest_within(depth_index, rgb_entry.timestamp);
    if (di < 0) {
      ++ds.dropped_frames;
      continue;
    }
    DatasetFrame frame;
    frame.timestamp = rgb_entry.timestamp;
    frame.rgb = read_png_rgb((root / rgb_entry.path).string());
    frame.depth = depth_to_meters(
        read_png_gray16((root / depth_index[di].path).string()),
        intrinsics.depth_scale);
    if (!gt.empty()) {
      const int gi = nearest_within(gt, rgb_entry.timestamp);
      if (gi >= 0) {
        frame.has_gt = true;
        frame.gt_world_from_cam = gt[gi].world_from_cam;
      }
    }
    ds.frames.push_back(std::move(frame));
  }
  if (ds.frames.empty()) throw std::runtime_error("no associated frames under " + dir);
  return ds;
}

Dataset load_folder(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream intr((root / "intrinsics.txt").string());
  if (!intr)
    throw std::runtime_error("cannot open " + (root / "intrinsics.txt").string());
  CameraIntrinsics cam;
  if (!(intr >> cam.fx >> cam.fy >> cam.cx >> cam.cy >> cam.width >>
        cam.height >> cam.depth_scale)) {
    throw std::runtime_error((root / "intrinsics.txt").string() +
                             ":1: expected fx fy cx cy width height depth_scale");
  }

  const std::vector<std::string> rgb_paths = sorted_pngs(root / "rgb");
  const std::vector<std::string> depth_paths = sorted_pngs(root / "depth");
  if (rgb_paths.size() != depth_paths.size()) {
    throw std::runtime_error(dir + ": rgb/ has " + std::to_string(rgb_paths.size()) +
                             " frames, depth/ has " + std::to_string(depth_paths.size()));
  }

  Trajectory gt;
  if (fs::exists(root / "traj.txt"))
    gt = load_trajectory((root / "traj.txt").string());
  if (!gt.empty() && gt.size() != rgb_paths.size()) {
    throw std::runtime_error(dir + ": traj.txt has " + std::to_string(gt.size()) +
                             " poses for " + std::to_string(rgb_paths.size()) + " frames");
  }

  Dataset ds;
  ds.intrinsics = cam;
  for (size_t i = 0; i < rgb_paths.size(); ++i) {
    DatasetFrame frame;
    frame.timestamp = gt.empty() ? static_cast<double>(i) / 30.0 : gt[i].timestamp;
    frame.rgb = read_png_rgb(rgb_paths[i]);
    frame.depth = depth_to_meters(read_png_gray16(depth_paths[i]), cam.depth_scale);
    if (!gt.empty()) {
      frame.has_gt = true;
      frame.gt_world_from_cam = gt[i].world_from_cam;
    }
    ds.frames.push_back(std::move(frame));
  }
  if (ds.frames.empty()) throw std::runtime_error("no frames under " + dir);
  return ds;
}

} // namespace splat
