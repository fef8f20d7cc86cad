#include "splat/io/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace splat {

void export_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char line[256];
  for (const TrajectoryPoint& p : traj) {
    const Eigen::Quaterniond q(p.world_from_cam.rotation);
    const Eigen::Vector3d& t = p.world_from_cam.translation;
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f\n",
                  p.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << line;
  }
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Trajectory traj;
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
                               ": malformed trajectory line");
    }
    TrajectoryPoint p;
    p.timestamp = ts;
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-12) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": zero quaternion");
    }
    q.normalize();
    p.world_from_cam.rotation = q.toRotationMatrix();
    p.world_from_cam.translation = Eigen::Vector3d(tx, ty, tz);
    traj.push_back(p);
  }
  return traj;
}

} // namespace splat
