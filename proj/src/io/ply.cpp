#include "splat/io/ply.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace splat {

namespace {

constexpr int kPropsPerSplat = 14;

const std::array<const char*, kPropsPerSplat> kPropNames = {
    "x",     "y",     "z",     "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3", "opacity", "f_dc_0",  "f_dc_1",  "f_dc_2"};

static_assert(sizeof(float) == 4, "float32 layout assumed");

} // namespace

std::string ply_header(int count) {
  std::ostringstream h;
  h << "ply\n"
    << "format binary_little_endian 1.0\n"
    << "element vertex " << count << "\n";
  for (const char* name : kPropNames) h << "property float " << name << "\n";
  h << "end_header\n";
  return h.str();
}

void export_ply(const std::string& path, const GaussianMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::string header = ply_header(map.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<float> row(kPropsPerSplat);
  for (int i = 0; i < map.size(); ++i) {
    const Gaussian g = map.get(i);
    row[0] = static_cast<float>(g.position.x());
    row[1] = static_cast<float>(g.position.y());
    row[2] = static_cast<float>(g.position.z());
    row[3] = static_cast<float>(g.log_scale.x());
    row[4] = static_cast<float>(g.log_scale.y());
    row[5] = static_cast<float>(g.log_scale.z());
    row[6] = static_cast<float>(g.rotation.w());
    row[7] = static_cast<float>(g.rotation.x());
    row[8] = static_cast<float>(g.rotation.y());
    row[9] = static_cast<float>(g.rotation.z());
    row[10] = static_cast<float>(g.opacity_logit);
    row[11] = static_cast<float>(g.color.x());
    row[12] = static_cast<float>(g.color.y());
    row[13] = static_cast<float>(g.color.z());
    out.write(reinterpret_cast<const char*>(row.data()),
              kPropsPerSplat * static_cast<std::streamsize>(sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

GaussianMap load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw std::runtime_error(path + ": not a PLY file");
  if (!std::getline(in, line) || line != "format binary_little_endian 1.0")
    throw std::runtime_error(path + ": expected binary little-endian PLY");

  long long count = -1;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment") continue;
    if (tok == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex")
        throw std::runtime_error(path + ": unexpected element " + name);
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type != "float")
        throw std::runtime_error(path + ": property " + name + " is not float32");
      props.push_back(name);
    }
  }
  if (count < 0) throw std::runtime_error(path + ": missing vertex element");
  if (props.size() != kPropNames.size())
    throw std::runtime_error(path + ": expected " +
                             std::to_string(kPropNames.size()) + " properties, got " +
                             std::to_string(props.size()));
  for (size_t i = 0; i < props.size(); ++i) {
    if (props[i] != kPropNames[i])
      throw std::runtime_error(path + ": property " + std::to_string(i) +
                               " is " + props[i] + ", expected " + kPropNames[i]);
  }

  GaussianMap map;
  std::vector<float> row(kPropsPerSplat);
  for (long long i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            kPropsPerSplat * static_cast<std::streamsize>(sizeof(float)));
    if (!in) throw std::runtime_error(path + ": truncated payload");
    Gaussian g;
    g.position = Eigen::Vector3d(row[0], row[1], row[2]);
    g.log_scale = Eigen::Vector3d(row[3], row[4], row[5]);
    g.rotation = Eigen::Vector4d(row[6], row[7], row[8], row[9]);
    g.opacity_logit = row[10];
    g.color = Eigen::Vector3d(row[11], row[12], row[13]);
    g.mask_logit = 10.0; // fully active; this format carries no masks
    map.add(g);
  }
  map.set_masks_discarded();
  return map;
}

} // namespace splat
