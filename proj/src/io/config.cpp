#include "splat/io/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace splat {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

double to_double(const std::string& v) {
  size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters in number");
  return d;
}

int to_int(const std::string& v) {
  size_t pos = 0;
  const int i = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters in integer");
  return i;
}

std::uint64_t to_u64(const std::string& v) {
  size_t pos = 0;
  const unsigned long long u = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters in integer");
  return static_cast<std::uint64_t>(u);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true/false/1/0, got '" + v + "'");
}

Eigen::Vector3d to_vec3(const std::string& v) {
  std::istringstream ss(v);
  Eigen::Vector3d r;
  if (!(ss >> r.x() >> r.y() >> r.z()))
    throw std::invalid_argument("expected three numbers, got '" + v + "'");
  std::string rest;
  if (ss >> rest) throw std::invalid_argument("trailing tokens in '" + v + "'");
  return r;
}

#define SET_D(field) [](RunConfig& c, const std::string& v) { c.field = to_double(v); }
#define SET_I(field) [](RunConfig& c, const std::string& v) { c.field = to_int(v); }
#define SET_B(field) [](RunConfig& c, const std::string& v) { c.field = to_bool(v); }
#define SET_S(field) [](RunConfig& c, const std::string& v) { c.field = v; }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", SET_S(dataset)},
      {"format",
       [](RunConfig& c, const std::string& v) {
         if (v != "tum" && v != "folder" && v != "synthetic")
           throw std::invalid_argument("format must be tum, folder or synthetic");
         c.format = v;
       }},
      {"output", SET_S(output)},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); }},
      {"single_thread", SET_B(single_thread)},
      {"save_renders", SET_B(save_renders)},

      {"fx", SET_D(fx)},
      {"fy", SET_D(fy)},
      {"cx", SET_D(cx)},
      {"cy", SET_D(cy)},
      {"width", SET_I(width)},
      {"height", SET_I(height)},
      {"depth_scale", SET_D(depth_scale)},

      {"background",
       [](RunConfig& c, const std::string& v) { c.raster.background = to_vec3(v); }},
      {"z_near", SET_D(raster.z_near)},
      {"z_far", SET_D(raster.z_far)},
      {"tile_size", SET_I(raster.tile_size)},
      {"stop_transmittance", SET_D(raster.stop_transmittance)},
      {"early_stop", SET_B(raster.early_stop)},
      {"mask_epsilon",
       [](RunConfig& c, const std::string& v) {
         const double e = to_double(v);
         c.raster.mask_epsilon = e;
         c.mapping.loss.mask_epsilon = e;
         c.mapping.densify.mask_epsilon = e;
       }},

      {"lambda_ssim", SET_D(mapping.loss.lambda_ssim)},
      {"lambda_mask", SET_D(mapping.loss.lambda_mask)},
      {"scale_reg_beta", SET_D(mapping.loss.scale_reg_beta)},

      {"motion_threshold", SET_D(window.motion_threshold)},
      {"max_frame_interval", SET_I(window.max_frame_interval)},
      {"info_threshold", SET_D(window.info_threshold)},
      {"min_mapping_distance", SET_I(window.min_mapping_distance)},
      {"window_capacity", SET_I(window.window_capacity)},
      {"oc_removal_threshold", SET_D(window.oc_removal_threshold)},

      {"track_iterations", SET_I(tracking.iterations)},
      {"track_lr_rotation", SET_D(tracking.lr_rotation)},
      {"track_lr_translation", SET_D(tracking.lr_translation)},
      {"track_convergence_tol", SET_D(tracking.convergence_tol)},
      {"depth_weight", SET_D(tracking.depth_weight)},

      {"random_history", SET_I(mapping.random_history)},
      {"iterations_per_update", SET_I(mapping.iterations_per_update)},
      {"insertion_stride", SET_I(mapping.insertion_stride)},
      {"densify_interval", SET_I(mapping.densify_interval)},
      {"color_refine_interval", SET_I(mapping.color_refine_interval)},
      {"color_refine_iterations", SET_I(mapping.color_refine_iterations)},
      {"refinement_iterations", SET_I(mapping.refinement_iterations)},

      {"scene_extent", SET_D(mapping.scene_extent)},
      {"lr_position", SET_D(mapping.lr_position)},
      {"lr_color", SET_D(mapping.lr_color)},
      {"lr_opacity", SET_D(mapping.lr_opacity)},
      {"lr_scale", SET_D(mapping.lr_scale)},
      {"lr_quaternion", SET_D(mapping.lr_quaternion)},
      {"lr_mask", SET_D(mapping.lr_mask)},
      {"lr_pose_translation", SET_D(mapping.lr_pose_translation)},
      {"lr_pose_rotation", SET_D(mapping.lr_pose_rotation)},

      {"densify_grad_threshold", SET_D(mapping.densify.grad_threshold)},
      {"densify_small_scale", SET_D(mapping.densify.small_scale)},
      {"densify_split_shrink", SET_D(mapping.densify.split_shrink)},
      {"densify_opacity_prune", SET_D(mapping.densify.opacity_prune)},

      {"synth_gaussians", SET_I(synth.gaussians)},
      {"synth_frames", SET_I(synth.frames)},
      {"synth_image_size", SET_I(synth.image_size)},
  };
  return table;
}

#undef SET_D
#undef SET_I
#undef SET_B
#undef SET_S

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

} // namespace

CameraIntrinsics RunConfig::tum_intrinsics() const {
  CameraIntrinsics cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.depth_scale = depth_scale;
  return cam;
}

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end())
    throw std::invalid_argument("unknown config key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("key '" + key + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("key '" + key + "': value out of range");
  }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": empty key");
    }
    try {
      apply_config_key(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_keys() {
  std::string out;
  for (const auto& [key, setter] : setters()) {
    out += key;
    out += '\n';
  }
  return out;
}

} // namespace splat
