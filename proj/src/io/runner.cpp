#include "splat/io/runner.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "splat/compact/ssim.hpp"
#include "splat/io/image_io.hpp"
#include "splat/io/metrics.hpp"
#include "splat/io/ply.hpp"
#include "splat/io/synthetic.hpp"
#include "splat/kf/features.hpp"
#include "splat/kf/motion.hpp"
#include "splat/kf/window.hpp"
#include "splat/mapping/insertion.hpp"
#include "splat/mapping/mapper.hpp"
#include "splat/render/rasterizer.hpp"
#include "splat/track/tracker.hpp"

namespace splat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr size_t kAdmissionQueueCap = 4;

struct JsonLog {
  std::ofstream out;

  explicit JsonLog(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  }
  void write(const json& j) { out << j.dump() << '\n'; }
};

FramePtr make_frame(int index, const DatasetFrame& src) {
  FramePtr f = std::make_shared<Frame>();
  f->index = index;
  f->timestamp = src.timestamp;
  f->rgb = src.rgb;
  f->depth = src.depth;
  f->features = std::make_shared<FeatureMap>(extract_features(src.rgb));
  return f;
}

// Track against `map` starting from the decision's prediction, then attach
// the visibility set rendered at the final pose. First keyframe (empty map)
// keeps the prediction.
void track_and_mark(const GaussianMap& map, Frame& frame, const MotionDecision& dec,
                    const CameraIntrinsics& cam, const RunConfig& cfg,
                    RunReport& report, JsonLog& log) {
  frame.pose = dec.predicted_pose;
  double initial_loss = 0.0, final_loss = 0.0;
  int iterations = 0;
  if (map.size() > 0) {
    const TrackResult tr =
        track_keyframe(map, frame, cam, cfg.tracking, cfg.raster);
    initial_loss = tr.initial_loss;
    final_loss = tr.final_loss;
    iterations = tr.iterations;
    if (tr.lost) {
      frame.tracking_lost = true;
      ++report.tracking_lost;
    } else {
      frame.pose = tr.pose;
    }
  }
  const RenderOutput vis = render(map, frame.pose, cam, cfg.raster);
  frame.visible_ids = vis.visible_ids;
  log.write({{"event", "track"},
             {"frame", frame.index},
             {"iterations", iterations},
             {"initial_loss", initial_loss},
             {"final_loss", final_loss},
             {"lost", frame.tracking_lost},
             {"visible", frame.visible_ids.size()}});
}

void log_map_update(JsonLog& log, int frame_index, int inserted, int map_size,
                    const MapUpdateReport& rep) {
  json j = {{"event", "map_update"}, {"frame", frame_index},
            {"inserted", inserted},  {"gaussians", map_size},
            {"first_loss", rep.first_loss}, {"last_loss", rep.last_loss}};
  if (rep.densified) {
    j["densify"] = {{"cloned", rep.densify.cloned},
                    {"split", rep.densify.split},
                    {"pruned_opacity", rep.densify.pruned_opacity},
                    {"pruned_mask", rep.densify.pruned_mask}};
  }
  log.write(j);
}

struct PipelineState {
  GaussianMap map;
  Mapper mapper;
  KeyframeWindow window;
  std::vector<FramePtr> info_history;
  std::vector<FramePtr> trajectory_frames;
  MotionFilterState motion_state;

  PipelineState(const RunConfig& cfg, const CameraIntrinsics& cam)
      : mapper(cfg.mapping, cfg.raster, cam, cfg.seed) {}
};

// Insertion + joint optimization for one admitted keyframe; shared by both
// flows (in the threaded flow only the mapping thread calls it).
void mapping_step(PipelineState& st, const FramePtr& kf, const CameraIntrinsics& cam,
                  const RunConfig& cfg, JsonLog& log) {
  const int inserted =
      insert_gaussians(st.map, *kf, cam, cfg.raster, cfg.mapping.insertion_stride);
  const MapUpdateReport rep =
      st.mapper.map_update(st.map, st.window.members(), st.info_history);
  log_map_update(log, kf->index, inserted, st.map.size(), rep);
  if (cfg.mapping.color_refine_interval > 0 &&
      st.mapper.updates_done() % cfg.mapping.color_refine_interval == 0) {
    st.mapper.color_refinement(st.map, st.info_history);
    log.write({{"event", "color_refinement"},
               {"after_update", st.mapper.updates_done()}});
  }
}

void run_serial(const Dataset& ds, const RunConfig& cfg, PipelineState& st,
                RunReport& report, JsonLog& log) {
  const CameraIntrinsics& cam = ds.intrinsics;
  for (size_t i = 0; i < ds.frames.size(); ++i) {
    FramePtr frame = make_frame(static_cast<int>(i), ds.frames[i]);
    ++report.frames_processed;
    const MotionDecision dec = motion_filter(st.motion_state, *frame, cfg.window);
    log.write({{"event", "motion"},
               {"frame", frame->index},
               {"keyframe", dec.keyframe},
               {"flow_px", dec.mean_flow_px},
               {"low_texture", dec.low_texture},
               {"reason", dec.reason}});
    if (!dec.keyframe) continue;

    track_and_mark(st.map, *frame, dec, cam, cfg, report, log);
    st.motion_state.prev_kf = st.motion_state.last_kf;
    st.motion_state.last_kf = frame;
    st.trajectory_frames.push_back(frame);
    ++report.motion_keyframes;

    const WindowUpdate wu = st.window.update(frame, cfg.window);
    json wj = {{"event", "window"},
               {"frame", frame->index},
               {"admitted", wu.admitted},
               {"rc", wu.rc},
               {"reason", wu.reason}};
    if (wu.evicted_frame) wj["evicted"] = *wu.evicted_frame;
    log.write(wj);
    if (!wu.admitted) continue;

    st.info_history.push_back(frame);
    ++report.info_keyframes;
    mapping_step(st, frame, cam, cfg, log);
  }
}

// Threaded flow: this thread tracks, a worker maps. The map is published as
// immutable snapshots; window keyframe poses refined by the mapper are
// written back under the state mutex.
class MappingWorker {
 public:
  MappingWorker(PipelineState& st, const CameraIntrinsics& cam, const RunConfig& cfg,
                JsonLog& log)
      : st_(st), cam_(cam), cfg_(cfg), log_(log),
        snapshot_(std::make_shared<GaussianMap>()),
        thread_([this] { loop(); }) {}

  ~MappingWorker() {
    if (thread_.joinable()) {
      finish();
      thread_.join();
    }
  }

  void enqueue(const FramePtr& kf) {
    std::unique_lock lk(mu_);
    space_.wait(lk, [&] { return queue_.size() < kAdmissionQueueCap; });
    queue_.push_back(kf);
    ready_.notify_one();
  }

  void finish() {
    {
      std::lock_guard lk(mu_);
      done_ = true;
    }
    ready_.notify_one();
  }

  void join() {
    if (thread_.joinable()) thread_.join();
  }

  std::shared_ptr<const GaussianMap> snapshot() const {
    std::lock_guard lk(mu_);
    return snapshot_;
  }

  void admit(const FramePtr& kf) {
    {
      std::lock_guard lk(mu_);
      st_.info_history.push_back(kf);
    }
    enqueue(kf);
  }

  std::mutex& window_mutex() { return window_mu_; }

 private:
  void loop() {
    for (;;) {
      FramePtr kf;
      {
        std::unique_lock lk(mu_);
        ready_.wait(lk, [&] { return done_ || !queue_.empty(); });
        if (queue_.empty()) return;
        kf = queue_.front();
        queue_.pop_front();
      }
      space_.notify_one();
      process(kf);
    }
  }

  void process(const FramePtr& kf) {
    // Window members are optimized on clones so tracking never observes a
    // half-stepped pose; final poses are written back under the window
    // mutex, which also serializes the motion model's pose reads.
    std::vector<FramePtr> window_clones;
    std::vector<FramePtr> originals;
    std::vector<FramePtr> history;
    {
      std::lock_guard wlk(window_mu_);
      originals = st_.window.members();
      window_clones.reserve(originals.size());
      for (const FramePtr& f : originals)
        window_clones.push_back(std::make_shared<Frame>(*f));
    }
    {
      std::lock_guard lk(mu_);
      history = st_.info_history;
    }

    const int inserted = insert_gaussians(st_.map, *kf, cam_, cfg_.raster,
                                          cfg_.mapping.insertion_stride);
    const MapUpdateReport rep =
        st_.mapper.map_update(st_.map, window_clones, history);
    const bool refine = cfg_.mapping.color_refine_interval > 0 &&
                        st_.mapper.updates_done() % cfg_.mapping.color_refine_interval == 0;
    if (refine) st_.mapper.color_refinement(st_.map, history);

    {
      std::lock_guard wlk(window_mu_);
      for (size_t i = 0; i < originals.size(); ++i)
        originals[i]->pose = window_clones[i]->pose;
    }
    {
      std::lock_guard lk(mu_);
      snapshot_ = std::make_shared<GaussianMap>(st_.map);
    }
    log_map_update(log_, kf->index, inserted, st_.map.size(), rep);
    if (refine) {
      log_.write({{"event", "color_refinement"},
                  {"after_update", st_.mapper.updates_done()}});
    }
  }

  PipelineState& st_;
  const CameraIntrinsics& cam_;
  const RunConfig& cfg_;
  JsonLog& log_;

  mutable std::mutex mu_;
  std::mutex window_mu_;
  std::condition_variable ready_, space_;
  std::deque<FramePtr> queue_;
  bool done_ = false;
  std::shared_ptr<const GaussianMap> snapshot_;
  std::thread thread_;
};

void run_threaded(const Dataset& ds, const RunConfig& cfg, PipelineState& st,
                  RunReport& report, JsonLog& log) {
  const CameraIntrinsics& cam = ds.intrinsics;
  MappingWorker worker(st, cam, cfg, log);

  for (size_t i = 0; i < ds.frames.size(); ++i) {
    FramePtr frame = make_frame(static_cast<int>(i), ds.frames[i]);
    ++report.frames_processed;
    MotionDecision dec;
    {
      // The prediction reads recent keyframe poses, which mapping refines.
      std::lock_guard wlk(worker.window_mutex());
      dec = motion_filter(st.motion_state, *frame, cfg.window);
    }
    if (!dec.keyframe) continue;

    const std::shared_ptr<const GaussianMap> map = worker.snapshot();
    frame->pose = dec.predicted_pose;
    if (map->size() > 0) {
      const TrackResult tr = track_keyframe(*map, *frame, cam, cfg.tracking, cfg.raster);
      if (tr.lost) {
        frame->tracking_lost = true;
        ++report.tracking_lost;
      } else {
        frame->pose = tr.pose;
      }
    }
    const RenderOutput vis = render(*map, frame->pose, cam, cfg.raster);
    frame->visible_ids = vis.visible_ids;

    st.motion_state.prev_kf = st.motion_state.last_kf;
    st.motion_state.last_kf = frame;
    st.trajectory_frames.push_back(frame);
    ++report.motion_keyframes;

    WindowUpdate wu;
    {
      std::lock_guard wlk(worker.window_mutex());
      wu = st.window.update(frame, cfg.window);
    }
    if (!wu.admitted) continue;
    ++report.info_keyframes;
    worker.admit(frame);
  }
  worker.finish();
  worker.join();
}

Trajectory ground_truth_of(const Dataset& ds) {
  Trajectory gt;
  for (const DatasetFrame& f : ds.frames) {
    if (f.has_gt) gt.push_back({f.timestamp, f.gt_world_from_cam});
  }
  return gt;
}

} // namespace

std::string RunReport::to_json() const {
  json j = {{"ate_cm", ate_cm},
            {"mean_psnr", mean_psnr},
            {"mean_ssim", mean_ssim},
            {"final_gaussians", final_gaussians},
            {"map_bytes", map_bytes},
            {"fps", fps},
            {"frames_processed", frames_processed},
            {"motion_keyframes", motion_keyframes},
            {"info_keyframes", info_keyframes},
            {"tracking_lost", tracking_lost},
            {"dropped_frames", dropped_frames},
            {"output_dir", output_dir}};
  return j.dump(2);
}

RunReport run_slam_on(const Dataset& ds, const RunConfig& cfg) {
  if (ds.frames.empty()) throw std::invalid_argument("empty dataset");
  fs::create_directories(cfg.output);

  RunReport report;
  report.output_dir = cfg.output;
  report.dropped_frames = ds.dropped_frames;

  JsonLog log((fs::path(cfg.output) / "run_log.jsonl").string());
  PipelineState st(cfg, ds.intrinsics);

  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.single_thread)
    run_serial(ds, cfg, st, report, log);
  else
    run_threaded(ds, cfg, st, report, log);

  const DensifyReport final_rep = st.mapper.final_refinement(st.map, st.info_history);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.fps = wall > 0 ? report.frames_processed / wall : 0.0;
  log.write({{"event", "final_refinement"},
             {"before", final_rep.before},
             {"pruned_opacity", final_rep.pruned_opacity},
             {"pruned_mask", final_rep.pruned_mask},
             {"after", final_rep.after}});

  // Reconstruction quality against the information keyframes, final map.
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const FramePtr& kf : st.info_history) {
    const RenderOutput out = render(st.map, kf->pose, ds.intrinsics, cfg.raster);
    const double p = psnr(out.color, kf->rgb);
    const double s = ssim(out.color, kf->rgb);
    psnr_sum += p;
    ssim_sum += s;
    log.write({{"event", "keyframe_metrics"},
               {"frame", kf->index},
               {"psnr", p},
               {"ssim", s}});
    if (cfg.save_renders) {
      const std::string name = "render_" + std::to_string(kf->index) + ".png";
      write_png_rgb((fs::path(cfg.output) / name).string(), out.color);
    }
  }
  if (!st.info_history.empty()) {
    report.mean_psnr = psnr_sum / static_cast<double>(st.info_history.size());
    report.mean_ssim = ssim_sum / static_cast<double>(st.info_history.size());
  }

  for (const FramePtr& f : st.trajectory_frames)
    report.trajectory.push_back({f->timestamp, f->pose.inverse()});
  export_trajectory((fs::path(cfg.output) / "trajectory.txt").string(),
                    report.trajectory);

  const Trajectory gt = ground_truth_of(ds);
  if (gt.size() >= 3 && report.trajectory.size() >= 3) {
    try {
      report.ate_cm = ate_rmse_cm(report.trajectory, gt);
    } catch (const std::runtime_error&) {
      report.ate_cm = -1.0; // too few associations
    }
  }

  const std::string ply_path = (fs::path(cfg.output) / "map.ply").string();
  export_ply(ply_path, st.map);
  report.map_bytes = static_cast<std::uint64_t>(fs::file_size(ply_path));
  report.final_gaussians = st.map.size();

  std::ofstream metrics((fs::path(cfg.output) / "metrics.json").string());
  metrics << report.to_json() << '\n';
  log.write({{"event", "done"},
             {"ate_cm", report.ate_cm},
             {"mean_psnr", report.mean_psnr},
             {"gaussians", report.final_gaussians},
             {"fps", report.fps}});
  return report;
}

RunReport run_slam(const RunConfig& cfg) {
  if (cfg.format == "synthetic") {
    const SyntheticScene scene = generate_synthetic(cfg.seed, cfg.synth);
    return run_slam_on(scene.dataset, cfg);
  }
  if (cfg.format == "tum") {
    return run_slam_on(load_tum(cfg.dataset, cfg.tum_intrinsics()), cfg);
  }
  if (cfg.format == "folder") {
    return run_slam_on(load_folder(cfg.dataset), cfg);
  }
  throw std::invalid_argument("unknown dataset format '" + cfg.format + "'");
}

} // namespace splat
