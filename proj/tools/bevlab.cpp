// bevlab: command-line front end for the BEV label pipeline.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bevlab/bev_truth.hpp"
#include "bevlab/clustering.hpp"
#include "bevlab/depth_labels.hpp"
#include "bevlab/dynamics.hpp"
#include "bevlab/error.hpp"
#include "bevlab/eval.hpp"
#include "bevlab/geometry.hpp"
#include "bevlab/io.hpp"
#include "bevlab/log.hpp"
#include "bevlab/losses.hpp"
#include "bevlab/manifest.hpp"
#include "bevlab/mask_bev.hpp"
#include "bevlab/render.hpp"
#include "bevlab/splat.hpp"
#include "bevlab/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bevlab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return kExitIo;
    case ErrorCode::NonFiniteLoss:
      return kExitNumeric;
    default:
      return kExitValidation;
  }
}

// Runs fn(0..n-1) on up to `jobs` threads. The first failing index (in
// index order) is rethrown so errors are reported deterministically.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string frame_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu%s", i, ext);
  return buf;
}

void write_json(const fs::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

void require_finite(double v, const std::string& what) {
  require(std::isfinite(v), ErrorCode::NonFiniteLoss, what + " is not finite");
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorCode::InvalidArgument, "range must look like lo:hi");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "cannot parse range " + text);
  }
}

// Scans of a directory paired index-wise with the pose file.
struct Sequence {
  std::vector<fs::path> scans;
  std::vector<Pose> poses;
};

Sequence load_sequence(const fs::path& scan_dir, const fs::path& pose_file) {
  Sequence seq;
  seq.scans = io::list_scans(scan_dir);
  seq.poses = io::read_poses(pose_file);
  require(!seq.scans.empty(), ErrorCode::ValidationError, "no .pcb scans in " + scan_dir.string());
  require(seq.scans.size() == seq.poses.size(), ErrorCode::ValidationError,
          "scan count (" + std::to_string(seq.scans.size()) + ") differs from pose count (" +
              std::to_string(seq.poses.size()) + ")");
  return seq;
}

// Window of `count` frames ending at `last`.
std::pair<std::size_t, std::size_t> window(std::size_t last, int count) {
  const std::size_t n = static_cast<std::size_t>(std::max(1, count));
  return {last + 1 >= n ? last + 1 - n : 0, last};
}

const Pose& pose_for(const std::vector<Pose>& poses, double timestamp) {
  for (const auto& p : poses) {
    if (std::abs(p.timestamp - timestamp) <= 1e-6) return p;
  }
  fail(ErrorCode::ValidationError, "no pose with timestamp " + std::to_string(timestamp));
}

std::size_t resolve_frame(long index, std::size_t count) {
  if (index < 0) index += static_cast<long>(count);
  require(index >= 0 && static_cast<std::size_t>(index) < count, ErrorCode::InvalidArgument,
          "frame index out of range");
  return static_cast<std::size_t>(index);
}

json iou_json(const IouReport& report) {
  json per_class = json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    if (report.per_class[c]) per_class[std::to_string(c)] = *report.per_class[c];
  }
  return json{{"per_class", per_class}, {"miou", report.miou}, {"cells", report.confusion.total()}};
}

// ---- synth -------------------------------------------------------------------

struct SynthOptions {
  std::uint64_t seed = 7;
  int frames = 60;
  fs::path out;
  int num_dynamic = 2;
  int num_regions = 6;
  int num_classes = 4;
  double speed = 1.5;
  double dt = 0.1;
  int feature_dim = 16;
  double feature_sigma = 0.25;
  std::string grid = "256x256x0.1";
};

void run_synth(const SynthOptions& o, int jobs) {
  require(o.frames >= 1, ErrorCode::InvalidArgument, "need at least one frame");
  synth::SceneConfig sc;
  sc.num_dynamic = o.num_dynamic;
  sc.num_regions = o.num_regions;
  sc.num_classes = o.num_classes;
  const synth::Scene scene = synth::generate_scene(o.seed, sc);
  const synth::RigConfig rig = synth::default_rig();
  const GridConfig grid = io::parse_grid_spec(o.grid);
  const auto poses = synth::straight_trajectory(scene, o.frames, o.dt, o.speed, 0.0, {0.0, 0.0}, rig.sensor_height);

  fs::create_directories(o.out);
  io::write_poses(o.out / "poses.txt", poses);
  io::write_camera(o.out / "camera.txt", {rig.camera, rig.baseline});

  parallel_for(poses.size(), jobs, [&](std::size_t i) {
    const synth::RenderedFrame f = synth::render_frame(scene, poses[i], rig, poses[i].timestamp, o.seed * 7919 + i);
    io::write_pcb(o.out / "scans" / frame_name(i, ".pcb"), f.scan);
    io::write_pgm8(o.out / "left" / frame_name(i, ".pgm"), f.left);
    io::write_pgm8(o.out / "right" / frame_name(i, ".pgm"), f.right);
    io::write_pgm16(o.out / "depth" / frame_name(i, ".pgm"), io::encode_depth_mm(f.depth));
    io::write_label_pgm(o.out / "masks" / frame_name(i, ".pgm"), f.instances);
    io::write_label_pgm(o.out / "classes" / frame_name(i, ".pgm"), f.classes);
    io::write_flag_pgm(o.out / "movable" / frame_name(i, ".pgm"), f.movable);

    // Class-conditioned per-pixel features standing in for foundation features.
    io::FeatureMap fm;
    fm.width = f.classes.width();
    fm.height = f.classes.height();
    fm.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f.classes.size()), o.feature_dim);
    std::mt19937_64 rng(o.seed * 104729 + i);
    std::normal_distribution<double> noise(0.0, o.feature_sigma);
    for (std::size_t p = 0; p < f.classes.size(); ++p) {
      const auto row = static_cast<Eigen::Index>(p);
      if (f.classes[p] != 0) fm.features(row, f.classes[p] % o.feature_dim) = 4.0;
      for (int c = 0; c < o.feature_dim; ++c) fm.features(row, c) += noise(rng);
    }
    io::write_fmap(o.out / "features" / frame_name(i, ".fmap"), fm);

    const GridConfig frame_grid = grid.with_frame(ego_frame(poses[i]));
    io::write_bevg(o.out / "semantic" / frame_name(i, ".bevg"), synth::analytic_semantic_grid(scene, frame_grid));
  });

  Manifest m;
  m.root = o.out;
  m.poses = "poses.txt";
  m.cameras["front"] = "camera.txt";
  const std::size_t n = poses.size();
  const std::size_t n_train = n * 70 / 100;
  const std::size_t n_val = n * 15 / 100;
  for (std::size_t i = 0; i < n; ++i) {
    FrameRecord r;
    r.timestamp = poses[i].timestamp;
    r.scan = "scans/" + frame_name(i, ".pcb");
    r.pose_index = i;
    r.camera = "front";
    r.mask = "masks/" + frame_name(i, ".pgm");
    r.depth = "depth/" + frame_name(i, ".pgm");
    r.features = "features/" + frame_name(i, ".fmap");
    r.semantic = "semantic/" + frame_name(i, ".bevg");
    r.movable = "movable/" + frame_name(i, ".pgm");
    r.left = "left/" + frame_name(i, ".pgm");
    r.right = "right/" + frame_name(i, ".pgm");
    if (i < n_train) {
      r.splits = {"pretrain", "train"};
    } else if (i < n_train + n_val) {
      r.splits = {"val"};
    } else {
      r.splits = {"test"};
    }
    m.frames.push_back(std::move(r));
  }
  save_manifest(o.out / "manifest.json", m);
  logger().info("synth: wrote {} frames to {}", n, o.out.string());
}

// ---- depth-gt ----------------------------------------------------------------

struct DepthGtOptions {
  fs::path scans, poses, camera, left, right, disparity, out, report, manifest, out_dir;
  long frame = -1;
  int accumulate = 50;
  double rel_threshold = 0.30;
  int idw_radius = 4;
  double idw_power = 2.0;
  double edge_sigma = 0.0;
  double max_depth = 51.2;
};

DepthLabelConfig depth_config(const DepthGtOptions& o) {
  DepthLabelConfig cfg;
  cfg.rel_threshold = o.rel_threshold;
  cfg.idw.window_radius = o.idw_radius;
  cfg.idw.power = o.idw_power;
  cfg.idw.edge_sigma = o.edge_sigma;
  cfg.use_guide = o.edge_sigma > 0.0;
  cfg.max_depth = o.max_depth;
  require(cfg.rel_threshold > 0.0 && cfg.rel_threshold <= 1.0, ErrorCode::InvalidArgument,
          "rel-threshold must be in (0, 1]");
  require(cfg.idw.window_radius >= 1 && cfg.idw.power > 0.0, ErrorCode::InvalidArgument,
          "idw radius must be >= 1 and power > 0");
  return cfg;
}

json depth_label_for(const std::vector<fs::path>& scan_paths, const std::vector<Pose>& poses, std::size_t first,
                     std::size_t last, const CameraModel& camera, const io::CameraFile& cam_file,
                     const fs::path& left, const fs::path& right, const fs::path& disparity,
                     const DepthLabelConfig& cfg, const fs::path& out) {
  std::vector<PointCloud> scans;
  std::vector<Pose> scan_poses;
  for (std::size_t k = first; k <= last; ++k) {
    scans.push_back(io::read_pcb(scan_paths[k]));
    scan_poses.push_back(poses[k]);
  }
  StereoInput stereo;
  stereo.baseline = cam_file.baseline.value_or(0.0);
  GrayImage left_img, right_img;
  DisparityMap disp;
  if (!disparity.empty()) {
    disp = io::decode_disparity(io::read_pgm16(disparity));
    stereo.disparity = &disp;
  } else {
    require(!left.empty() && !right.empty(), ErrorCode::InvalidArgument,
            "depth-gt needs --stereo-left/--stereo-right or --disparity");
    left_img = io::read_pgm8(left);
    right_img = io::read_pgm8(right);
    stereo.left = &left_img;
    stereo.right = &right_img;
  }
  require(stereo.baseline > 0.0, ErrorCode::ValidationError, "camera file has no positive baseline");
  const DepthLabel label = make_depth_label(scans, scan_poses, camera, stereo, cfg);
  for (double d : label.label.data()) require_finite(d, "depth label");
  io::write_pgm16(out, io::encode_depth_mm(label.label));
  return json{{"scans", last - first + 1},
              {"density_accumulated", density(label.accumulated)},
              {"density_before", label.density_before},
              {"density_after", label.density_after},
              {"stereo_density", density(label.stereo)}};
}

void run_depth_gt(const DepthGtOptions& o, int jobs) {
  const DepthLabelConfig cfg = depth_config(o);
  json report;
  if (!o.manifest.empty()) {
    require(!o.out_dir.empty(), ErrorCode::InvalidArgument, "--manifest needs --out-dir");
    const Manifest m = load_manifest(o.manifest);
    require_valid(m);
    const auto all_poses = io::read_poses(m.resolve(m.poses));
    std::vector<fs::path> scan_paths;
    std::vector<Pose> poses;
    for (const auto& f : m.frames) {
      scan_paths.push_back(m.resolve(f.scan));
      poses.push_back(all_poses[f.pose_index]);
    }
    std::vector<json> frames(m.frames.size());
    parallel_for(m.frames.size(), jobs, [&](std::size_t i) {
      const FrameRecord& f = m.frames[i];
      const io::CameraFile cam = io::read_camera(m.resolve(m.cameras.at(f.camera)));
      require(f.disparity || (f.left && f.right), ErrorCode::ValidationError,
              "frame " + std::to_string(i) + " has no stereo pair or disparity");
      const auto [first, last] = window(i, o.accumulate);
      frames[i] = depth_label_for(scan_paths, poses, first, last, camera_at(cam.camera, poses[i]), cam,
                                  f.left ? m.resolve(*f.left) : fs::path(), f.right ? m.resolve(*f.right) : fs::path(),
                                  f.disparity ? m.resolve(*f.disparity) : fs::path(), cfg,
                                  o.out_dir / frame_name(i, ".pgm"));
    });
    report = json{{"frames", frames}};
  } else {
    require(!o.scans.empty() && !o.poses.empty() && !o.camera.empty() && !o.out.empty(), ErrorCode::InvalidArgument,
            "depth-gt needs --scans, --poses, --camera and --out (or --manifest)");
    const Sequence seq = load_sequence(o.scans, o.poses);
    const io::CameraFile cam = io::read_camera(o.camera);
    const std::size_t i = resolve_frame(o.frame, seq.scans.size());
    const auto [first, last] = window(i, o.accumulate);
    report = depth_label_for(seq.scans, seq.poses, first, last, camera_at(cam.camera, seq.poses[i]), cam, o.left,
                             o.right, o.disparity, cfg, o.out);
    report["frame"] = i;
  }
  if (!o.report.empty()) write_json(o.report, report);
}

// ---- static-map / dynamic-mask ------------------------------------------------

struct StaticMapOptions {
  fs::path scans, poses, out;
  double voxel = 0.2;
  int min_obs = 2;
};

std::vector<PointCloud> world_clouds(const Sequence& seq, std::size_t first, std::size_t last) {
  std::vector<PointCloud> clouds;
  for (std::size_t k = first; k <= last; ++k) {
    const PointCloud scan = io::read_pcb(seq.scans[k]);
    require(std::abs(scan.timestamp - seq.poses[k].timestamp) <= 1e-6, ErrorCode::ValidationError,
            "scan " + seq.scans[k].filename().string() + " timestamp differs from its pose");
    PointCloud w = transform_cloud(scan, seq.poses[k]);
    w.frame = Frame::World;
    clouds.push_back(std::move(w));
  }
  return clouds;
}

void run_static_map(const StaticMapOptions& o) {
  const Sequence seq = load_sequence(o.scans, o.poses);
  const auto clouds = world_clouds(seq, 0, seq.scans.size() - 1);
  const VoxelMap map = build_static_map(clouds, o.voxel, o.min_obs);
  io::write_pcb(o.out, map.to_cloud());
  logger().info("static-map: {} static points in {} voxels", map.point_count(), map.voxel_count());
}

struct DynamicMaskOptions {
  fs::path scan, static_map, camera, poses, out, points_out;
  int k = 1;
  double radius = 0.2;
  double voxel = 0.2;
  int dilation = 2;
};

void run_dynamic_mask(const DynamicMaskOptions& o) {
  const PointCloud scan = io::read_pcb(o.scan);
  // Without a pose file the scan is taken to be in the world frame already.
  Pose pose = Pose::identity(scan.timestamp);
  if (!o.poses.empty()) pose = pose_for(io::read_poses(o.poses), scan.timestamp);
  PointCloud world = transform_cloud(scan, pose);
  world.frame = Frame::World;
  const PointCloud static_cloud = io::read_pcb(o.static_map, Frame::World);
  const VoxelMap map = VoxelMap::from_points(static_cloud.points, o.voxel);
  const auto flags = classify_dynamic(world, map, o.k, o.radius);
  const PointCloud dynamic = select_points(world, flags, Motion::Dynamic);
  const io::CameraFile cam = io::read_camera(o.camera);
  io::write_flag_pgm(o.out, render_movable_mask(dynamic, camera_at(cam.camera, pose), o.dilation));
  if (!o.points_out.empty()) io::write_pcb(o.points_out, dynamic);
}

// ---- lift-masks ----------------------------------------------------------------

struct LiftOptions {
  fs::path manifest, out;
  std::string grid = "256x256x0.1";
  long anchor = -1;
  std::string frames;  // "a:b" inclusive range, default all
  bool use_movable = true;
};

void run_lift_masks(const LiftOptions& o, int jobs) {
  const Manifest m = load_manifest(o.manifest);
  require_valid(m);
  const auto poses = io::read_poses(m.resolve(m.poses));
  std::size_t first = 0, last = m.frames.size() - 1;
  if (!o.frames.empty()) {
    const auto [a, b] = parse_range(o.frames);
    first = resolve_frame(static_cast<long>(a), m.frames.size());
    last = resolve_frame(static_cast<long>(b), m.frames.size());
    require(first <= last, ErrorCode::InvalidArgument, "empty frame range");
  }
  const std::size_t anchor = resolve_frame(o.anchor, m.frames.size());
  const GridConfig grid = io::parse_grid_spec(o.grid).with_frame(ego_frame(poses[m.frames[anchor].pose_index]));

  const std::size_t n = last - first + 1;
  std::vector<LabelMask> masks(n);
  std::vector<DepthImage> depths(n);
  std::vector<MovableMask> movables(n);
  std::vector<CameraModel> cameras(n);
  parallel_for(n, jobs, [&](std::size_t k) {
    const FrameRecord& f = m.frames[first + k];
    require(f.mask.has_value() && f.depth.has_value(), ErrorCode::ValidationError,
            "frame " + std::to_string(first + k) + " needs mask and depth");
    masks[k] = io::read_label_pgm(m.resolve(*f.mask));
    depths[k] = io::decode_depth_mm(io::read_pgm16(m.resolve(*f.depth)));
    if (o.use_movable && f.movable) movables[k] = io::read_flag_pgm(m.resolve(*f.movable));
    cameras[k] = camera_at(io::read_camera(m.resolve(m.cameras.at(f.camera))).camera, poses[f.pose_index]);
  });
  std::vector<MaskFrame> frames;
  for (std::size_t k = 0; k < n; ++k) {
    frames.push_back({&masks[k], &depths[k], cameras[k], movables[k].empty() ? nullptr : &movables[k]});
  }
  const LabelMask merged = accumulate_bev_masks(frames, grid);
  io::write_bevg(o.out, to_label_grid(merged, grid));
}

// ---- bev-gt --------------------------------------------------------------------

struct BevGtOptions {
  fs::path scans, poses, camera, out_sem, out_elev, out_partition;
  std::string grid = "256x256x0.1";
  std::string elev_range = "-1.2:1.8";
  long frame = -1;
  int accumulate = 50;
  bool filter_dynamic = true;
  double voxel = 0.2;
  int min_obs = 2;
  int k = 1;
  double radius = 0.2;
};

void run_bev_gt(const BevGtOptions& o) {
  const Sequence seq = load_sequence(o.scans, o.poses);
  const std::size_t i = resolve_frame(o.frame, seq.scans.size());
  const auto [first, last] = window(i, o.accumulate);
  const auto clouds = world_clouds(seq, first, last);
  const GridConfig grid = io::parse_grid_spec(o.grid).with_frame(ego_frame(seq.poses[i]));
  const auto [lo, hi] = parse_range(o.elev_range);
  require(lo < hi, ErrorCode::InvalidArgument, "elevation range must satisfy lo < hi");

  if (!o.out_sem.empty()) io::write_bevg(o.out_sem, build_semantic_map(clouds, grid));
  if (!o.out_elev.empty()) {
    std::vector<std::vector<Motion>> flags;
    if (o.filter_dynamic && clouds.size() >= 2) {
      const VoxelMap map = build_static_map(clouds, o.voxel, o.min_obs);
      for (const auto& c : clouds) {
        flags.push_back(map.empty() ? std::vector<Motion>(c.size(), Motion::Static)
                                    : classify_dynamic(c, map, o.k, o.radius));
      }
    } else {
      for (const auto& c : clouds) flags.emplace_back(c.size(), Motion::Static);
    }
    io::write_bevg(o.out_elev, build_elevation_map(clouds, flags, grid, {lo, hi}));
  }
  if (!o.out_partition.empty()) {
    require(!o.camera.empty(), ErrorCode::InvalidArgument, "--out-partition needs --camera");
    const io::CameraFile cam = io::read_camera(o.camera);
    io::write_bevg(o.out_partition, observation_partition(clouds.back(), camera_at(cam.camera, seq.poses[i]), grid));
  }
}

// ---- splat ---------------------------------------------------------------------

struct SplatOptions {
  fs::path cloud, out, out_weight;
  std::string grid = "256x256x0.1";
};

void run_splat(const SplatOptions& o) {
  const PointCloud cloud = io::read_pcb(o.cloud);
  require(cloud.has_features(), ErrorCode::ValidationError, "cloud has no features to splat");
  const SplatResult r = splat_features(cloud, io::parse_grid_spec(o.grid));
  for (double v : r.features.values) require_finite(v, "splatted feature");
  io::write_bevg(o.out, r.features);
  if (!o.out_weight.empty()) io::write_bevg(o.out_weight, r.weight);
  logger().info("splat: {} points dropped outside the grid", r.dropped);
}

// ---- loss-check ----------------------------------------------------------------

struct CheckResult {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    scale += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

Eigen::MatrixXd random_unit_rows(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
    m.row(i).normalize();
  }
  return m;
}

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  }
  return out;
}

Eigen::MatrixXd unflatten(std::span<const double> x, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = x[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

CheckResult make_check(std::string name, double value, double expected, double error, double tol) {
  return {std::move(name), value, expected, error, tol, std::isfinite(error) && error <= tol};
}

std::vector<CheckResult> loss_checks(const std::string& which, std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  auto want = [&](const char* name) { return which == "all" || which == name; };

  if (want("supcon-identical")) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 4);
    z.col(0).setOnes();
    const std::vector<int> labels{0, 0, 0};
    const double v = supcon_loss(z, labels, 0.1);
    out.push_back(make_check("supcon-identical", v, std::log(2.0), std::abs(v - std::log(2.0)), 1e-9));
  }
  if (want("supcon-gradient")) {
    const Eigen::MatrixXd z = random_unit_rows(8, 8, rng);
    const std::vector<int> labels{0, 0, 1, 1, 2, 2, 0, 3};
    const auto f = [&](std::span<const double> x) { return supcon_loss_raw(unflatten(x, 8, 8), labels, 0.5); };
    const auto fd = finite_diff_grad(f, flatten(z), 1e-6);
    const auto an = flatten(supcon_gradient(z, labels, 0.5));
    out.push_back(make_check("supcon-gradient", supcon_loss_raw(z, labels, 0.5), 0.0, relative_error(an, fd), 1e-4));
  }
  if (want("elevation-gradient")) {
    std::normal_distribution<double> g(0.0, 0.5);
    std::vector<double> pred(64), gt(64);
    std::vector<std::uint8_t> mask(64);
    for (std::size_t i = 0; i < 64; ++i) {
      pred[i] = g(rng);
      gt[i] = g(rng);
      mask[i] = i % 5 != 0;
    }
    const auto f = [&](std::span<const double> x) { return elevation_l1(x, gt, mask); };
    const auto fd = finite_diff_grad(f, pred, 1e-7);
    const auto an = elevation_l1_gradient(pred, gt, mask);
    out.push_back(make_check("elevation-gradient", elevation_l1(pred, gt, mask), 0.0, relative_error(an, fd), 1e-4));
  }
  if (want("depth-l1-gradient")) {
    std::uniform_real_distribution<double> u(1.0, 20.0);
    DepthImage pred(8, 8), gt(8, 8);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt[i] = i % 7 == 0 ? 0.0 : u(rng);
      pred[i] = u(rng);
    }
    const BinnedDepth bins = bin_depth(gt, 128, 0.5, 51.2);
    const auto f = [&](std::span<const double> x) {
      DepthImage p(8, 8);
      std::copy(x.begin(), x.end(), p.data().begin());
      double s = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (bins.bins[i] == 0) continue;
        s += std::abs(p[i] - gt[i]);
        ++n;
      }
      return s / static_cast<double>(n);
    };
    const auto fd = finite_diff_grad(f, pred.data(), 1e-7);
    const auto an = depth_l1_gradient(pred, gt, bins);
    out.push_back(make_check("depth-l1-gradient", f(pred.data()), 0.0, relative_error(an, fd), 1e-4));
  }
  if (want("depth-ce-uniform")) {
    DepthImage gt(4, 4, 10.0);
    const BinnedDepth bins = bin_depth(gt, 128, 0.5, 51.2);
    const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(16, 128);
    const double ce = depth_loss_terms(logits, gt, gt, bins).ce;
    out.push_back(make_check("depth-ce-uniform", ce, std::log(128.0), std::abs(ce - std::log(128.0)), 1e-9));
  }
  if (want("depth-ce-gradient")) {
    std::uniform_real_distribution<double> u(1.0, 20.0);
    std::normal_distribution<double> g(0.0, 1.0);
    DepthImage gt(4, 2);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = i == 3 ? 0.0 : u(rng);
    const BinnedDepth bins = bin_depth(gt, 16, 0.5, 51.2);
    Eigen::MatrixXd logits(8, 16);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = g(rng);
    const auto f = [&](std::span<const double> x) { return depth_loss_terms(unflatten(x, 8, 16), gt, gt, bins).ce; };
    const auto fd = finite_diff_grad(f, flatten(logits), 1e-6);
    const auto an = flatten(depth_ce_gradient(logits, bins));
    out.push_back(make_check("depth-ce-gradient", f(flatten(logits)), 0.0, relative_error(an, fd), 1e-4));
  }
  if (want("multiview")) {
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 1, 0;
    b << 0, 1;
    const std::vector<Correspondence> corr{{0, 0}};
    const double v = multiview_loss(a, b, corr);
    out.push_back(make_check("multiview", v, 2.0, std::abs(v - 2.0), 1e-12));
  }
  if (want("foundation")) {
    const Eigen::MatrixXd t = random_unit_rows(6, 5, rng);
    const double v = foundation_loss(-t, t, {});
    out.push_back(make_check("foundation", v, 2.0, std::abs(v - 2.0), 1e-9));
  }
  if (want("finite-diff")) {
    const auto f = [](std::span<const double> x) { return x[0] * x[0]; };
    const std::vector<double> x{3.0};
    const double g = finite_diff_grad(f, x, 1e-4)[0];
    out.push_back(make_check("finite-diff", g, 6.0, std::abs(g - 6.0), 1e-6));
  }
  require(!out.empty(), ErrorCode::InvalidArgument, "unknown loss-check case " + which);
  return out;
}

int run_loss_check(const std::string& which, std::uint64_t seed, const fs::path& report) {
  const auto results = loss_checks(which, seed);
  json rows = json::array();
  bool all = true;
  bool finite = true;
  std::printf("%-20s %-6s %14s %14s %12s\n", "case", "result", "value", "error", "tolerance");
  for (const auto& r : results) {
    std::printf("%-20s %-6s %14.9g %14.6g %12.3g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.value, r.error,
                r.tolerance);
    rows.push_back(json{{"case", r.name}, {"pass", r.pass}, {"value", r.value}, {"expected", r.expected},
                        {"error", r.error}, {"tolerance", r.tolerance}});
    all = all && r.pass;
    finite = finite && std::isfinite(r.value) && std::isfinite(r.error);
  }
  if (!report.empty()) write_json(report, json{{"seed", seed}, {"checks", rows}, {"pass", all}});
  if (!finite) return kExitNumeric;
  return all ? 0 : kExitNumeric;
}

// ---- eval ------------------------------------------------------------------------

struct EvalSscOptions {
  fs::path pred, gt, partition, elev_pred, elev_gt, report;
  int num_classes = 0;
};

void run_eval_ssc(const EvalSscOptions& o) {
  const LabelGrid pred = io::read_label_grid(o.pred);
  const LabelGrid gt = io::read_label_grid(o.gt);
  const PartitionGrid partition = io::read_partition_grid(o.partition);
  json report;
  json regions = json::object();
  for (Region region : {Region::Unoccluded, Region::Occluded, Region::Both}) {
    try {
      regions[to_string(region)] = iou_json(iou(pred, gt, region, partition, o.num_classes));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyRegion) throw;
      regions[to_string(region)] = nullptr;
    }
  }
  report["iou"] = regions;
  if (!o.elev_pred.empty() || !o.elev_gt.empty()) {
    require(!o.elev_pred.empty() && !o.elev_gt.empty(), ErrorCode::InvalidArgument,
            "elevation MAE needs both --elev-pred and --elev-gt");
    const FeatureGrid ep = io::read_feature_grid(o.elev_pred);
    const FeatureGrid eg = io::read_feature_grid(o.elev_gt);
    json maes = json::object();
    for (Region region : {Region::Unoccluded, Region::Occluded, Region::Both}) {
      try {
        const double v = mae(ep, eg, region, partition);
        require_finite(v, "elevation MAE");
        maes[to_string(region)] = v;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRegion) throw;
        maes[to_string(region)] = nullptr;
      }
    }
    report["mae"] = maes;
  }
  const std::string text = report.dump(2) + "\n";
  if (o.report.empty()) {
    std::cout << text;
  } else {
    io::write_file_atomic(o.report, text);
  }
}

struct EvalUnsupOptions {
  fs::path val, test, report;
  int k = 0;
  std::uint64_t seed = 0;
  int pca = 0;
  int num_classes = 0;
  std::string grid = "256x256x0.1";
  int max_iters = 100;
};

// Rows of max-pooled BEV features and their GT labels over a manifest split.
void collect_bev_rows(const fs::path& manifest_path, const std::string& split, const GridConfig& base, int jobs,
                      Eigen::MatrixXd& features, std::vector<int>& labels) {
  const Manifest m = load_manifest(manifest_path);
  require_valid(m);
  std::vector<std::size_t> frames = m.frames_in_split(split);
  if (frames.empty()) {
    frames.resize(m.frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = i;
  }
  const auto poses = io::read_poses(m.resolve(m.poses));
  std::vector<std::vector<std::vector<double>>> rows(frames.size());
  std::vector<std::vector<int>> row_labels(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t k) {
    const FrameRecord& f = m.frames[frames[k]];
    require(f.features && f.depth && f.semantic, ErrorCode::ValidationError,
            "frame " + std::to_string(frames[k]) + " needs features, depth and semantic entries");
    const io::FeatureMap fm = io::read_fmap(m.resolve(*f.features));
    const DepthImage depth = io::decode_depth_mm(io::read_pgm16(m.resolve(*f.depth)));
    require(fm.width == depth.width() && fm.height == depth.height(), ErrorCode::DimensionMismatch,
            "feature map and depth differ in size");
    const Pose& pose = poses[f.pose_index];
    const CameraModel cam = camera_at(io::read_camera(m.resolve(m.cameras.at(f.camera))).camera, pose);
    const GridConfig grid = base.with_frame(ego_frame(pose));
    const FeatureGrid bev = build_foundation_bev(fm.features, depth, cam, grid);
    const LabelGrid sem = io::read_label_grid(m.resolve(*f.semantic));
    require(sem.config.same_layout(grid), ErrorCode::DimensionMismatch, "semantic grid layout differs from --grid");
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (!bev.is_valid(c) || !sem.is_valid(c)) continue;
      std::vector<double> row(static_cast<std::size_t>(bev.channels));
      for (int ch = 0; ch < bev.channels; ++ch) row[static_cast<std::size_t>(ch)] = bev.at(c, ch);
      rows[k].push_back(std::move(row));
      row_labels[k].push_back(sem.at(c));
    }
  });
  std::size_t total = 0;
  int dim = 0;
  for (const auto& r : rows) {
    total += r.size();
    if (!r.empty()) dim = static_cast<int>(r.front().size());
  }
  require(total > 0, ErrorCode::ValidationError, "no labelled BEV cells in " + manifest_path.string());
  features.resize(static_cast<Eigen::Index>(total), dim);
  labels.clear();
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < rows[k].size(); ++j, ++at) {
      require(static_cast<int>(rows[k][j].size()) == dim, ErrorCode::DimensionMismatch,
              "feature dimension differs between frames");
      for (int c = 0; c < dim; ++c) features(at, c) = rows[k][j][static_cast<std::size_t>(c)];
      labels.push_back(row_labels[k][j]);
    }
  }
}

void run_eval_unsup(const EvalUnsupOptions& o, int jobs) {
  const GridConfig base = io::parse_grid_spec(o.grid);
  Eigen::MatrixXd val, test;
  std::vector<int> val_labels, test_labels;
  collect_bev_rows(o.val, "val", base, jobs, val, val_labels);
  collect_bev_rows(o.test, "test", base, jobs, test, test_labels);
  require(val.cols() == test.cols(), ErrorCode::DimensionMismatch, "val and test features differ in dimension");
  json pca_info = nullptr;
  if (o.pca > 0 && o.pca < val.cols()) {
    const PcaModel model = pca_fit(val, o.pca);
    val = pca_transform(model, val);
    test = pca_transform(model, test);
    pca_info = json{{"dim", model.output_dim()},
                    {"explained_variance", model.explained_variance_fraction()},
                    {"rank_deficient", model.rank_deficient}};
  }
  UnsupConfig cfg;
  cfg.k = o.k;
  cfg.seed = o.seed;
  cfg.max_iters = o.max_iters;
  cfg.num_classes = o.num_classes;
  const UnsupResult r = unsup_ssc_eval(val, val_labels, test, test_labels, cfg);
  require_finite(r.report.miou, "mIoU");
  json mapping = json::object();
  for (std::size_t c = 0; c < r.model.cluster_to_class.size(); ++c) {
    mapping[std::to_string(c)] = r.model.cluster_to_class[c];
  }
  json report{{"seed", o.seed},
              {"k", r.model.centroids.rows()},
              {"val_cells", val.rows()},
              {"test_cells", test.rows()},
              {"pca", pca_info},
              {"cluster_to_class", mapping},
              {"iou", iou_json(r.report)}};
  const std::string text = report.dump(2) + "\n";
  if (o.report.empty()) {
    std::cout << text;
  } else {
    io::write_file_atomic(o.report, text);
  }
}

// ---- render ----------------------------------------------------------------------

void run_render(const fs::path& grid_path, const std::string& mode, const fs::path& out) {
  const io::AnyGrid any = io::read_bevg(grid_path);
  io::RgbImage image;
  if (const auto* labels = std::get_if<LabelGrid>(&any)) {
    require(mode == "labels", ErrorCode::InvalidArgument, "label grids render only in labels mode");
    image = render_grid_ppm(*labels);
  } else if (const auto* features = std::get_if<FeatureGrid>(&any)) {
    RenderMode m = RenderMode::FeaturePca;
    if (mode == "labels") {
      m = RenderMode::Labels;
    } else if (mode == "elevation") {
      m = RenderMode::Elevation;
    } else {
      require(mode == "feature-pca", ErrorCode::InvalidArgument, "unknown render mode " + mode);
    }
    image = render_grid_ppm(*features, m);
  } else {
    const auto& part = std::get<PartitionGrid>(any);
    LabelGrid as_labels(part.config, 1, 0, false);
    for (std::size_t i = 0; i < part.cell_count(); ++i) as_labels.at(i) = static_cast<std::uint16_t>(part.at(i));
    image = render_grid_ppm(as_labels);
  }
  io::write_ppm(out, image);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bevlab: BEV label generation, losses and evaluation on LiDAR/camera sequences.\n"
               "Environment: BEVLAB_LOG=error|warn|info|debug sets the log level (default warn).\n"
               "Exit codes: 0 ok, 2 validation failure, 3 I/O failure, 4 numeric failure."};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs,-j", jobs, "Maximum worker threads for per-frame work")->check(CLI::PositiveNumber);

  SynthOptions synth_o;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic dataset with analytic ground truth");
  synth_cmd->add_option("--seed", synth_o.seed, "Scene and noise seed")->required();
  synth_cmd->add_option("--frames", synth_o.frames, "Number of frames")->capture_default_str();
  synth_cmd->add_option("--out", synth_o.out, "Output directory")->required();
  synth_cmd->add_option("--num-dynamic", synth_o.num_dynamic, "Moving boxes")->capture_default_str();
  synth_cmd->add_option("--regions", synth_o.num_regions, "Voronoi regions")->capture_default_str();
  synth_cmd->add_option("--classes", synth_o.num_classes, "Terrain classes")->capture_default_str();
  synth_cmd->add_option("--speed", synth_o.speed, "Drive speed (m/s)")->capture_default_str();
  synth_cmd->add_option("--dt", synth_o.dt, "Frame interval (s)")->capture_default_str();
  synth_cmd->add_option("--feature-dim", synth_o.feature_dim, "Per-pixel feature size")->capture_default_str();
  synth_cmd->add_option("--grid", synth_o.grid, "Grid spec HxWxRES for semantic oracles")->capture_default_str();

  DepthGtOptions depth_o;
  auto* depth_cmd = app.add_subcommand("depth-gt", "Stereo-filtered, IDW-infilled depth labels");
  depth_cmd->add_option("--scans", depth_o.scans, "Directory of .pcb scans (sensor frame)");
  depth_cmd->add_option("--poses", depth_o.poses, "Pose file, one line per scan");
  depth_cmd->add_option("--camera", depth_o.camera, "Camera file (extrinsics sensor->camera, baseline)");
  depth_cmd->add_option("--stereo-left", depth_o.left, "Left 8-bit PGM");
  depth_cmd->add_option("--stereo-right", depth_o.right, "Right 8-bit PGM");
  depth_cmd->add_option("--disparity", depth_o.disparity, "Precomputed 16-bit disparity PGM (1/256 px)");
  depth_cmd->add_option("--out", depth_o.out, "Output 16-bit depth PGM (mm)");
  depth_cmd->add_option("--frame", depth_o.frame, "Frame to label (negative counts from the end)")
      ->capture_default_str();
  depth_cmd->add_option("--accumulate", depth_o.accumulate, "Scans accumulated up to the frame")->capture_default_str();
  depth_cmd->add_option("--rel-threshold", depth_o.rel_threshold, "Stereo consistency threshold")
      ->capture_default_str();
  depth_cmd->add_option("--idw-radius", depth_o.idw_radius, "IDW window radius (px)")->capture_default_str();
  depth_cmd->add_option("--idw-power", depth_o.idw_power, "IDW distance exponent")->capture_default_str();
  depth_cmd->add_option("--edge-sigma", depth_o.edge_sigma, "Guide intensity sigma; 0 disables")
      ->capture_default_str();
  depth_cmd->add_option("--max-depth", depth_o.max_depth, "Depth cap (m)")->capture_default_str();
  depth_cmd->add_option("--manifest", depth_o.manifest, "Label every frame of a manifest instead");
  depth_cmd->add_option("--out-dir", depth_o.out_dir, "Output directory for --manifest mode");
  depth_cmd->add_option("--report", depth_o.report, "JSON report with densities");

  StaticMapOptions static_o;
  auto* static_cmd = app.add_subcommand("static-map", "Multi-view persistent static point map");
  static_cmd->add_option("--scans", static_o.scans, "Directory of .pcb scans")->required();
  static_cmd->add_option("--poses", static_o.poses, "Pose file")->required();
  static_cmd->add_option("--voxel", static_o.voxel, "Voxel size (m)")->capture_default_str();
  static_cmd->add_option("--min-obs", static_o.min_obs, "Distinct scans per static voxel")->capture_default_str();
  static_cmd->add_option("--out", static_o.out, "Output .pcb (world frame)")->required();

  DynamicMaskOptions dyn_o;
  auto* dyn_cmd = app.add_subcommand("dynamic-mask", "Movable-pixel mask from a scan and a static map");
  dyn_cmd->add_option("--scan", dyn_o.scan, "Scan .pcb (sensor frame)")->required();
  dyn_cmd->add_option("--static", dyn_o.static_map, "Static map .pcb (world frame)")->required();
  dyn_cmd->add_option("--poses", dyn_o.poses, "Pose file; the scan's pose is matched by timestamp (default: scan is world frame)");
  dyn_cmd->add_option("--camera", dyn_o.camera, "Camera file")->required();
  dyn_cmd->add_option("--k", dyn_o.k, "Neighbours required to be static")->capture_default_str();
  dyn_cmd->add_option("--radius", dyn_o.radius, "Neighbour ball radius (m)")->capture_default_str();
  dyn_cmd->add_option("--voxel", dyn_o.voxel, "Voxel size used for the neighbour search")->capture_default_str();
  dyn_cmd->add_option("--dilation", dyn_o.dilation, "Square dilation radius (px)")->capture_default_str();
  dyn_cmd->add_option("--out", dyn_o.out, "Output 8-bit PGM (0/255)")->required();
  dyn_cmd->add_option("--points-out", dyn_o.points_out, "Optional .pcb of the dynamic points");

  LiftOptions lift_o;
  auto* lift_cmd = app.add_subcommand("lift-masks", "Lift instance masks to BEV and merge them (IGMM)");
  lift_cmd->add_option("--frames", lift_o.manifest, "Manifest with mask/depth entries")->required();
  lift_cmd->add_option("--grid", lift_o.grid, "Grid spec HxWxRES")->capture_default_str();
  lift_cmd->add_option("--anchor", lift_o.anchor, "Frame whose ego pose places the grid")->capture_default_str();
  lift_cmd->add_option("--range", lift_o.frames, "Inclusive frame range a:b (default all)");
  lift_cmd->add_flag("!--no-movable", lift_o.use_movable, "Ignore movable masks");
  lift_cmd->add_option("--out", lift_o.out, "Output BEVG (u16 labels)")->required();

  BevGtOptions bev_o;
  auto* bev_cmd = app.add_subcommand("bev-gt", "Semantic, elevation and visibility ground truth grids");
  bev_cmd->add_option("--scans", bev_o.scans, "Directory of labelled .pcb scans")->required();
  bev_cmd->add_option("--poses", bev_o.poses, "Pose file")->required();
  bev_cmd->add_option("--grid", bev_o.grid, "Grid spec HxWxRES")->capture_default_str();
  bev_cmd->add_option("--elev-range", bev_o.elev_range, "Elevation clamp lo:hi")->capture_default_str();
  bev_cmd->add_option("--frame", bev_o.frame, "Frame the grid is anchored to")->capture_default_str();
  bev_cmd->add_option("--accumulate", bev_o.accumulate, "Scans accumulated up to the frame")->capture_default_str();
  bev_cmd->add_flag("!--no-dynamic-filter", bev_o.filter_dynamic, "Use every point for elevation");
  bev_cmd->add_option("--out-sem", bev_o.out_sem, "Output semantic BEVG");
  bev_cmd->add_option("--out-elev", bev_o.out_elev, "Output elevation BEVG");
  bev_cmd->add_option("--out-partition", bev_o.out_partition, "Output visibility partition BEVG");
  bev_cmd->add_option("--camera", bev_o.camera, "Camera file (for --out-partition)");

  SplatOptions splat_o;
  auto* splat_cmd = app.add_subcommand("splat", "Bilinear soft-quantisation of point features into a grid");
  splat_cmd->add_option("--cloud", splat_o.cloud, "Feature cloud .pcb (grid frame)")->required();
  splat_cmd->add_option("--grid", splat_o.grid, "Grid spec HxWxRES")->capture_default_str();
  splat_cmd->add_option("--out", splat_o.out, "Output feature BEVG")->required();
  splat_cmd->add_option("--out-weight", splat_o.out_weight, "Output weight BEVG");

  std::string loss_case = "all";
  std::uint64_t loss_seed = 0;
  fs::path loss_report;
  auto* loss_cmd = app.add_subcommand("loss-check", "Analytic versus finite-difference loss checks");
  loss_cmd->add_option("--case", loss_case,
                       "all, supcon-identical, supcon-gradient, elevation-gradient, depth-l1-gradient, "
                       "depth-ce-uniform, depth-ce-gradient, multiview, foundation, finite-diff")
      ->capture_default_str();
  loss_cmd->add_option("--seed", loss_seed, "Seed for the random cases")->required();
  loss_cmd->add_option("--report", loss_report, "JSON report");

  EvalSscOptions ssc_o;
  auto* ssc_cmd = app.add_subcommand("eval-ssc", "IoU and elevation MAE per visibility region");
  ssc_cmd->add_option("--pred", ssc_o.pred, "Predicted label BEVG")->required();
  ssc_cmd->add_option("--gt", ssc_o.gt, "Ground truth label BEVG")->required();
  ssc_cmd->add_option("--partition", ssc_o.partition, "Visibility partition BEVG")->required();
  ssc_cmd->add_option("--elev-pred", ssc_o.elev_pred, "Predicted elevation BEVG");
  ssc_cmd->add_option("--elev-gt", ssc_o.elev_gt, "Ground truth elevation BEVG");
  ssc_cmd->add_option("--num-classes", ssc_o.num_classes, "Class count (0 = from data)");
  ssc_cmd->add_option("--report", ssc_o.report, "JSON report (stdout when omitted)");

  EvalUnsupOptions unsup_o;
  auto* unsup_cmd = app.add_subcommand("eval-unsup", "PCA, k-means and Hungarian unsupervised SSC protocol");
  unsup_cmd->add_option("--val", unsup_o.val, "Manifest providing the val split")->required();
  unsup_cmd->add_option("--test", unsup_o.test, "Manifest providing the test split")->required();
  unsup_cmd->add_option("--k", unsup_o.k, "Clusters (0 = number of classes)")->capture_default_str();
  unsup_cmd->add_option("--seed", unsup_o.seed, "k-means seed")->required();
  unsup_cmd->add_option("--pca", unsup_o.pca, "PCA output dim fit on val (0 disables)")->capture_default_str();
  unsup_cmd->add_option("--num-classes", unsup_o.num_classes, "Class count (0 = from data)");
  unsup_cmd->add_option("--grid", unsup_o.grid, "Grid spec HxWxRES")->capture_default_str();
  unsup_cmd->add_option("--report", unsup_o.report, "JSON report (stdout when omitted)");

  fs::path render_grid, render_out;
  std::string render_mode = "labels";
  auto* render_cmd = app.add_subcommand("render", "Render a BEVG grid as a PPM image");
  render_cmd->add_option("--grid", render_grid, "Input BEVG")->required();
  render_cmd->add_option("--mode", render_mode, "labels, elevation or feature-pca")
      ->check(CLI::IsMember({"labels", "elevation", "feature-pca"}))
      ->capture_default_str();
  render_cmd->add_option("--out", render_out, "Output PPM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth_cmd) run_synth(synth_o, jobs);
    if (*depth_cmd) run_depth_gt(depth_o, jobs);
    if (*static_cmd) run_static_map(static_o);
    if (*dyn_cmd) run_dynamic_mask(dyn_o);
    if (*lift_cmd) run_lift_masks(lift_o, jobs);
    if (*bev_cmd) run_bev_gt(bev_o);
    if (*splat_cmd) run_splat(splat_o);
    if (*loss_cmd) return run_loss_check(loss_case, loss_seed, loss_report);
    if (*ssc_cmd) run_eval_ssc(ssc_o);
    if (*unsup_cmd) run_eval_unsup(unsup_o, jobs);
    if (*render_cmd) run_render(render_grid, render_mode, render_out);
  } catch (const Error& e) {
    logger().error("{}", e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    logger().error("{}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    logger().error("{}", e.what());
    return kExitValidation;
  }
  return 0;
}
