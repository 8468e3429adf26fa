#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bevlab/dynamics.hpp"
#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"
#include "bevlab/raster.hpp"

namespace bevlab::synth {

struct SceneConfig {
  int num_regions = 6;
  int num_classes = 4;
  int num_dynamic = 2;
  double extent = 120.0;        // side of the square scene, centred at the origin
  double max_step = 0.25;       // |base elevation| bound per region
  double max_slope = 0.005;     // ramp slope bound
  bool split_instances = false; // give one region two instance ids
};

/// Voronoi cell with a planar surface z = base + slope . (p - site).
struct Region {
  Eigen::Vector2d site = Eigen::Vector2d::Zero();
  double base = 0.0;
  Eigen::Vector2d slope = Eigen::Vector2d::Zero();
  std::uint16_t class_id = 1;
  std::uint16_t instance_id = 1;
  std::uint16_t split_instance_id = 0;  // nonzero: used where y > site.y
  double albedo = 128.0;
};

/// Axis-aligned box moving on a straight line: centre(t) = start + velocity t.
struct DynamicBox {
  Eigen::Vector3d half_extent{1.0, 0.5, 0.8};
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  std::uint16_t class_id = 0;
  std::uint16_t instance_id = 0;

  Eigen::Vector3d center(double t) const { return start + velocity * t; }
};

struct RayHit {
  double range = 0.0;  // ray parameter for a unit direction
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  std::uint16_t class_id = 0;
  std::uint16_t instance_id = 0;
  int box = -1;        // index of the dynamic box hit, -1 for terrain
  double intensity = 0.0;
  bool dynamic() const noexcept { return box >= 0; }
};

class Scene {
 public:
  std::uint64_t seed = 0;
  SceneConfig config;
  std::vector<Region> regions;
  std::vector<DynamicBox> boxes;

  bool contains(double x, double y) const;
  int region_at(double x, double y) const;
  double height_at(double x, double y) const;
  std::uint16_t class_at(double x, double y) const;
  std::uint16_t instance_at(double x, double y) const;
  std::uint16_t box_class() const { return static_cast<std::uint16_t>(config.num_classes + 1); }

  /// Exact first intersection of origin + s * dir (|dir| = 1) with the
  /// terraced heightfield or a box at time t, within max_range.
  std::optional<RayHit> cast_ray(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double t,
                                 double max_range) const;

  /// Camera-frame depth seen through continuous pixel (u, v); 0 on a miss.
  double depth_at(const CameraModel& camera, double u, double v, double t, double max_range) const;

 private:
  std::optional<RayHit> cast_terrain(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                     double max_range) const;
  double surface_intensity(const Eigen::Vector3d& p, int region_or_box, bool is_box) const;
};

/// Seeded Voronoi terraces with gentle ramps and boxes on linear paths.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config);

struct LidarConfig {
  int rings = 32;
  int points_per_ring = 720;
  double min_elevation_deg = -28.0;
  double max_elevation_deg = 4.0;
  double max_range = 40.0;
  double depth_noise = 0.0;  // Gaussian range jitter (m)
};

/// Sensor rig: a LiDAR at the pose origin and a stereo camera rigidly attached.
struct RigConfig {
  CameraModel camera;       // extrinsics: sensor -> left camera
  double baseline = 0.3;    // right camera sits +baseline along the camera x axis
  LidarConfig lidar;
  double sensor_height = 1.6;
  double max_depth = 51.2;
};

/// 256x192 camera (fx = fy = 360) pitched 22 degrees down, 0.3 m baseline,
/// 64-ring LiDAR with 256 returns per ring over [-40, 5] degrees.
RigConfig default_rig();

struct RenderedFrame {
  Pose pose;                // sensor -> world
  CameraModel camera;       // world -> left camera
  PointCloud scan;          // sensor frame, labels = class id
  std::vector<std::uint16_t> instance_ids;
  std::vector<Motion> motion;  // ground-truth static/dynamic per scan point
  std::size_t missed_rays = 0;
  DepthImage depth;         // analytic left-camera depth at pixel centres
  GrayImage left;
  GrayImage right;
  LabelMask instances;
  LabelMask classes;
  MovableMask movable;
};

/// Ray casts every LiDAR beam and camera pixel at time t.
/// Throws PoseOutsideScene when the sensor is outside the scene extent.
RenderedFrame render_frame(const Scene& scene, const Pose& sensor_pose, const RigConfig& rig, double t,
                           std::uint64_t noise_seed = 0);

/// Sensor poses along a straight drive at the given speed, heading yaw,
/// `sensor_height` above the terrain; frame i is at time i * dt.
std::vector<Pose> straight_trajectory(const Scene& scene, int frames, double dt, double speed, double yaw,
                                      const Eigen::Vector2d& start, double sensor_height);

/// Region class at each cell centre.
LabelGrid analytic_semantic_grid(const Scene& scene, const GridConfig& grid);
/// Heightfield at each cell centre.
FeatureGrid analytic_elevation_grid(const Scene& scene, const GridConfig& grid);
/// 1 where the cell footprint lies within a single region.
std::vector<std::uint8_t> interior_cells(const Scene& scene, const GridConfig& grid);

/// Per-cell features drawn around a per-class centre: the centres are
/// `separation` apart and samples have isotropic noise `sigma`.
FeatureGrid class_features(const LabelGrid& labels, int dim, double separation, double sigma, std::uint64_t seed);

}  // namespace bevlab::synth
