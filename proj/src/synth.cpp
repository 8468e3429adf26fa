#include "bevlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bevlab/error.hpp"

namespace bevlab::synth {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t salt) {
  std::uint64_t h = mix(salt);
  h = mix(h ^ static_cast<std::uint64_t>(x));
  h = mix(h ^ static_cast<std::uint64_t>(y));
  h = mix(h ^ static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smooth trilinear value noise in [0, 1).
double value_noise(const Eigen::Vector3d& p, std::uint64_t salt) {
  const Eigen::Vector3d f = p.array().floor();
  const auto ix = static_cast<std::int64_t>(f.x());
  const auto iy = static_cast<std::int64_t>(f.y());
  const auto iz = static_cast<std::int64_t>(f.z());
  Eigen::Vector3d w = p - f;
  w = w.array() * w.array() * (3.0 - 2.0 * w.array());
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double weight = (dx ? w.x() : 1.0 - w.x()) * (dy ? w.y() : 1.0 - w.y()) * (dz ? w.z() : 1.0 - w.z());
        acc += weight * lattice(ix + dx, iy + dy, iz + dz, salt);
      }
    }
  }
  return acc;
}

double texture(const Eigen::Vector3d& p, std::uint64_t salt) {
  return 55.0 * (value_noise(p / 0.12, salt) - 0.5) + 45.0 * (value_noise(p / 0.45, salt + 1) - 0.5) +
         35.0 * (value_noise(p / 1.7, salt + 2) - 0.5);
}

constexpr double kSkyIntensity = 235.0;

struct BoxHit {
  double s = std::numeric_limits<double>::infinity();
  int box = -1;
};

BoxHit cast_boxes(const std::vector<DynamicBox>& boxes, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                  double t, double max_range) {
  BoxHit best;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Eigen::Vector3d c = boxes[b].center(t);
    const Eigen::Vector3d lo = c - boxes[b].half_extent;
    const Eigen::Vector3d hi = c + boxes[b].half_extent;
    double enter = -std::numeric_limits<double>::infinity();
    double exit = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(dir(a)) < 1e-15) {
        miss = origin(a) < lo(a) || origin(a) > hi(a);
        continue;
      }
      double t0 = (lo(a) - origin(a)) / dir(a);
      double t1 = (hi(a) - origin(a)) / dir(a);
      if (t0 > t1) std::swap(t0, t1);
      enter = std::max(enter, t0);
      exit = std::min(exit, t1);
    }
    if (miss || enter > exit || enter <= 1e-9 || enter > max_range) continue;
    if (enter < best.s) best = {enter, static_cast<int>(b)};
  }
  return best;
}

}  // namespace

bool Scene::contains(double x, double y) const {
  const double h = config.extent / 2.0;
  return std::abs(x) <= h && std::abs(y) <= h;
}

int Scene::region_at(double x, double y) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const double d = (regions[i].site - Eigen::Vector2d(x, y)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

double region_height(const Region& r, const Eigen::Vector2d& p) { return r.base + r.slope.dot(p - r.site); }

}  // namespace

double Scene::height_at(double x, double y) const {
  return region_height(regions[static_cast<std::size_t>(region_at(x, y))], {x, y});
}

std::uint16_t Scene::class_at(double x, double y) const {
  return regions[static_cast<std::size_t>(region_at(x, y))].class_id;
}

std::uint16_t Scene::instance_at(double x, double y) const {
  const Region& r = regions[static_cast<std::size_t>(region_at(x, y))];
  return r.split_instance_id != 0 && y > r.site.y() ? r.split_instance_id : r.instance_id;
}

double Scene::surface_intensity(const Eigen::Vector3d& p, int region_or_box, bool is_box) const {
  double v = 0.0;
  if (is_box) {
    v = 150.0 + texture(p, seed * 977 + 1000 + static_cast<std::uint64_t>(region_or_box) * 7);
  } else {
    v = regions[static_cast<std::size_t>(region_or_box)].albedo + texture(p, seed * 977);
  }
  return std::clamp(v, 0.0, 255.0);
}

std::optional<RayHit> Scene::cast_terrain(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                          double max_range) const {
  const Eigen::Vector2d o = origin.head<2>();
  const Eigen::Vector2d dh = dir.head<2>();
  int r = region_at(o.x(), o.y());
  double s0 = 0.0;
  const bool vertical = dh.squaredNorm() < 1e-24;
  const int max_steps = 4 * static_cast<int>(regions.size()) + 16;

  auto make_hit = [&](double s, int region) {
    RayHit hit;
    hit.range = s;
    hit.point = origin + s * dir;
    hit.class_id = regions[static_cast<std::size_t>(region)].class_id;
    hit.instance_id = instance_at(hit.point.x(), hit.point.y());
    hit.intensity = surface_intensity(hit.point, region, false);
    return hit;
  };

  for (int step = 0; step < max_steps; ++step) {
    const Region& reg = regions[static_cast<std::size_t>(r)];
    // Exit parameter of the Voronoi cell along the ray.
    double s1 = std::numeric_limits<double>::infinity();
    int next = -1;
    if (!vertical) {
      for (std::size_t j = 0; j < regions.size(); ++j) {
        if (static_cast<int>(j) == r) continue;
        const Eigen::Vector2d n = regions[j].site - reg.site;
        const double rate = 2.0 * dh.dot(n);
        if (rate <= 0.0) continue;
        const double c = regions[j].site.squaredNorm() - reg.site.squaredNorm();
        const double bound = std::max(s0, (c - 2.0 * o.dot(n)) / rate);
        if (bound < s1) {
          s1 = bound;
          next = static_cast<int>(j);
        }
      }
    }
    const double end = std::min(s1, max_range);
    // f(s) = ray z - surface z, linear inside the cell.
    const double f0 = origin.z() - region_height(reg, o);
    const double f1 = dir.z() - reg.slope.dot(dh);
    if (f1 < 0.0) {
      const double root = -f0 / f1;
      if (root >= s0 && root <= end) return make_hit(root, r);
    }
    if (s1 >= max_range || next < 0) return std::nullopt;
    const Eigen::Vector3d at = origin + s1 * dir;
    if (at.z() <= region_height(regions[static_cast<std::size_t>(next)], at.head<2>())) {
      return make_hit(s1, next);
    }
    r = next;
    s0 = s1;
  }
  return std::nullopt;
}

std::optional<RayHit> Scene::cast_ray(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double t,
                                      double max_range) const {
  auto terrain = cast_terrain(origin, dir, max_range);
  const BoxHit box = cast_boxes(boxes, origin, dir, t, max_range);
  if (box.box >= 0 && (!terrain || box.s < terrain->range)) {
    RayHit hit;
    hit.range = box.s;
    hit.point = origin + box.s * dir;
    hit.box = box.box;
    hit.class_id = boxes[static_cast<std::size_t>(box.box)].class_id;
    hit.instance_id = boxes[static_cast<std::size_t>(box.box)].instance_id;
    hit.intensity = surface_intensity(hit.point - boxes[static_cast<std::size_t>(box.box)].center(t), box.box, true);
    return hit;
  }
  return terrain;
}

namespace {

struct PixelRay {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unit, world frame
  double scale = 1.0;   // ray parameter per unit of camera depth
};

PixelRay pixel_ray(const CameraModel& camera, double u, double v) {
  const Eigen::Matrix3d r = camera.extrinsics.rotation_matrix();
  const Eigen::Vector3d dc((u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0);
  PixelRay ray;
  ray.origin = -(r.transpose() * camera.extrinsics.translation);
  ray.scale = dc.norm();
  ray.dir = r.transpose() * (dc / ray.scale);
  return ray;
}

}  // namespace

double Scene::depth_at(const CameraModel& camera, double u, double v, double t, double max_range) const {
  const PixelRay ray = pixel_ray(camera, u, v);
  const auto hit = cast_ray(ray.origin, ray.dir, t, max_range * ray.scale);
  return hit ? hit->range / ray.scale : 0.0;
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  require(config.num_regions >= 1 && config.num_classes >= 1 && config.num_dynamic >= 0, ErrorCode::InvalidArgument,
          "scene needs at least one region and class");
  require(config.extent > 0.0, ErrorCode::InvalidArgument, "scene extent must be positive");
  const double reach = config.max_step + config.max_slope * config.extent * std::numbers::sqrt2;
  require(reach <= 1.2, ErrorCode::InvalidArgument, "terrain parameters exceed the elevation range");
  std::mt19937_64 rng(seed);
  Scene scene;
  scene.seed = seed;
  scene.config = config;
  const double h = config.extent / 2.0;
  std::uint16_t next_instance = 1;
  for (int i = 0; i < config.num_regions; ++i) {
    Region r;
    r.site = {uniform(rng, -h, h), uniform(rng, -h, h)};
    r.base = uniform(rng, -config.max_step, config.max_step);
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double slope = uniform(rng, 0.0, config.max_slope);
    r.slope = {slope * std::cos(angle), slope * std::sin(angle)};
    r.class_id = static_cast<std::uint16_t>(1 + i % config.num_classes);
    r.instance_id = next_instance++;
    r.albedo = uniform(rng, 70.0, 180.0);
    scene.regions.push_back(r);
  }
  if (config.split_instances) scene.regions.front().split_instance_id = next_instance++;
  for (int b = 0; b < config.num_dynamic; ++b) {
    DynamicBox box;
    box.half_extent = {uniform(rng, 0.8, 1.6), uniform(rng, 0.5, 0.9), uniform(rng, 0.6, 0.9)};
    // Crossing the default drive along +x, ahead of where it ends.
    const double x = uniform(rng, 11.0, 16.0);
    const double side = unit_uniform(rng) < 0.5 ? -1.0 : 1.0;
    const double y = side * uniform(rng, 1.0, 5.0);
    box.start = {x, y, scene.height_at(x, y) + box.half_extent.z()};
    box.velocity = {0.0, -side * uniform(rng, 1.0, 2.5), 0.0};
    box.class_id = scene.box_class();
    box.instance_id = next_instance++;
    scene.boxes.push_back(box);
  }
  return scene;
}

RigConfig default_rig() {
  RigConfig rig;
  CameraModel& cam = rig.camera;
  cam.width = 256;
  cam.height = 192;
  cam.fx = 360.0;
  cam.fy = 360.0;
  cam.cx = 127.5;
  cam.cy = 95.5;
  // Sensor frame x-forward, y-left, z-up -> camera x-right, y-down, z-forward,
  // then pitched down about the camera x axis.
  Eigen::Matrix3d axes;
  axes << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  const double pitch = 22.0 * std::numbers::pi / 180.0;
  const Eigen::Matrix3d tilt = Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
  cam.extrinsics.rotation = Eigen::Quaterniond(tilt * axes);
  cam.extrinsics.rotation.normalize();
  cam.extrinsics.translation = Eigen::Vector3d::Zero();
  rig.lidar.rings = 64;
  rig.lidar.points_per_ring = 256;
  rig.lidar.min_elevation_deg = -40.0;
  rig.lidar.max_elevation_deg = 5.0;
  rig.lidar.max_range = 60.0;
  return rig;
}

RenderedFrame render_frame(const Scene& scene, const Pose& sensor_pose, const RigConfig& rig, double t,
                           std::uint64_t noise_seed) {
  require(scene.contains(sensor_pose.translation.x(), sensor_pose.translation.y()), ErrorCode::PoseOutsideScene,
          "sensor pose lies outside the scene extent");
  sensor_pose.validate();
  rig.camera.validate();
  const LidarConfig& lidar = rig.lidar;
  require(lidar.rings >= 1 && lidar.points_per_ring >= 1 && lidar.max_range > 0.0, ErrorCode::InvalidArgument,
          "invalid lidar configuration");

  RenderedFrame frame;
  frame.pose = sensor_pose;
  frame.camera = camera_at(rig.camera, sensor_pose);
  frame.scan.timestamp = sensor_pose.timestamp;
  frame.scan.frame = Frame::Sensor;

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> jitter(0.0, lidar.depth_noise > 0.0 ? lidar.depth_noise : 1.0);
  const Eigen::Matrix3d rot = sensor_pose.rotation_matrix();
  const double deg = std::numbers::pi / 180.0;
  const std::size_t budget = static_cast<std::size_t>(lidar.rings) * static_cast<std::size_t>(lidar.points_per_ring);
  frame.scan.points.reserve(budget);
  frame.scan.labels.reserve(budget);
  for (int ring = 0; ring < lidar.rings; ++ring) {
    const double frac = lidar.rings == 1 ? 0.0 : static_cast<double>(ring) / (lidar.rings - 1);
    const double elev = (lidar.min_elevation_deg + frac * (lidar.max_elevation_deg - lidar.min_elevation_deg)) * deg;
    for (int k = 0; k < lidar.points_per_ring; ++k) {
      const double az = 2.0 * std::numbers::pi * k / lidar.points_per_ring;
      const Eigen::Vector3d local(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
      const auto hit = scene.cast_ray(sensor_pose.translation, rot * local, t, lidar.max_range);
      if (!hit) {
        ++frame.missed_rays;
        continue;
      }
      double range = hit->range;
      if (lidar.depth_noise > 0.0) range += jitter(rng);
      frame.scan.points.push_back(local * range);
      frame.scan.labels.push_back(hit->class_id);
      frame.instance_ids.push_back(hit->instance_id);
      frame.motion.push_back(hit->dynamic() ? Motion::Dynamic : Motion::Static);
    }
  }

  const CameraModel& cam = frame.camera;
  frame.depth = DepthImage(cam.width, cam.height, 0.0);
  frame.left = GrayImage(cam.width, cam.height, 0);
  frame.right = GrayImage(cam.width, cam.height, 0);
  frame.instances = LabelMask(cam.width, cam.height, 0);
  frame.classes = LabelMask(cam.width, cam.height, 0);
  frame.movable = MovableMask(cam.width, cam.height, 0);
  CameraModel right = cam;
  right.extrinsics.translation.x() -= rig.baseline;
  const double far = rig.max_depth * 4.0;
  for (int row = 0; row < cam.height; ++row) {
    for (int col = 0; col < cam.width; ++col) {
      const PixelRay ray = pixel_ray(cam, col, row);
      const auto hit = scene.cast_ray(ray.origin, ray.dir, t, far * ray.scale);
      double intensity = kSkyIntensity;
      if (hit) {
        const double depth = hit->range / ray.scale;
        if (depth <= rig.max_depth) frame.depth(row, col) = depth;
        frame.instances(row, col) = hit->instance_id;
        frame.classes(row, col) = hit->class_id;
        frame.movable(row, col) = hit->dynamic() ? 1 : 0;
        intensity = hit->intensity;
      }
      frame.left(row, col) = static_cast<std::uint8_t>(std::lround(intensity));
      const PixelRay rray = pixel_ray(right, col, row);
      const auto rhit = scene.cast_ray(rray.origin, rray.dir, t, far * rray.scale);
      frame.right(row, col) = static_cast<std::uint8_t>(std::lround(rhit ? rhit->intensity : kSkyIntensity));
    }
  }
  return frame;
}

std::vector<Pose> straight_trajectory(const Scene& scene, int frames, double dt, double speed, double yaw,
                                      const Eigen::Vector2d& start, double sensor_height) {
  require(frames >= 0 && dt > 0.0, ErrorCode::InvalidArgument, "invalid trajectory timing");
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(frames));
  const Eigen::Vector2d heading(std::cos(yaw), std::sin(yaw));
  for (int i = 0; i < frames; ++i) {
    const double t = i * dt;
    const Eigen::Vector2d xy = start + speed * t * heading;
    poses.push_back(Pose::from_yaw(yaw, {xy.x(), xy.y(), scene.height_at(xy.x(), xy.y()) + sensor_height}, t));
  }
  return poses;
}

namespace {

Eigen::Vector2d world_xy(const GridConfig& grid, int row, int col) {
  const Eigen::Vector2d c = grid.cell_center(row, col);
  return grid.frame().apply({c.x(), c.y(), 0.0}).head<2>();
}

}  // namespace

LabelGrid analytic_semantic_grid(const Scene& scene, const GridConfig& grid) {
  LabelGrid out(grid, 1, 0, false);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector2d p = world_xy(grid, r, c);
      out.at(r, c) = scene.class_at(p.x(), p.y());
    }
  }
  return out;
}

FeatureGrid analytic_elevation_grid(const Scene& scene, const GridConfig& grid) {
  FeatureGrid out(grid, 1, 0.0, false);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector2d p = world_xy(grid, r, c);
      out.at(r, c) = scene.height_at(p.x(), p.y());
    }
  }
  return out;
}

std::vector<std::uint8_t> interior_cells(const Scene& scene, const GridConfig& grid) {
  std::vector<std::uint8_t> out(grid.cell_count(), 0);
  const double half = 0.5 * grid.resolution + 1e-6;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector2d centre = grid.cell_center(r, c);
      const Eigen::Vector2d mid = world_xy(grid, r, c);
      const int region = scene.region_at(mid.x(), mid.y());
      bool inside = true;
      for (int k = 0; k < 4 && inside; ++k) {
        const Eigen::Vector3d corner(centre.x() + (k & 1 ? half : -half), centre.y() + (k & 2 ? half : -half), 0.0);
        const Eigen::Vector3d w = grid.frame().apply(corner);
        inside = scene.region_at(w.x(), w.y()) == region;
      }
      out[grid.index(r, c)] = inside ? 1 : 0;
    }
  }
  return out;
}

FeatureGrid class_features(const LabelGrid& labels, int dim, double separation, double sigma, std::uint64_t seed) {
  require(dim >= 1 && separation >= 0.0 && sigma >= 0.0, ErrorCode::InvalidArgument, "invalid feature parameters");
  FeatureGrid out(labels.config, dim, 0.0, labels.has_validity());
  if (labels.has_validity()) out.valid = labels.valid;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double scale = separation / std::numbers::sqrt2;
  for (std::size_t i = 0; i < labels.cell_count(); ++i) {
    if (!labels.is_valid(i)) continue;
    const int axis = labels.at(i) % dim;
    for (int c = 0; c < dim; ++c) out.at(i, c) = (c == axis ? scale : 0.0) + sigma * noise(rng);
  }
  return out;
}

}  // namespace bevlab::synth
