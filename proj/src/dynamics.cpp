#include "bevlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace bevlab {

VoxelMap::VoxelMap(double voxel_size) : voxel_size_(voxel_size) {
  require(voxel_size > 0.0 && std::isfinite(voxel_size), ErrorCode::InvalidArgument, "voxel size must be positive");
}

VoxelMap VoxelMap::from_points(std::span<const Eigen::Vector3d> points, double voxel_size) {
  VoxelMap map(voxel_size);
  for (const auto& p : points) map.insert(p);
  return map;
}

VoxelKey VoxelMap::key_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int32_t>(std::floor(p.x() / voxel_size_)),
          static_cast<std::int32_t>(std::floor(p.y() / voxel_size_)),
          static_cast<std::int32_t>(std::floor(p.z() / voxel_size_))};
}

const std::vector<Eigen::Vector3d>* VoxelMap::voxel(const VoxelKey& key) const {
  auto it = voxels_.find(key);
  return it == voxels_.end() ? nullptr : &it->second;
}

void VoxelMap::insert(const Eigen::Vector3d& p) {
  voxels_[key_of(p)].push_back(p);
  ++num_points_;
}

std::size_t VoxelMap::count_within(const Eigen::Vector3d& query, double radius, std::size_t limit) const {
  const double r2 = radius * radius;
  std::size_t found = 0;
  auto scan = [&](const std::vector<Eigen::Vector3d>& pts) {
    for (const auto& p : pts) {
      if ((p - query).squaredNorm() <= r2 && ++found >= limit) return true;
    }
    return false;
  };

  const double rings_f = std::ceil(radius / voxel_size_);
  const double window = 2.0 * rings_f + 1.0;
  // A huge ball is cheaper to answer by visiting every voxel.
  if (!std::isfinite(rings_f) || window * window * window > static_cast<double>(voxels_.size())) {
    for (const auto& [key, pts] : voxels_) {
      if (scan(pts)) return found;
    }
    return found;
  }
  const int rings = static_cast<int>(rings_f);
  const VoxelKey c = key_of(query);
  for (int dz = -rings; dz <= rings; ++dz) {
    for (int dy = -rings; dy <= rings; ++dy) {
      for (int dx = -rings; dx <= rings; ++dx) {
        if (const auto* pts = voxel({c.x + dx, c.y + dy, c.z + dz}); pts != nullptr && scan(*pts)) return found;
      }
    }
  }
  return found;
}

PointCloud VoxelMap::to_cloud() const {
  // Deterministic order: sort voxel keys.
  std::vector<const std::pair<const VoxelKey, std::vector<Eigen::Vector3d>>*> entries;
  entries.reserve(voxels_.size());
  for (const auto& e : voxels_) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) {
    return std::tie(a->first.x, a->first.y, a->first.z) < std::tie(b->first.x, b->first.y, b->first.z);
  });
  PointCloud cloud;
  cloud.frame = Frame::World;
  cloud.points.reserve(num_points_);
  for (auto* e : entries) cloud.points.insert(cloud.points.end(), e->second.begin(), e->second.end());
  return cloud;
}

VoxelMap build_static_map(std::span<const PointCloud> world_clouds, double voxel_size, int min_observations) {
  require(world_clouds.size() >= 2, ErrorCode::InsufficientViews,
          "need at least 2 clouds, got " + std::to_string(world_clouds.size()));
  require(min_observations >= 1, ErrorCode::InvalidArgument, "min_observations must be >= 1");
  VoxelMap probe(voxel_size);

  struct Tally {
    int views = 0;
    int last_view = -1;
  };
  std::unordered_map<VoxelKey, Tally, VoxelKeyHash> tallies;
  for (std::size_t v = 0; v < world_clouds.size(); ++v) {
    for (const auto& p : world_clouds[v].points) {
      Tally& t = tallies[probe.key_of(p)];
      if (t.last_view != static_cast<int>(v)) {
        t.last_view = static_cast<int>(v);
        ++t.views;
      }
    }
  }

  VoxelMap map(voxel_size);
  for (const auto& cloud : world_clouds) {
    for (const auto& p : cloud.points) {
      if (tallies[probe.key_of(p)].views >= min_observations) map.insert(p);
    }
  }
  return map;
}

std::vector<Motion> classify_dynamic(const PointCloud& world_query, const VoxelMap& static_map, int k,
                                     double radius) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  require(!static_map.empty(), ErrorCode::EmptyStaticMap, "static map has no points");
  std::vector<Motion> flags(world_query.size(), Motion::Static);
  for (std::size_t i = 0; i < world_query.size(); ++i) {
    const std::size_t n = static_map.count_within(world_query.points[i], radius, static_cast<std::size_t>(k));
    flags[i] = n >= static_cast<std::size_t>(k) ? Motion::Static : Motion::Dynamic;
  }
  return flags;
}

MovableMask dilate(const MovableMask& mask, int radius) {
  require(radius >= 0, ErrorCode::InvalidArgument, "dilation radius must be non-negative");
  if (radius == 0) return mask;
  const int w = mask.width(), h = mask.height();
  // Separable square dilation: rows then columns.
  MovableMask rows(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) rows(y, xx) = 1;
    }
  }
  MovableMask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows(y, x)) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) out(yy, x) = 1;
    }
  }
  return out;
}

MovableMask render_movable_mask(const PointCloud& dynamic_points, const CameraModel& camera, int dilation) {
  camera.validate();
  MovableMask mask(camera.width, camera.height, 0);
  for (const auto& p : project_cloud(dynamic_points, camera).points) mask(p.v, p.u) = 1;
  return dilate(mask, dilation);
}

PointCloud select_points(const PointCloud& cloud, const std::vector<Motion>& flags, Motion which) {
  require(flags.size() == cloud.size(), ErrorCode::LengthMismatch, "flag count differs from point count");
  PointCloud out;
  out.frame = cloud.frame;
  out.timestamp = cloud.timestamp;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (flags[i] != which) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[i]);
    rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (cloud.has_features()) {
    out.features.resize(static_cast<Eigen::Index>(rows.size()), cloud.features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.features.row(static_cast<Eigen::Index>(r)) = cloud.features.row(rows[r]);
  }
  return out;
}

}  // namespace bevlab
