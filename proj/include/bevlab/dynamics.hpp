#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "bevlab/geometry.hpp"
#include "bevlab/raster.hpp"

namespace bevlab {

struct VoxelKey {
  std::int32_t x = 0, y = 0, z = 0;
  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    // Teschner et al. spatial hash primes.
    return (static_cast<std::size_t>(k.x) * 73856093u) ^ (static_cast<std::size_t>(k.y) * 19349663u) ^
           (static_cast<std::size_t>(k.z) * 83492791u);
  }
};

/// Sparse voxel grid of static points. Immutable once built.
class VoxelMap {
 public:
  VoxelMap() = default;
  explicit VoxelMap(double voxel_size);

  /// Every point becomes static (used when loading a saved static map).
  static VoxelMap from_points(std::span<const Eigen::Vector3d> points, double voxel_size);

  double voxel_size() const noexcept { return voxel_size_; }
  std::size_t voxel_count() const noexcept { return voxels_.size(); }
  std::size_t point_count() const noexcept { return num_points_; }
  bool empty() const noexcept { return num_points_ == 0; }

  VoxelKey key_of(const Eigen::Vector3d& p) const;
  const std::vector<Eigen::Vector3d>* voxel(const VoxelKey& key) const;
  const std::unordered_map<VoxelKey, std::vector<Eigen::Vector3d>, VoxelKeyHash>& voxels() const noexcept {
    return voxels_;
  }

  /// Number of stored points within `radius` of `query`, stopping at `limit`.
  std::size_t count_within(const Eigen::Vector3d& query, double radius, std::size_t limit) const;

  PointCloud to_cloud() const;

  void insert(const Eigen::Vector3d& p);

 private:
  double voxel_size_ = 0.2;
  std::size_t num_points_ = 0;
  std::unordered_map<VoxelKey, std::vector<Eigen::Vector3d>, VoxelKeyHash> voxels_;
};

/// A voxel is static when points from at least `min_observations` distinct
/// clouds fall in it. Throws InsufficientViews for fewer than 2 clouds.
VoxelMap build_static_map(std::span<const PointCloud> world_clouds, double voxel_size, int min_observations);

enum class Motion : std::uint8_t { Static = 0, Dynamic = 1 };

/// Dynamic iff fewer than k static points lie within `radius` (inclusive).
std::vector<Motion> classify_dynamic(const PointCloud& world_query, const VoxelMap& static_map, int k,
                                     double radius);

/// Pixels hit by a dynamic point, then dilated by a (2r+1)^2 square.
MovableMask render_movable_mask(const PointCloud& dynamic_points, const CameraModel& camera, int dilation);

/// Square dilation of a binary mask.
MovableMask dilate(const MovableMask& mask, int radius);

/// Points whose flag equals `which`.
PointCloud select_points(const PointCloud& cloud, const std::vector<Motion>& flags, Motion which);

}  // namespace bevlab
