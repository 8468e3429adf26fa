#pragma once

#include <span>
#include <vector>

#include "bevlab/dynamics.hpp"
#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"

namespace bevlab {

inline constexpr double kMinElevation = -1.2;
inline constexpr double kMaxElevation = 1.8;

/// Most frequent class per cell over all labelled world points (ties ->
/// smallest class); untouched cells invalid. Throws UnlabeledCloud.
LabelGrid build_semantic_map(std::span<const PointCloud> world_clouds, const GridConfig& grid);

struct ElevationRange {
  double min = kMinElevation;
  double max = kMaxElevation;
};

/// Mean z of the three lowest static points per cell, clamped to `range`.
/// `static_flags[i]` aligns with `world_clouds[i]`.
FeatureGrid build_elevation_map(std::span<const PointCloud> world_clouds,
                                std::span<const std::vector<Motion>> static_flags, const GridConfig& grid,
                                ElevationRange range = {});

/// observed: a scan point lands in the cell; occluded: unobserved but the
/// cell centre (grid-frame z = 0) projects into the camera image;
/// otherwise outside-FOV. `camera` is world -> camera.
PartitionGrid observation_partition(const PointCloud& world_scan, const CameraModel& camera,
                                    const GridConfig& grid);

}  // namespace bevlab
