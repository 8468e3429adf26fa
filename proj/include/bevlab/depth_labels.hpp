#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bevlab/geometry.hpp"
#include "bevlab/raster.hpp"
#include "bevlab/stereo.hpp"

namespace bevlab {

/// Per-pixel depth bin in {0..num_bins-1}; 0 = invalid/unknown.
struct BinnedDepth {
  Raster<std::uint16_t, BinTag> bins;
  int num_bins = 0;
};

/// Keeps a LiDAR depth where the stereo depth is invalid or the relative
/// error |lidar - stereo| / stereo is within `rel_threshold`.
DepthImage consistency_filter(const DepthImage& lidar, const DepthImage& stereo, double rel_threshold);

struct IdwConfig {
  int window_radius = 4;
  double power = 2.0;
  /// Gaussian intensity weight exp(-dI^2 / 2 sigma^2); <= 0 disables it.
  double edge_sigma = 0.0;
};

/// Fills invalid pixels with the inverse-distance-weighted mean of the valid
/// pixels in their (2r+1)^2 window. Valid pixels are untouched; weights are
/// computed from the input only, so filling is not cascaded.
DepthImage idw_infill(const DepthImage& sparse, const IdwConfig& config, const GrayImage* guide = nullptr);

/// invalid -> 0; d -> 1 + floor((clamp(d) - d_min) / (d_max - d_min) * (C - 1)), capped at C - 1.
BinnedDepth bin_depth(const DepthImage& depth, int num_bins, double d_min, double d_max);
std::uint16_t depth_bin(double depth, int num_bins, double d_min, double d_max);

struct DepthLabelConfig {
  double rel_threshold = 0.30;
  IdwConfig idw;
  StereoConfig stereo;
  double max_depth = 51.2;
  bool use_guide = false;
};

/// Stereo evidence for a frame: either a rectified pair or a precomputed disparity.
struct StereoInput {
  const GrayImage* left = nullptr;
  const GrayImage* right = nullptr;
  const DisparityMap* disparity = nullptr;
  double baseline = 0.0;
};

struct DepthLabel {
  DepthImage accumulated;  // z-buffered projection of the accumulated scans
  DepthImage stereo;
  DepthImage filtered;     // after the consistency filter
  DepthImage label;        // after infilling
  double density_before = 0.0;
  double density_after = 0.0;
};

/// accumulate_clouds -> project_cloud (z-buffer) -> consistency_filter -> idw_infill.
/// `camera` is world -> camera at the frame being labelled.
DepthLabel make_depth_label(std::span<const PointCloud> scans, std::span<const Pose> poses,
                            const CameraModel& camera, const StereoInput& stereo, const DepthLabelConfig& config);

}  // namespace bevlab
