#pragma once

#include <cstdint>

#include "bevlab/raster.hpp"

namespace bevlab {

struct DisparityTag;

/// Disparity in pixels plus validity. Zero is a legitimate disparity in
/// memory; the on-disk encoding folds it into the invalid value.
struct DisparityMap {
  Raster<double, DisparityTag> values;
  MovableMask valid;

  DisparityMap() = default;
  DisparityMap(int width, int height) : values(width, height, 0.0), valid(width, height, 0) {}
  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
  bool is_valid(int row, int col) const { return valid(row, col) != 0; }
  void set(int row, int col, double disparity) {
    values(row, col) = disparity;
    valid(row, col) = 1;
  }
  double valid_fraction() const;
};

struct StereoConfig {
  int block_radius = 2;       // SAD window is (2r+1)^2
  int max_disparity = 64;
  int num_paths = 8;          // 4 or 8 aggregation directions
  int p1 = 8;                 // penalty for |dd| = 1, per unit SAD cost scale
  int p2 = 32;                // penalty for |dd| > 1
  double uniqueness_ratio = 0.05;
  int lr_tolerance = 1;       // max |dL - dR|
  bool subpixel = true;       // parabolic refinement around the integer minimum
};

/// SAD block matching with semi-global aggregation over `num_paths`
/// scanline directions, a uniqueness test and a left-right check.
/// Left is the reference: left(x) matches right(x - d).
DisparityMap stereo_disparity(const GrayImage& left, const GrayImage& right, const StereoConfig& config);

/// d = fx * baseline / disparity; zero or invalid disparity -> invalid depth.
DepthImage disparity_to_depth(const DisparityMap& disparity, double baseline, double fx);

/// Inverse of disparity_to_depth for valid depths (used by the synthetic oracle).
DisparityMap depth_to_disparity(const DepthImage& depth, double baseline, double fx);

}  // namespace bevlab
