#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"

namespace bevlab {

struct CornerWeight {
  int row = 0;
  int col = 0;
  double weight = 0.0;
};

/// Bilinear weights of a grid-frame point over its four surrounding cell
/// centres, before any out-of-grid corner is dropped. Weights sum to 1.
std::array<CornerWeight, 4> bilinear_weights(const Eigen::Vector3d& local, const GridConfig& grid);

struct SplatResult {
  FeatureGrid features;  // Z channels, weight-normalised, invalid where weight is 0
  FeatureGrid weight;    // 1 channel, sum of bilinear weights
  std::size_t dropped = 0;  // points with no corner inside the grid
};

/// Soft-quantisation splat of point features (cloud.features, N x Z) into
/// the grid. Points are taken in the grid frame unless the cloud is tagged
/// World, in which case the grid frame transform is applied first.
SplatResult splat_features(const PointCloud& cloud, const GridConfig& grid);

}  // namespace bevlab
