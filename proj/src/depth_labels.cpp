#include "bevlab/depth_labels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace bevlab {

DepthImage consistency_filter(const DepthImage& lidar, const DepthImage& stereo, double rel_threshold) {
  require_same_shape(lidar, stereo, "lidar and stereo depth differ in size");
  require(rel_threshold > 0.0 && rel_threshold <= 1.0, ErrorCode::InvalidArgument,
          "relative threshold must be in (0, 1]");
  DepthImage out = lidar;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double dl = lidar[i];
    const double ds = stereo[i];
    if (dl <= 0.0 || ds <= 0.0) continue;
    if (std::abs(dl - ds) / ds > rel_threshold) out[i] = 0.0;
  }
  return out;
}

DepthImage idw_infill(const DepthImage& sparse, const IdwConfig& config, const GrayImage* guide) {
  require(config.window_radius >= 1, ErrorCode::InvalidArgument, "IDW window radius must be >= 1");
  require(config.power > 0.0, ErrorCode::InvalidArgument, "IDW power must be positive");
  const bool use_guide = guide != nullptr && config.edge_sigma > 0.0;
  if (use_guide) require_same_shape(sparse, *guide, "guide image differs from depth image");

  const int r = config.window_radius;
  const int span = 2 * r + 1;
  std::vector<double> distance_weight(static_cast<std::size_t>(span * span), 0.0);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      distance_weight[static_cast<std::size_t>((dy + r) * span + dx + r)] =
          std::pow(std::hypot(static_cast<double>(dx), static_cast<double>(dy)), -config.power);
    }
  }
  std::array<double, 256> intensity_weight{};
  if (use_guide) {
    for (int di = 0; di < 256; ++di) {
      intensity_weight[di] = std::exp(-(di * di) / (2.0 * config.edge_sigma * config.edge_sigma));
    }
  }

  DepthImage out = sparse;
  const int w = sparse.width(), h = sparse.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (sparse(y, x) > 0.0) continue;
      double num = 0.0, den = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const double d = sparse(yy, xx);
          if (d <= 0.0) continue;
          double wgt = distance_weight[static_cast<std::size_t>((dy + r) * span + dx + r)];
          if (use_guide) wgt *= intensity_weight[std::abs(int((*guide)(y, x)) - int((*guide)(yy, xx)))];
          num += wgt * d;
          den += wgt;
        }
      }
      if (den > 0.0) out(y, x) = num / den;
    }
  }
  return out;
}

std::uint16_t depth_bin(double depth, int num_bins, double d_min, double d_max) {
  if (!(depth > 0.0)) return 0;
  const double clamped = std::clamp(depth, d_min, d_max);
  const double scaled = (clamped - d_min) / (d_max - d_min) * (num_bins - 1);
  const int bin = 1 + static_cast<int>(std::floor(scaled));
  return static_cast<std::uint16_t>(std::min(bin, num_bins - 1));
}

BinnedDepth bin_depth(const DepthImage& depth, int num_bins, double d_min, double d_max) {
  require(num_bins >= 2 && num_bins <= 65535, ErrorCode::InvalidArgument, "need 2 <= num_bins <= 65535");
  require(d_min < d_max, ErrorCode::InvalidArgument, "d_min must be below d_max");
  BinnedDepth out;
  out.num_bins = num_bins;
  out.bins = Raster<std::uint16_t, BinTag>(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) out.bins[i] = depth_bin(depth[i], num_bins, d_min, d_max);
  return out;
}

DepthLabel make_depth_label(std::span<const PointCloud> scans, std::span<const Pose> poses,
                            const CameraModel& camera, const StereoInput& stereo, const DepthLabelConfig& config) {
  require(!scans.empty(), ErrorCode::InvalidArgument, "no scans to accumulate");
  camera.validate();

  DepthLabel out;
  const PointCloud world = accumulate_clouds(scans, poses);
  out.accumulated = render_depth(project_cloud(world, camera), camera.width, camera.height);
  for (auto& d : out.accumulated.data()) {
    if (d > config.max_depth) d = 0.0;
  }

  if (stereo.disparity != nullptr) {
    require(stereo.disparity->width() == camera.width && stereo.disparity->height() == camera.height,
            ErrorCode::DimensionMismatch, "disparity map differs from camera size");
    out.stereo = disparity_to_depth(*stereo.disparity, stereo.baseline, camera.fx);
  } else {
    require(stereo.left != nullptr && stereo.right != nullptr, ErrorCode::InvalidArgument,
            "need a stereo pair or a disparity map");
    require(stereo.left->width() == camera.width && stereo.left->height() == camera.height,
            ErrorCode::DimensionMismatch, "stereo images differ from camera size");
    out.stereo = disparity_to_depth(stereo_disparity(*stereo.left, *stereo.right, config.stereo), stereo.baseline,
                                    camera.fx);
  }

  out.filtered = consistency_filter(out.accumulated, out.stereo, config.rel_threshold);
  const GrayImage* guide = config.use_guide ? stereo.left : nullptr;
  out.label = idw_infill(out.filtered, config.idw, guide);
  out.density_before = density(out.filtered);
  out.density_after = density(out.label);
  return out;
}

}  // namespace bevlab
