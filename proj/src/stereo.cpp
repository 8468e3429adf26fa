#include "bevlab/stereo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace bevlab {

double DisparityMap::valid_fraction() const {
  if (valid.empty()) return 0.0;
  std::size_t n = 0;
  for (auto v : valid.data()) n += v != 0;
  return static_cast<double>(n) / static_cast<double>(valid.size());
}

namespace {

struct Volume {
  int width = 0, height = 0, depth = 0;
  std::vector<std::uint32_t> data;

  Volume(int w, int h, int d, std::uint32_t fill = 0)
      : width(w), height(h), depth(d), data(static_cast<std::size_t>(w) * h * d, fill) {}
  std::uint32_t* at(int row, int col) {
    return data.data() + (static_cast<std::size_t>(row) * width + col) * depth;
  }
  const std::uint32_t* at(int row, int col) const {
    return data.data() + (static_cast<std::size_t>(row) * width + col) * depth;
  }
};

// SAD over a (2r+1)^2 window with replicated borders. Candidates that
// would read the right image left of column 0 get the maximal cost.
Volume block_costs(const GrayImage& left, const GrayImage& right, int radius, int num_disp) {
  const int w = left.width(), h = left.height();
  const int win = 2 * radius + 1;
  const std::uint32_t worst = 255u * static_cast<std::uint32_t>(win * win);
  Volume cost(w, h, num_disp, worst);

  std::vector<std::uint32_t> diff(static_cast<std::size_t>(w) * h);
  std::vector<std::uint32_t> integral(static_cast<std::size_t>(w + 2 * radius + 1) * (h + 2 * radius + 1));
  const int iw = w + 2 * radius + 1;

  for (int d = 0; d < num_disp; ++d) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int xr = std::max(x - d, 0);
        diff[static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint32_t>(std::abs(int(left(y, x)) - int(right(y, xr))));
      }
    }
    // Integral image over the border-replicated difference image.
    std::fill(integral.begin(), integral.end(), 0u);
    for (int yy = 0; yy < h + 2 * radius; ++yy) {
      const int sy = std::clamp(yy - radius, 0, h - 1);
      std::uint32_t row_sum = 0;
      for (int xx = 0; xx < w + 2 * radius; ++xx) {
        const int sx = std::clamp(xx - radius, 0, w - 1);
        row_sum += diff[static_cast<std::size_t>(sy) * w + sx];
        integral[static_cast<std::size_t>(yy + 1) * iw + xx + 1] =
            integral[static_cast<std::size_t>(yy) * iw + xx + 1] + row_sum;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = d; x < w; ++x) {
        const std::size_t y0 = y, y1 = y + win, x0 = x, x1 = x + win;
        cost.at(y, x)[d] = integral[y1 * iw + x1] - integral[y0 * iw + x1] - integral[y1 * iw + x0] +
                           integral[y0 * iw + x0];
      }
    }
  }
  return cost;
}

// Adds the path costs of direction (dx, dy) into `sum`.
void aggregate_direction(const Volume& cost, int dx, int dy, std::uint32_t p1, std::uint32_t p2, Volume& path,
                         Volume& sum) {
  const int w = cost.width, h = cost.height, nd = cost.depth;
  const int y_begin = dy >= 0 ? 0 : h - 1, y_end = dy >= 0 ? h : -1, y_step = dy >= 0 ? 1 : -1;
  const int x_begin = dx >= 0 ? 0 : w - 1, x_end = dx >= 0 ? w : -1, x_step = dx >= 0 ? 1 : -1;

  for (int y = y_begin; y != y_end; y += y_step) {
    for (int x = x_begin; x != x_end; x += x_step) {
      const std::uint32_t* c = cost.at(y, x);
      std::uint32_t* l = path.at(y, x);
      const int py = y - dy, px = x - dx;
      if (py < 0 || py >= h || px < 0 || px >= w) {
        std::copy(c, c + nd, l);
      } else {
        const std::uint32_t* prev = path.at(py, px);
        const std::uint32_t prev_min = *std::min_element(prev, prev + nd);
        for (int d = 0; d < nd; ++d) {
          std::uint32_t best = prev[d];
          if (d > 0) best = std::min(best, prev[d - 1] + p1);
          if (d + 1 < nd) best = std::min(best, prev[d + 1] + p1);
          best = std::min(best, prev_min + p2);
          l[d] = c[d] + best - prev_min;
        }
      }
      std::uint32_t* s = sum.at(y, x);
      for (int d = 0; d < nd; ++d) s[d] += l[d];
    }
  }
}

}  // namespace

DisparityMap stereo_disparity(const GrayImage& left, const GrayImage& right, const StereoConfig& config) {
  require(left.same_shape(right), ErrorCode::DimensionMismatch, "stereo images differ in size");
  require(config.block_radius >= 0 && config.max_disparity >= 0, ErrorCode::InvalidArgument,
          "stereo radius and max disparity must be non-negative");
  require(config.num_paths == 4 || config.num_paths == 8, ErrorCode::InvalidArgument, "num_paths must be 4 or 8");
  const int w = left.width(), h = left.height();
  DisparityMap out(w, h);
  if (w == 0 || h == 0) return out;
  const int nd = std::min(config.max_disparity, w - 1) + 1;
  const int win = 2 * config.block_radius + 1;
  const auto area = static_cast<std::uint32_t>(win * win);

  const Volume cost = block_costs(left, right, config.block_radius, nd);
  Volume sum(w, h, nd, 0);
  Volume path(w, h, nd, 0);
  static constexpr std::array<std::array<int, 2>, 8> kDirs{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}};
  // Integer sums: the result does not depend on the order directions are added.
  for (int i = 0; i < config.num_paths; ++i) {
    aggregate_direction(cost, kDirs[i][0], kDirs[i][1], static_cast<std::uint32_t>(config.p1) * area,
                        static_cast<std::uint32_t>(config.p2) * area, path, sum);
  }

  // Right-view disparities from the same aggregated volume.
  std::vector<int> right_disp(static_cast<std::size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y) {
    for (int xr = 0; xr < w; ++xr) {
      std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
      int best_d = -1;
      for (int d = 0; d < nd && xr + d < w; ++d) {
        const std::uint32_t s = sum.at(y, xr + d)[d];
        if (s < best) {
          best = s;
          best_d = d;
        }
      }
      right_disp[static_cast<std::size_t>(y) * w + xr] = best_d;
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint32_t* s = sum.at(y, x);
      const int max_d = std::min(nd - 1, x);
      int best_d = 0;
      for (int d = 1; d <= max_d; ++d) {
        if (s[d] < s[best_d]) best_d = d;
      }
      bool unique = true;
      for (int d = 0; d <= max_d && unique; ++d) {
        if (std::abs(d - best_d) > 1 && static_cast<double>(s[d]) * (1.0 - config.uniqueness_ratio) <= s[best_d]) {
          unique = false;
        }
      }
      if (!unique) continue;
      // Aggregation can carry a preference into flat regions; a raw matching
      // cost that ties away from its minimum means the window has no texture.
      const std::uint32_t* raw = cost.at(y, x);
      const std::uint32_t raw_best = *std::min_element(raw, raw + max_d + 1);
      int raw_arg = 0;
      while (raw[raw_arg] != raw_best) ++raw_arg;
      for (int d = 0; d <= max_d && unique; ++d) {
        if (std::abs(d - raw_arg) > 1 && raw[d] == raw_best) unique = false;
      }
      if (!unique) continue;
      const int dr = right_disp[static_cast<std::size_t>(y) * w + (x - best_d)];
      if (dr < 0 || std::abs(dr - best_d) > config.lr_tolerance) continue;

      double disp = best_d;
      if (config.subpixel && best_d > 0 && best_d < max_d) {
        const double a = s[best_d - 1], b = s[best_d], c = s[best_d + 1];
        const double denom = a - 2.0 * b + c;
        if (denom > 0.0) disp += std::clamp((a - c) / (2.0 * denom), -0.5, 0.5);
      }
      out.set(y, x, disp);
    }
  }
  return out;
}

DepthImage disparity_to_depth(const DisparityMap& disparity, double baseline, double fx) {
  require(baseline > 0.0 && fx > 0.0, ErrorCode::InvalidArgument, "baseline and fx must be positive");
  DepthImage depth(disparity.width(), disparity.height(), 0.0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = disparity.values[i];
    if (disparity.valid[i] && d > 0.0) depth[i] = fx * baseline / d;
  }
  return depth;
}

DisparityMap depth_to_disparity(const DepthImage& depth, double baseline, double fx) {
  require(baseline > 0.0 && fx > 0.0, ErrorCode::InvalidArgument, "baseline and fx must be positive");
  DisparityMap out(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (depth[i] > 0.0) {
      out.values[i] = fx * baseline / depth[i];
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace bevlab
