#include "bevlab/bev_truth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bevlab {

LabelGrid build_semantic_map(std::span<const PointCloud> world_clouds, const GridConfig& grid) {
  grid.validate();
  std::uint16_t max_label = 0;
  for (std::size_t i = 0; i < world_clouds.size(); ++i) {
    const auto& c = world_clouds[i];
    require(c.has_labels() || c.size() == 0, ErrorCode::UnlabeledCloud,
            "cloud " + std::to_string(i) + " carries no labels");
    for (auto l : c.labels) max_label = std::max(max_label, l);
  }

  LabelGrid out(grid, 1, 0, true);
  const std::size_t num_labels = static_cast<std::size_t>(max_label) + 1;
  auto vote = [&](std::size_t cell, std::uint16_t label, std::uint32_t count, std::uint32_t& best) {
    if (count > best) {
      best = count;
      out.at(cell) = label;
      out.valid[cell] = 1;
    }
  };

  if (num_labels <= 64) {
    std::vector<std::uint32_t> counts(grid.cell_count() * num_labels, 0);
    for (const auto& c : world_clouds) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (auto cell = grid.cell_of(c.points[i])) ++counts[grid.index(cell->row, cell->col) * num_labels + c.labels[i]];
      }
    }
    for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
      std::uint32_t best = 0;
      for (std::size_t l = 0; l < num_labels; ++l) vote(cell, static_cast<std::uint16_t>(l), counts[cell * num_labels + l], best);
    }
    return out;
  }

  std::vector<std::pair<std::size_t, std::uint16_t>> hits;
  for (const auto& c : world_clouds) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (auto cell = grid.cell_of(c.points[i])) hits.emplace_back(grid.index(cell->row, cell->col), c.labels[i]);
    }
  }
  std::sort(hits.begin(), hits.end());
  std::size_t i = 0;
  while (i < hits.size()) {
    const std::size_t cell = hits[i].first;
    std::uint32_t best = 0;
    while (i < hits.size() && hits[i].first == cell) {
      const std::uint16_t label = hits[i].second;
      std::uint32_t count = 0;
      while (i < hits.size() && hits[i].first == cell && hits[i].second == label) {
        ++count;
        ++i;
      }
      vote(cell, label, count, best);
    }
  }
  return out;
}

FeatureGrid build_elevation_map(std::span<const PointCloud> world_clouds,
                                std::span<const std::vector<Motion>> static_flags, const GridConfig& grid,
                                ElevationRange range) {
  grid.validate();
  require(world_clouds.size() == static_flags.size(), ErrorCode::LengthMismatch,
          "one flag vector per cloud is required");
  require(range.min < range.max, ErrorCode::InvalidArgument, "elevation range is empty");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 3>> lowest(grid.cell_count(), {kInf, kInf, kInf});
  for (std::size_t c = 0; c < world_clouds.size(); ++c) {
    const auto& cloud = world_clouds[c];
    require(static_flags[c].size() == cloud.size(), ErrorCode::LengthMismatch,
            "flags of cloud " + std::to_string(c) + " do not match its points");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (static_flags[c][i] != Motion::Static) continue;
      auto cell = grid.cell_of(cloud.points[i]);
      if (!cell) continue;
      auto& low = lowest[grid.index(cell->row, cell->col)];
      double z = cloud.points[i].z();
      // Insertion into the sorted three smallest.
      for (double& slot : low) {
        if (z < slot) std::swap(z, slot);
      }
    }
  }

  FeatureGrid out(grid, 1, 0.0, true);
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    double sum = 0.0;
    int n = 0;
    for (double z : lowest[cell]) {
      if (z == kInf) break;
      sum += z;
      ++n;
    }
    if (n == 0) continue;
    out.at(cell) = std::clamp(sum / n, range.min, range.max);
    out.valid[cell] = 1;
  }
  return out;
}

PartitionGrid observation_partition(const PointCloud& world_scan, const CameraModel& camera, const GridConfig& grid) {
  grid.validate();
  camera.validate();
  PartitionGrid out(grid, 1, CellState::OutsideFov, false);
  for (const auto& p : world_scan.points) {
    if (auto cell = grid.cell_of(p)) out.at(cell->row, cell->col) = CellState::Observed;
  }
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      auto& state = out.at(r, c);
      if (state == CellState::Observed) continue;
      const Eigen::Vector2d center = grid.cell_center(r, c);
      const Eigen::Vector3d world = grid.frame().apply({center.x(), center.y(), 0.0});
      const auto px = project_point(camera, world);
      if (!px) continue;
      const double u = std::floor(px->u + 0.5), v = std::floor(px->v + 0.5);
      if (u >= 0.0 && v >= 0.0 && u < camera.width && v < camera.height) state = CellState::Occluded;
    }
  }
  return out;
}

}  // namespace bevlab
