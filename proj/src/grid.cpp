#include "bevlab/grid.hpp"

#include <cmath>

namespace bevlab {

GridConfig GridConfig::ego_centered(int rows, int cols, double resolution) {
  GridConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.resolution = resolution;
  cfg.ego_row = rows - 1;
  cfg.ego_col = cols / 2;
  cfg.origin = {(cfg.ego_row + 0.5) * resolution, (cfg.ego_col + 0.5) * resolution};
  cfg.validate();
  return cfg;
}

GridConfig GridConfig::with_frame(const Pose& grid_to_world) const {
  GridConfig out = *this;
  out.frame_ = grid_to_world;
  out.world_to_grid_ = grid_to_world.inverse();
  return out;
}

std::optional<CellIndex> GridConfig::cell_of_local(const Eigen::Vector3d& local) const {
  const Eigen::Vector2d g = continuous(local);
  const double r = std::floor(g.x());
  const double c = std::floor(g.y());
  if (r < 0.0 || c < 0.0 || r >= rows || c >= cols) return std::nullopt;
  return CellIndex{static_cast<int>(r), static_cast<int>(c)};
}

std::optional<CellIndex> GridConfig::cell_of(const Eigen::Vector3d& world) const {
  return cell_of_local(to_grid_frame(world));
}

Eigen::Vector2d GridConfig::cell_center(int row, int col) const {
  return {origin.x() - (row + 0.5) * resolution, origin.y() - (col + 0.5) * resolution};
}

void GridConfig::validate() const {
  require(rows > 0 && cols > 0, ErrorCode::InvalidArgument, "grid must have positive size");
  require(resolution > 0.0 && std::isfinite(resolution), ErrorCode::InvalidArgument,
          "grid resolution must be positive");
  require(origin.allFinite(), ErrorCode::InvalidArgument, "grid origin must be finite");
}

bool GridConfig::same_layout(const GridConfig& other) const noexcept {
  return rows == other.rows && cols == other.cols && std::abs(resolution - other.resolution) <= 1e-6 * resolution &&
         (origin - other.origin).cwiseAbs().maxCoeff() < 1e-6;
}

LabelMask to_label_mask(const LabelGrid& grid) {
  LabelMask mask(grid.cols(), grid.rows(), 0);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) mask[i] = grid.is_valid(i) ? grid.at(i) : 0;
  return mask;
}

LabelGrid to_label_grid(const LabelMask& mask, const GridConfig& config) {
  require(mask.width() == config.cols && mask.height() == config.rows, ErrorCode::DimensionMismatch,
          "mask does not match grid size");
  LabelGrid grid(config, 1, 0, true);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    grid.at(i) = mask[i];
    grid.valid[i] = mask[i] != 0;
  }
  return grid;
}

}  // namespace bevlab
