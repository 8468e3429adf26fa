#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bevlab/error.hpp"
#include "bevlab/geometry.hpp"

namespace bevlab {

struct CellIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Metric BEV grid placed in the world.
///
/// Cell (0,0) is the forward-left corner in the grid frame: row grows
/// towards -x, column grows towards -y. `origin` is the (x, y) of that
/// corner in the grid frame and `frame` maps grid frame -> world.
class GridConfig {
 public:
  int rows = 256;
  int cols = 256;
  double resolution = 0.1;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  int ego_row = 255;
  int ego_col = 128;

  /// Ego at the centre of cell (rows-1, cols/2), looking towards row 0.
  static GridConfig ego_centered(int rows = 256, int cols = 256, double resolution = 0.1);

  const Pose& frame() const noexcept { return frame_; }
  GridConfig with_frame(const Pose& grid_to_world) const;

  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const noexcept { return row >= 0 && col >= 0 && row < rows && col < cols; }

  Eigen::Vector3d to_grid_frame(const Eigen::Vector3d& world) const { return world_to_grid_.apply(world); }
  /// Continuous (row, col) of a grid-frame point; cell centres sit at +0.5.
  Eigen::Vector2d continuous(const Eigen::Vector3d& local) const {
    return {(origin.x() - local.x()) / resolution, (origin.y() - local.y()) / resolution};
  }
  /// Cell containing a world point, if inside the grid.
  std::optional<CellIndex> cell_of(const Eigen::Vector3d& world) const;
  std::optional<CellIndex> cell_of_local(const Eigen::Vector3d& local) const;
  /// Grid-frame (x, y) of a cell centre.
  Eigen::Vector2d cell_center(int row, int col) const;

  void validate() const;

  /// Equal shape, resolution and origin (the frame is not compared).
  bool same_layout(const GridConfig& other) const noexcept;

 private:
  Pose frame_ = Pose::identity();
  Pose world_to_grid_ = Pose::identity();
};

/// Per-cell visibility class of a frame.
enum class CellState : std::uint8_t { OutsideFov = 0, Observed = 1, Occluded = 2 };

/// H x W x C grid with an optional per-cell validity plane (empty = all valid).
template <typename T>
struct Grid {
  GridConfig config;
  int channels = 1;
  std::vector<T> values;
  std::vector<std::uint8_t> valid;

  Grid() = default;
  Grid(const GridConfig& cfg, int num_channels, T fill, bool with_validity)
      : config(cfg), channels(num_channels) {
    require(num_channels >= 1, ErrorCode::InvalidArgument, "grid needs at least one channel");
    values.assign(cfg.cell_count() * static_cast<std::size_t>(num_channels), fill);
    if (with_validity) valid.assign(cfg.cell_count(), 0);
  }

  int rows() const noexcept { return config.rows; }
  int cols() const noexcept { return config.cols; }
  std::size_t cell_count() const noexcept { return config.cell_count(); }
  bool has_validity() const noexcept { return !valid.empty(); }
  bool is_valid(std::size_t cell) const noexcept { return valid.empty() || valid[cell] != 0; }
  bool is_valid(int row, int col) const noexcept { return is_valid(config.index(row, col)); }

  T& at(int row, int col, int channel = 0) {
    return values[config.index(row, col) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel)];
  }
  const T& at(int row, int col, int channel = 0) const {
    return values[config.index(row, col) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel)];
  }
  T& at(std::size_t cell, int channel = 0) { return values[cell * static_cast<std::size_t>(channels) + channel]; }
  const T& at(std::size_t cell, int channel = 0) const {
    return values[cell * static_cast<std::size_t>(channels) + channel];
  }

  std::size_t valid_count() const noexcept {
    if (valid.empty()) return cell_count();
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
};

/// Real-valued channels (elevation, features, splat weights).
using FeatureGrid = Grid<double>;
/// Integer class or instance labels; 0 = unlabeled for instance grids.
using LabelGrid = Grid<std::uint16_t>;
using PartitionGrid = Grid<CellState>;

/// A label grid viewed as a mask (validity is dropped; 0 stays unlabeled).
LabelMask to_label_mask(const LabelGrid& grid);
LabelGrid to_label_grid(const LabelMask& mask, const GridConfig& config);

}  // namespace bevlab
