#include "bevlab/mask_bev.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace bevlab {

namespace {

std::uint16_t max_value(const LabelMask& m) {
  std::uint16_t best = 0;
  for (auto v : m.data()) best = std::max(best, v);
  return best;
}

}  // namespace

LabelMask lift_mask_to_bev(const LabelMask& mask, const DepthImage& depth, const CameraModel& camera,
                           const GridConfig& grid, const MovableMask* movable) {
  require_same_shape(mask, depth, "mask and depth differ in size");
  if (movable != nullptr) require_same_shape(mask, *movable, "mask and movable mask differ in size");
  grid.validate();

  // (cell, label) hits; sorting makes the vote independent of pixel order.
  std::vector<std::pair<std::size_t, std::uint16_t>> hits;
  for_each_backprojected(depth, camera, [&](int row, int col, const Eigen::Vector3d& p) {
    const std::uint16_t label = mask(row, col);
    if (label == 0) return;
    if (movable != nullptr && (*movable)(row, col) != 0) return;
    if (auto cell = grid.cell_of(p)) hits.emplace_back(grid.index(cell->row, cell->col), label);
  });
  std::sort(hits.begin(), hits.end());

  LabelMask out(grid.cols, grid.rows, 0);
  std::size_t i = 0;
  while (i < hits.size()) {
    const std::size_t cell = hits[i].first;
    std::uint16_t best_label = 0;
    std::size_t best_count = 0;
    while (i < hits.size() && hits[i].first == cell) {
      const std::uint16_t label = hits[i].second;
      std::size_t count = 0;
      while (i < hits.size() && hits[i].first == cell && hits[i].second == label) {
        ++count;
        ++i;
      }
      // Labels arrive ascending, so strict > keeps the smallest on ties.
      if (count > best_count) {
        best_count = count;
        best_label = label;
      }
    }
    out[cell] = best_label;
  }
  return out;
}

MergeResult igmm_merge(const LabelMask& m1, const LabelMask& m2, std::uint16_t max_label) {
  require_same_shape(m1, m2, "masks differ in size");
  MergeResult result;
  result.max_label = std::max(max_label, max_value(m1));

  // overlaps[l2][l1] over cells where both are nonzero.
  std::map<std::uint16_t, std::map<std::uint16_t, std::size_t>> overlaps;
  for (std::size_t i = 0; i < m2.size(); ++i) {
    const std::uint16_t l2 = m2[i];
    if (l2 == 0) continue;
    auto& row = overlaps[l2];
    if (m1[i] != 0) ++row[m1[i]];
  }

  std::map<std::uint16_t, bool> claimed;
  for (const auto& [l2, counts] : overlaps) {
    std::uint16_t target = 0;
    std::size_t best = 0;
    for (const auto& [l1, count] : counts) {
      if (claimed.count(l1)) continue;
      if (count > best) {
        best = count;
        target = l1;
      }
    }
    if (target == 0) {
      require(result.max_label < std::numeric_limits<std::uint16_t>::max(), ErrorCode::InvalidArgument,
              "label space exhausted");
      target = ++result.max_label;
    }
    claimed[target] = true;
    result.label_map[l2] = target;
  }

  result.relabeled = LabelMask(m2.width(), m2.height(), 0);
  result.merged = m1;
  for (std::size_t i = 0; i < m2.size(); ++i) {
    if (m2[i] == 0) continue;
    const std::uint16_t mapped = result.label_map.at(m2[i]);
    result.relabeled[i] = mapped;
    if (m1[i] == 0) result.merged[i] = mapped;
  }
  return result;
}

LabelMask accumulate_bev_masks(const std::vector<MaskFrame>& frames, const GridConfig& grid) {
  require(!frames.empty(), ErrorCode::InvalidArgument, "need at least one frame");
  auto lift = [&](const MaskFrame& f) {
    require(f.mask != nullptr && f.depth != nullptr, ErrorCode::InvalidArgument, "frame without mask or depth");
    return lift_mask_to_bev(*f.mask, *f.depth, f.camera, grid, f.movable);
  };
  LabelMask accumulated = lift(frames.front());
  std::uint16_t max_label = max_value(accumulated);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    MergeResult merged = igmm_merge(accumulated, lift(frames[i]), max_label);
    accumulated = std::move(merged.merged);
    max_label = merged.max_label;
  }
  return accumulated;
}

}  // namespace bevlab
