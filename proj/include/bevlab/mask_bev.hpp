#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"
#include "bevlab/raster.hpp"

namespace bevlab {

/// Backprojects labelled, valid-depth, non-movable pixels into the grid and
/// keeps the most frequent label per cell (ties -> smallest label).
/// `camera` is world -> camera; the grid carries its own frame.
LabelMask lift_mask_to_bev(const LabelMask& mask, const DepthImage& depth, const CameraModel& camera,
                           const GridConfig& grid, const MovableMask* movable = nullptr);

struct MergeResult {
  LabelMask merged;
  LabelMask relabeled;                               // m2 expressed in m1's label space
  std::map<std::uint16_t, std::uint16_t> label_map;  // m2 label -> m1 space, injective
  std::uint16_t max_label = 0;                       // running fresh-label counter after the merge
};

/// Iterative greedy mask merging of m2 into the anchor m1.
///
/// m2 labels are visited in ascending order. Each one is mapped to the m1
/// label it overlaps most among labels not yet claimed by an earlier m2
/// label (ties -> smallest); without such a label it gets max_label + 1.
/// The merged mask keeps m1 wherever m1 is nonzero.
/// `max_label` seeds the fresh-label counter; it defaults to max(m1).
MergeResult igmm_merge(const LabelMask& m1, const LabelMask& m2, std::uint16_t max_label = 0);

struct MaskFrame {
  const LabelMask* mask = nullptr;
  const DepthImage* depth = nullptr;
  CameraModel camera;  // world -> camera at this frame
  const MovableMask* movable = nullptr;
};

/// Lifts the first frame as the anchor, then lifts and merges each later
/// frame in order. The result depends on frame order.
LabelMask accumulate_bev_masks(const std::vector<MaskFrame>& frames, const GridConfig& grid);

}  // namespace bevlab
