#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bevlab/clustering.hpp"
#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"

namespace bevlab {

enum class Region { Occluded, Unoccluded, Both };
const char* to_string(Region region) noexcept;
bool in_region(CellState state, Region region) noexcept;

/// K x K counts, rows = ground truth, cols = prediction. Cells whose
/// prediction is missing are tallied per gt class in `unpredicted`.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  int num_classes() const noexcept { return num_classes_; }
  void add(int gt, int pred, std::uint64_t count = 1);
  void add_unpredicted(int gt, std::uint64_t count = 1);
  std::uint64_t at(int gt, int pred) const { return counts_[index(gt, pred)]; }
  std::uint64_t unpredicted(int gt) const { return unpredicted_[static_cast<std::size_t>(gt)]; }
  std::uint64_t total() const noexcept;
  std::uint64_t gt_count(int cls) const;
  std::uint64_t pred_count(int cls) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int gt, int pred) const {
    return static_cast<std::size_t>(gt) * static_cast<std::size_t>(num_classes_) + static_cast<std::size_t>(pred);
  }
  int num_classes_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> unpredicted_;
};

struct IouReport {
  std::vector<std::optional<double>> per_class;  // empty when the class is in neither pred nor gt
  double miou = 0.0;                             // mean over classes present in gt
  ConfusionMatrix confusion;
};

IouReport iou_from_confusion(const ConfusionMatrix& confusion);

/// Confusion over gt-valid cells of the region. Throws EmptyRegion when no
/// cell qualifies; num_classes = 0 sizes the matrix from the data.
ConfusionMatrix confusion(const LabelGrid& pred, const LabelGrid& gt, Region region, const PartitionGrid& partition,
                          int num_classes = 0);
IouReport iou(const LabelGrid& pred, const LabelGrid& gt, Region region, const PartitionGrid& partition,
              int num_classes = 0);

/// Mean |pred - gt| over cells valid in both and inside the region.
double mae(const FeatureGrid& pred, const FeatureGrid& gt, Region region, const PartitionGrid& partition);

struct UnsupConfig {
  int k = 0;               // 0 -> number of classes
  std::uint64_t seed = 7;
  int max_iters = 100;
  double tol = 1e-6;
  int num_classes = 0;     // 0 -> 1 + max label seen
};

struct UnsupResult {
  IouReport report;
  ClusterModel model;        // cluster_to_class filled in
  std::vector<int> test_predictions;  // class per test row, -1 = unmatched cluster
};

/// Cluster validation features, assign test rows to the nearest centroid,
/// match clusters to classes by Hungarian on negated test overlaps, then
/// score the mapped predictions.
UnsupResult unsup_ssc_eval(const Eigen::MatrixXd& val_features, std::span<const int> val_labels,
                           const Eigen::MatrixXd& test_features, std::span<const int> test_labels,
                           const UnsupConfig& config);

/// Backprojects pixel features (rows in row-major pixel order) and max-pools
/// them per cell; cells without a contributing pixel are invalid.
FeatureGrid build_foundation_bev(const Eigen::MatrixXd& pixel_features, const DepthImage& depth,
                                 const CameraModel& camera, const GridConfig& grid);

}  // namespace bevlab
