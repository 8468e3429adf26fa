#include "bevlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bevlab/hungarian.hpp"
#include "bevlab/log.hpp"

namespace bevlab {

const char* to_string(Region region) noexcept {
  switch (region) {
    case Region::Occluded:
      return "occluded";
    case Region::Unoccluded:
      return "unoccluded";
    case Region::Both:
      return "both";
  }
  return "unknown";
}

bool in_region(CellState state, Region region) noexcept {
  switch (region) {
    case Region::Occluded:
      return state == CellState::Occluded;
    case Region::Unoccluded:
      return state == CellState::Observed;
    case Region::Both:
      return state == CellState::Observed || state == CellState::Occluded;
  }
  return false;
}

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
  require(num_classes >= 0, ErrorCode::InvalidArgument, "negative class count");
  counts_.assign(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0);
  unpredicted_.assign(static_cast<std::size_t>(num_classes), 0);
}

void ConfusionMatrix::add(int gt, int pred, std::uint64_t count) {
  require(gt >= 0 && gt < num_classes_ && pred >= 0 && pred < num_classes_, ErrorCode::InvalidArgument,
          "class index outside the confusion matrix");
  counts_[index(gt, pred)] += count;
}

void ConfusionMatrix::add_unpredicted(int gt, std::uint64_t count) {
  require(gt >= 0 && gt < num_classes_, ErrorCode::InvalidArgument, "class index outside the confusion matrix");
  unpredicted_[static_cast<std::size_t>(gt)] += count;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  for (auto c : unpredicted_) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::gt_count(int cls) const {
  std::uint64_t n = unpredicted(cls);
  for (int p = 0; p < num_classes_; ++p) n += at(cls, p);
  return n;
}

std::uint64_t ConfusionMatrix::pred_count(int cls) const {
  std::uint64_t n = 0;
  for (int g = 0; g < num_classes_; ++g) n += at(g, cls);
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  require(num_classes_ == other.num_classes_, ErrorCode::DimensionMismatch, "confusion matrices differ in size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < unpredicted_.size(); ++i) unpredicted_[i] += other.unpredicted_[i];
  return *this;
}

IouReport iou_from_confusion(const ConfusionMatrix& confusion) {
  IouReport report{{}, 0.0, confusion};
  report.per_class.resize(static_cast<std::size_t>(confusion.num_classes()));
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < confusion.num_classes(); ++c) {
    const auto tp = confusion.at(c, c);
    const auto gt = confusion.gt_count(c);
    const auto pred = confusion.pred_count(c);
    if (gt + pred == 0) continue;
    const double value = static_cast<double>(tp) / static_cast<double>(gt + pred - tp);
    report.per_class[static_cast<std::size_t>(c)] = value;
    if (gt > 0) {
      sum += value;
      ++present;
    }
  }
  report.miou = present > 0 ? sum / present : 0.0;
  return report;
}

namespace {

template <typename A, typename B>
void require_layouts(const A& pred, const B& gt, const PartitionGrid& partition) {
  require(pred.config.same_layout(gt.config) && partition.config.same_layout(gt.config), ErrorCode::DimensionMismatch,
          "prediction, ground truth and partition grids differ in layout");
  require(pred.channels == 1 && gt.channels == 1 && partition.channels == 1, ErrorCode::DimensionMismatch,
          "evaluation expects single-channel grids");
}

}  // namespace

ConfusionMatrix confusion(const LabelGrid& pred, const LabelGrid& gt, Region region, const PartitionGrid& partition,
                          int num_classes) {
  require_layouts(pred, gt, partition);
  std::vector<std::size_t> cells;
  int max_label = -1;
  for (std::size_t i = 0; i < gt.cell_count(); ++i) {
    if (!gt.is_valid(i) || !in_region(partition.at(i), region)) continue;
    cells.push_back(i);
    max_label = std::max(max_label, static_cast<int>(gt.at(i)));
    if (pred.is_valid(i)) max_label = std::max(max_label, static_cast<int>(pred.at(i)));
  }
  require(!cells.empty(), ErrorCode::EmptyRegion, std::string("no evaluable cells in region ") + to_string(region));
  if (num_classes == 0) num_classes = max_label + 1;
  require(max_label < num_classes, ErrorCode::InvalidArgument, "label exceeds the class count");
  ConfusionMatrix cm(num_classes);
  for (auto i : cells) {
    if (pred.is_valid(i)) {
      cm.add(gt.at(i), pred.at(i));
    } else {
      cm.add_unpredicted(gt.at(i));
    }
  }
  return cm;
}

IouReport iou(const LabelGrid& pred, const LabelGrid& gt, Region region, const PartitionGrid& partition,
              int num_classes) {
  return iou_from_confusion(confusion(pred, gt, region, partition, num_classes));
}

double mae(const FeatureGrid& pred, const FeatureGrid& gt, Region region, const PartitionGrid& partition) {
  require_layouts(pred, gt, partition);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.cell_count(); ++i) {
    if (!gt.is_valid(i) || !pred.is_valid(i) || !in_region(partition.at(i), region)) continue;
    sum += std::abs(pred.at(i) - gt.at(i));
    ++n;
  }
  require(n > 0, ErrorCode::EmptyRegion, std::string("no evaluable cells in region ") + to_string(region));
  return sum / static_cast<double>(n);
}

UnsupResult unsup_ssc_eval(const Eigen::MatrixXd& val_features, std::span<const int> val_labels,
                           const Eigen::MatrixXd& test_features, std::span<const int> test_labels,
                           const UnsupConfig& config) {
  require(static_cast<std::size_t>(val_features.rows()) == val_labels.size() &&
              static_cast<std::size_t>(test_features.rows()) == test_labels.size(),
          ErrorCode::LengthMismatch, "one label per feature row is required");
  require(val_features.cols() == test_features.cols(), ErrorCode::DimensionMismatch,
          "validation and test features differ in dimension");
  int num_classes = config.num_classes;
  if (num_classes == 0) {
    int max_label = -1;
    for (int l : val_labels) max_label = std::max(max_label, l);
    for (int l : test_labels) max_label = std::max(max_label, l);
    num_classes = max_label + 1;
  }
  require(num_classes >= 1, ErrorCode::InvalidArgument, "no classes to evaluate");
  for (int l : test_labels) {
    require(l >= 0 && l < num_classes, ErrorCode::InvalidArgument, "test label outside the ontology");
  }
  const int k = config.k > 0 ? config.k : num_classes;
  if (k < num_classes) logger().warn("unsup eval: k={} is below the class count {}", k, num_classes);

  KMeansResult km = kmeans(val_features, {k, config.seed, config.max_iters, config.tol});
  const std::vector<int> clusters = assign_nearest(km.model.centroids, test_features);

  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, num_classes);
  for (std::size_t i = 0; i < clusters.size(); ++i) cost(clusters[i], test_labels[i]) -= 1.0;
  const Assignment match = hungarian(cost);

  UnsupResult out;
  out.model = std::move(km.model);
  out.model.cluster_to_class = match.row_to_col;
  ConfusionMatrix cm(num_classes);
  out.test_predictions.resize(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const int cls = out.model.cluster_to_class[static_cast<std::size_t>(clusters[i])];
    out.test_predictions[i] = cls;
    if (cls < 0) {
      cm.add_unpredicted(test_labels[i]);
    } else {
      cm.add(test_labels[i], cls);
    }
  }
  out.report = iou_from_confusion(cm);
  return out;
}

FeatureGrid build_foundation_bev(const Eigen::MatrixXd& pixel_features, const DepthImage& depth,
                                 const CameraModel& camera, const GridConfig& grid) {
  require(pixel_features.rows() == static_cast<Eigen::Index>(depth.size()), ErrorCode::DimensionMismatch,
          "one feature row per pixel is required");
  require(pixel_features.cols() >= 1, ErrorCode::InvalidArgument, "features need at least one channel");
  const int z = static_cast<int>(pixel_features.cols());
  FeatureGrid out(grid, z, -std::numeric_limits<double>::infinity(), true);
  for_each_backprojected(depth, camera, [&](int row, int col, const Eigen::Vector3d& p) {
    const auto cell = grid.cell_of(p);
    if (!cell) return;
    const std::size_t idx = grid.index(cell->row, cell->col);
    const auto pixel = static_cast<Eigen::Index>(depth.index(row, col));
    out.valid[idx] = 1;
    for (int c = 0; c < z; ++c) out.at(idx, c) = std::max(out.at(idx, c), pixel_features(pixel, c));
  });
  for (std::size_t i = 0; i < out.cell_count(); ++i) {
    if (out.valid[i]) continue;
    for (int c = 0; c < z; ++c) out.at(i, c) = 0.0;
  }
  return out;
}

}  // namespace bevlab
