#include "bevlab/losses.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "bevlab/log.hpp"

namespace bevlab {

void LossConfig::validate() const {
  require(tau > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
  for (double a : alpha) require(a >= 0.0, ErrorCode::InvalidArgument, "alpha weights must be non-negative");
  for (double b : beta) require(b >= 0.0, ErrorCode::InvalidArgument, "beta weights must be non-negative");
  require(num_bins >= 2, ErrorCode::InvalidArgument, "need at least two depth bins");
}

namespace {

struct SupconTerms {
  std::vector<Eigen::Index> anchors;
  std::vector<std::vector<Eigen::Index>> positives;
};

SupconTerms supcon_terms(const Eigen::MatrixXd& features, std::span<const int> labels, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
  require(static_cast<std::size_t>(features.rows()) == labels.size(), ErrorCode::LengthMismatch,
          "one label per patch is required");
  require(features.rows() >= 2, ErrorCode::DegenerateBatch, "need at least two patches");
  SupconTerms t;
  std::unordered_map<int, std::vector<Eigen::Index>> by_label;
  for (Eigen::Index i = 0; i < features.rows(); ++i) by_label[labels[static_cast<std::size_t>(i)]].push_back(i);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto& same = by_label[labels[static_cast<std::size_t>(i)]];
    if (same.size() < 2) continue;
    std::vector<Eigen::Index> pos;
    pos.reserve(same.size() - 1);
    for (auto p : same) {
      if (p != i) pos.push_back(p);
    }
    t.anchors.push_back(i);
    t.positives.push_back(std::move(pos));
  }
  require(!t.anchors.empty(), ErrorCode::DegenerateBatch, "no patch has a positive partner");
  return t;
}

// log sum_{a != i} exp(s(i, a)) and the matching softmax weights.
double log_sum_exp_excluding(const Eigen::MatrixXd& sim, Eigen::Index i, Eigen::VectorXd* softmax) {
  double max_s = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < sim.cols(); ++a) {
    if (a != i) max_s = std::max(max_s, sim(i, a));
  }
  double acc = 0.0;
  for (Eigen::Index a = 0; a < sim.cols(); ++a) {
    if (a != i) acc += std::exp(sim(i, a) - max_s);
  }
  const double lse = max_s + std::log(acc);
  if (softmax != nullptr) {
    softmax->resize(sim.cols());
    for (Eigen::Index a = 0; a < sim.cols(); ++a) (*softmax)(a) = a == i ? 0.0 : std::exp(sim(i, a) - lse);
  }
  return lse;
}

}  // namespace

double supcon_loss_raw(const Eigen::MatrixXd& features, std::span<const int> labels, double tau) {
  const SupconTerms t = supcon_terms(features, labels, tau);
  const Eigen::MatrixXd sim = features * features.transpose() / tau;
  double total = 0.0;
  for (std::size_t k = 0; k < t.anchors.size(); ++k) {
    const Eigen::Index i = t.anchors[k];
    const double lse = log_sum_exp_excluding(sim, i, nullptr);
    double inner = 0.0;
    for (auto p : t.positives[k]) inner += sim(i, p) - lse;
    total += -inner / static_cast<double>(t.positives[k].size());
  }
  return total / static_cast<double>(t.anchors.size());
}

double supcon_loss(const Eigen::MatrixXd& features, std::span<const int> labels, double tau) {
  Eigen::MatrixXd z = features;
  bool renormalised = false;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double n = z.row(i).norm();
    if (std::abs(n - 1.0) > 1e-6) {
      require(n > 0.0, ErrorCode::InvalidArgument, "zero feature vector in supcon batch");
      z.row(i) /= n;
      renormalised = true;
    }
  }
  if (renormalised) logger().warn("supcon: features were not unit norm; renormalised");
  return supcon_loss_raw(z, labels, tau);
}

Eigen::MatrixXd supcon_gradient(const Eigen::MatrixXd& features, std::span<const int> labels, double tau) {
  const SupconTerms t = supcon_terms(features, labels, tau);
  const Eigen::MatrixXd sim = features * features.transpose() / tau;
  const double scale = 1.0 / static_cast<double>(t.anchors.size());
  // coeff(i, j) = dL / d sim(i, j)
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(features.rows(), features.rows());
  Eigen::VectorXd softmax;
  for (std::size_t k = 0; k < t.anchors.size(); ++k) {
    const Eigen::Index i = t.anchors[k];
    log_sum_exp_excluding(sim, i, &softmax);
    coeff.row(i) += scale * softmax.transpose();
    const double inv_p = 1.0 / static_cast<double>(t.positives[k].size());
    for (auto p : t.positives[k]) coeff(i, p) -= scale * inv_p;
  }
  // sim = Z Z^T / tau  =>  dL/dZ = (C + C^T) Z / tau
  return (coeff + coeff.transpose()) * features / tau;
}

double elevation_l1(std::span<const double> pred, std::span<const double> gt, std::span<const std::uint8_t> mask) {
  require(pred.size() == gt.size() && (mask.empty() || mask.size() == gt.size()), ErrorCode::DimensionMismatch,
          "elevation inputs differ in size");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    sum += std::abs(pred[i] - gt[i]);
    ++n;
  }
  require(n > 0, ErrorCode::EmptyMask, "no valid elevation cells");
  return sum / static_cast<double>(n);
}

double elevation_l1(const FeatureGrid& pred, const FeatureGrid& gt) {
  require(pred.config.same_layout(gt.config) && pred.channels == 1 && gt.channels == 1,
          ErrorCode::DimensionMismatch, "elevation grids differ in layout");
  std::vector<std::uint8_t> mask = gt.valid;
  if (mask.empty()) mask.assign(gt.config.cell_count(), 1);
  return elevation_l1(pred.values, gt.values, mask);
}

std::vector<double> elevation_l1_gradient(std::span<const double> pred, std::span<const double> gt,
                                          std::span<const std::uint8_t> mask) {
  require(pred.size() == gt.size() && (mask.empty() || mask.size() == gt.size()), ErrorCode::DimensionMismatch,
          "elevation inputs differ in size");
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) n += mask.empty() || mask[i];
  require(n > 0, ErrorCode::EmptyMask, "no valid elevation cells");
  std::vector<double> grad(pred.size(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double diff = pred[i] - gt[i];
    grad[i] = (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0) / static_cast<double>(n);
  }
  return grad;
}

namespace {

void check_depth_inputs(const Eigen::MatrixXd* logits, const DepthImage* pred, const DepthImage& gt,
                        const BinnedDepth& bins) {
  require(gt.width() == bins.bins.width() && gt.height() == bins.bins.height(), ErrorCode::DimensionMismatch,
          "gt depth and bins differ in size");
  if (pred != nullptr) require_same_shape(*pred, gt, "predicted and gt depth differ in size");
  if (logits != nullptr) {
    require(logits->rows() == static_cast<Eigen::Index>(gt.size()) && logits->cols() == bins.num_bins,
            ErrorCode::DimensionMismatch, "logits must be (pixels x num_bins)");
  }
}

std::size_t count_valid(const BinnedDepth& bins) {
  std::size_t n = 0;
  for (auto b : bins.bins.data()) n += b != 0;
  require(n > 0, ErrorCode::EmptyMask, "no pixel has a valid depth bin");
  return n;
}

double row_log_sum_exp(const Eigen::MatrixXd& m, Eigen::Index row) {
  const double mx = m.row(row).maxCoeff();
  return mx + std::log((m.row(row).array() - mx).exp().sum());
}

}  // namespace

DepthLossTerms depth_loss_terms(const Eigen::MatrixXd& logits, const DepthImage& pred_depth, const DepthImage& gt,
                                const BinnedDepth& gt_bins) {
  check_depth_inputs(&logits, &pred_depth, gt, gt_bins);
  DepthLossTerms terms;
  terms.count = count_valid(gt_bins);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto bin = gt_bins.bins[i];
    if (bin == 0) continue;
    const auto row = static_cast<Eigen::Index>(i);
    terms.l1 += std::abs(pred_depth[i] - gt[i]);
    terms.ce += row_log_sum_exp(logits, row) - logits(row, bin);
  }
  terms.l1 /= static_cast<double>(terms.count);
  terms.ce /= static_cast<double>(terms.count);
  return terms;
}

double depth_loss(const Eigen::MatrixXd& logits, const DepthImage& pred_depth, const DepthImage& gt,
                  const BinnedDepth& gt_bins) {
  return depth_loss_terms(logits, pred_depth, gt, gt_bins).total();
}

std::vector<double> depth_l1_gradient(const DepthImage& pred_depth, const DepthImage& gt, const BinnedDepth& gt_bins) {
  check_depth_inputs(nullptr, &pred_depth, gt, gt_bins);
  const double n = static_cast<double>(count_valid(gt_bins));
  std::vector<double> grad(gt.size(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt_bins.bins[i] == 0) continue;
    const double diff = pred_depth[i] - gt[i];
    grad[i] = (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0) / n;
  }
  return grad;
}

Eigen::MatrixXd depth_ce_gradient(const Eigen::MatrixXd& logits, const BinnedDepth& gt_bins) {
  require(logits.rows() == static_cast<Eigen::Index>(gt_bins.bins.size()) && logits.cols() == gt_bins.num_bins,
          ErrorCode::DimensionMismatch, "logits must be (pixels x num_bins)");
  const double n = static_cast<double>(count_valid(gt_bins));
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  for (Eigen::Index row = 0; row < logits.rows(); ++row) {
    const auto bin = gt_bins.bins[static_cast<std::size_t>(row)];
    if (bin == 0) continue;
    const double lse = row_log_sum_exp(logits, row);
    grad.row(row) = (logits.row(row).array() - lse).exp().matrix() / n;
    grad(row, bin) -= 1.0 / n;
  }
  return grad;
}

double multiview_loss(const Eigen::MatrixXd& anchor_features, const Eigen::MatrixXd& other_features,
                      std::span<const Correspondence> correspondences) {
  require(!correspondences.empty(), ErrorCode::EmptyCorrespondence, "no correspondences");
  require(anchor_features.cols() == other_features.cols(), ErrorCode::DimensionMismatch,
          "feature dimensions differ between views");
  double sum = 0.0;
  for (const auto& c : correspondences) {
    require(c.anchor < static_cast<std::size_t>(anchor_features.rows()) &&
                c.other < static_cast<std::size_t>(other_features.rows()),
            ErrorCode::InvalidArgument, "correspondence index out of range");
    sum += (anchor_features.row(static_cast<Eigen::Index>(c.anchor)) -
            other_features.row(static_cast<Eigen::Index>(c.other)))
               .squaredNorm();
  }
  return sum / static_cast<double>(correspondences.size());
}

std::vector<Correspondence> build_correspondences(const DepthImage& anchor_depth, const CameraModel& anchor_camera,
                                                  const DepthImage& other_depth, const CameraModel& other_camera,
                                                  const GridConfig& grid) {
  std::unordered_map<std::size_t, std::vector<std::size_t>> other_by_cell;
  for_each_backprojected(other_depth, other_camera, [&](int row, int col, const Eigen::Vector3d& p) {
    if (auto cell = grid.cell_of(p)) {
      other_by_cell[grid.index(cell->row, cell->col)].push_back(other_depth.index(row, col));
    }
  });
  std::vector<Correspondence> out;
  for_each_backprojected(anchor_depth, anchor_camera, [&](int row, int col, const Eigen::Vector3d& p) {
    auto cell = grid.cell_of(p);
    if (!cell) return;
    auto it = other_by_cell.find(grid.index(cell->row, cell->col));
    if (it == other_by_cell.end()) return;
    for (auto b : it->second) out.push_back({anchor_depth.index(row, col), b});
  });
  return out;
}

double foundation_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                       std::span<const std::uint8_t> mask) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), ErrorCode::DimensionMismatch,
          "predicted and target features differ in shape");
  require(mask.empty() || mask.size() == static_cast<std::size_t>(pred.rows()), ErrorCode::DimensionMismatch,
          "mask length differs from feature rows");
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    require(std::abs(target.row(i).norm() - 1.0) <= 1e-6, ErrorCode::InvalidArgument,
            "foundation targets must be unit norm");
    sum += (pred.row(i) - target.row(i)).norm();
    ++n;
  }
  require(n > 0, ErrorCode::EmptyMask, "no masked pixels");
  return sum / static_cast<double>(n);
}

double combine_pretrain(double multiview, double foundation, double depth, const std::array<double, 3>& alpha) {
  return alpha[0] * multiview + alpha[1] * foundation + alpha[2] * depth;
}

double combine_train(double supcon, double elevation, double depth, const std::array<double, 3>& beta) {
  return beta[0] * supcon + beta[1] * elevation + beta[2] * depth;
}

std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double eps) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    require(std::isfinite(up) && std::isfinite(down), ErrorCode::NonFiniteLoss,
            "loss is not finite near coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace bevlab
