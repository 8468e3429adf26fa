#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bevlab/depth_labels.hpp"
#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"

namespace bevlab {

struct LossConfig {
  double tau = 0.1;
  std::array<double, 3> alpha{1.0, 1.0, 1.0};  // multiview, foundation, depth
  std::array<double, 3> beta{1.0, 1.0, 1.0};   // supcon, elevation, depth
  int num_bins = 128;

  void validate() const;
};

// ---- supervised contrastive ------------------------------------------------
//
// L = 1/|I| sum_{i in I} -1/|P(i)| sum_{p in P(i)} log( exp(z_i.z_p/tau) / sum_{a != i} exp(z_i.z_a/tau) )
//
// I is the set of patches with at least one same-label partner; patches
// without one still appear as negatives in every denominator.

/// Rows of `features` are patches. Rows whose norm is off by more than 1e-6
/// are renormalised (with a warning) before evaluation.
double supcon_loss(const Eigen::MatrixXd& features, std::span<const int> labels, double tau);
/// The formula applied verbatim to the given rows (no renormalisation).
double supcon_loss_raw(const Eigen::MatrixXd& features, std::span<const int> labels, double tau);
/// d supcon_loss_raw / d features.
Eigen::MatrixXd supcon_gradient(const Eigen::MatrixXd& features, std::span<const int> labels, double tau);

// ---- elevation ---------------------------------------------------------------

/// Mean |pred - gt| over cells where mask != 0. Throws EmptyMask.
double elevation_l1(std::span<const double> pred, std::span<const double> gt, std::span<const std::uint8_t> mask);
/// Grid form; the mask is the gt validity plane (all cells when absent).
double elevation_l1(const FeatureGrid& pred, const FeatureGrid& gt);
std::vector<double> elevation_l1_gradient(std::span<const double> pred, std::span<const double> gt,
                                          std::span<const std::uint8_t> mask);

// ---- depth -------------------------------------------------------------------

struct DepthLossTerms {
  double l1 = 0.0;  // mean |d_hat - d|
  double ce = 0.0;  // mean cross entropy
  std::size_t count = 0;
  double total() const { return l1 + ce; }
};

/// Mean over pixels with gt_bin != 0 of |d_hat - d| + CE(softmax(logits), gt_bin).
/// `logits` has one row per pixel (row-major) and num_bins columns.
DepthLossTerms depth_loss_terms(const Eigen::MatrixXd& logits, const DepthImage& pred_depth, const DepthImage& gt,
                                const BinnedDepth& gt_bins);
double depth_loss(const Eigen::MatrixXd& logits, const DepthImage& pred_depth, const DepthImage& gt,
                  const BinnedDepth& gt_bins);
/// d(mean L1 term)/d pred_depth, one entry per pixel.
std::vector<double> depth_l1_gradient(const DepthImage& pred_depth, const DepthImage& gt, const BinnedDepth& gt_bins);
/// d(mean CE term)/d logits.
Eigen::MatrixXd depth_ce_gradient(const Eigen::MatrixXd& logits, const BinnedDepth& gt_bins);

// ---- multi-view / foundation -------------------------------------------------

struct Correspondence {
  std::size_t anchor = 0;  // pixel index in the anchor image
  std::size_t other = 0;   // pixel index in the other view
};

/// Mean over correspondences of ||anchor[a] - other[b]||^2. Throws EmptyCorrespondence.
double multiview_loss(const Eigen::MatrixXd& anchor_features, const Eigen::MatrixXd& other_features,
                      std::span<const Correspondence> correspondences);

/// All (anchor pixel, other pixel) pairs whose backprojections fall in the
/// same grid cell. Cameras are world -> camera.
std::vector<Correspondence> build_correspondences(const DepthImage& anchor_depth, const CameraModel& anchor_camera,
                                                  const DepthImage& other_depth, const CameraModel& other_camera,
                                                  const GridConfig& grid);

/// Mean over masked rows of ||pred - target||_2. Targets must be unit norm (1e-6).
double foundation_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                       std::span<const std::uint8_t> mask);

double combine_pretrain(double multiview, double foundation, double depth, const std::array<double, 3>& alpha);
double combine_train(double supcon, double elevation, double depth, const std::array<double, 3>& beta);

// ---- gradient oracle ---------------------------------------------------------

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + e_i eps) - f(x - e_i eps)) / 2 eps.
/// Throws NonFiniteLoss if any evaluation is not finite.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double eps);

}  // namespace bevlab
