#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bevlab {

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;   // D x k, columns sorted by descending eigenvalue
  Eigen::VectorXd eigenvalues;  // k
  double total_variance = 0.0;
  bool rank_deficient = false;

  int output_dim() const { return static_cast<int>(components.cols()); }
  double explained_variance_fraction() const;
};

/// Rows of `features` are samples. Each eigenvector is signed so its
/// largest-magnitude coordinate is positive. When fewer than `out_dim`
/// eigenvalues are nonzero the model keeps only those and is flagged
/// rank_deficient (with a warning).
PcaModel pca_fit(const Eigen::MatrixXd& features, int out_dim);
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& features);

struct KMeansConfig {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;
};

struct ClusterModel {
  Eigen::MatrixXd centroids;         // k x Z
  bool fitted = false;
  std::vector<int> cluster_to_class; // filled by the Hungarian step; -1 = unmatched
};

struct KMeansResult {
  ClusterModel model;
  std::vector<int> assignments;
  std::vector<double> objective_history;  // sum of squared distances after each assignment step
  int iterations = 0;
};

/// k-means++ seeding from `seed`, then Lloyd iterations until the largest
/// centroid shift drops below tol or max_iters. Empty clusters are moved to
/// the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& features, const KMeansConfig& config);

/// Index of the nearest centroid per row (ties -> lowest index).
std::vector<int> assign_nearest(const Eigen::MatrixXd& centroids, const Eigen::MatrixXd& features);

}  // namespace bevlab
