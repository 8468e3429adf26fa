#include "bevlab/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "bevlab/error.hpp"
#include "bevlab/log.hpp"

namespace bevlab {

double PcaModel::explained_variance_fraction() const {
  if (total_variance <= 0.0) return 0.0;
  return eigenvalues.sum() / total_variance;
}

PcaModel pca_fit(const Eigen::MatrixXd& features, int out_dim) {
  require(out_dim >= 1, ErrorCode::InvalidArgument, "out_dim must be positive");
  require(features.rows() > out_dim && features.cols() >= out_dim, ErrorCode::InvalidArgument,
          "pca needs N > out_dim and D >= out_dim");
  require(features.allFinite(), ErrorCode::InvalidArgument, "pca input is not finite");
  PcaModel model;
  model.mean = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(features.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, ErrorCode::InvalidArgument, "covariance eigendecomposition failed");
  // Eigen sorts ascending.
  const Eigen::VectorXd values = solver.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  model.total_variance = cov.trace();
  const double floor = 1e-12 * std::max(1.0, values.size() > 0 ? values(0) : 0.0);
  int keep = 0;
  while (keep < out_dim && values(keep) > floor) ++keep;
  if (keep < out_dim) {
    model.rank_deficient = true;
    logger().warn("pca: only {} of {} requested components are nonzero", keep, out_dim);
  }
  model.eigenvalues = values.head(keep);
  model.components = vectors.leftCols(keep);
  for (int c = 0; c < keep; ++c) {
    Eigen::Index arg = 0;
    model.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, c) < 0.0) model.components.col(c) *= -1.0;
  }
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& features) {
  require(features.cols() == model.mean.size(), ErrorCode::DimensionMismatch, "pca input dimension differs from fit");
  return (features.rowwise() - model.mean.transpose()) * model.components;
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Eigen::VectorXd d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += chosen[static_cast<std::size_t>(i)] ? 0.0 : d2(i);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = unit_uniform(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)] || d2(i) <= 0.0) continue;
        acc += d2(i);
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick < 0) {
      for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) pick = i;
      }
    }
    centroids.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    d2 = d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

double assign(const Eigen::MatrixXd& centroids, const Eigen::MatrixXd& x, std::vector<int>& labels,
              Eigen::VectorXd& dist) {
  labels.assign(static_cast<std::size_t>(x.rows()), 0);
  dist.resize(x.rows());
  double objective = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist(i) = best;
    objective += best;
  }
  return objective;
}

}  // namespace

std::vector<int> assign_nearest(const Eigen::MatrixXd& centroids, const Eigen::MatrixXd& features) {
  require(centroids.rows() > 0, ErrorCode::InvalidArgument, "no centroids");
  require(centroids.cols() == features.cols(), ErrorCode::DimensionMismatch, "feature dimension differs from centroids");
  std::vector<int> labels;
  Eigen::VectorXd dist;
  assign(centroids, features, labels, dist);
  return labels;
}

KMeansResult kmeans(const Eigen::MatrixXd& features, const KMeansConfig& config) {
  require(config.k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(features.rows() >= config.k, ErrorCode::InvalidArgument, "kmeans needs at least k samples");
  require(features.allFinite(), ErrorCode::InvalidArgument, "kmeans input is not finite");
  std::mt19937_64 rng(config.seed);
  KMeansResult result;
  Eigen::MatrixXd centroids = seed_plus_plus(features, config.k, rng);
  Eigen::VectorXd dist;
  result.objective_history.push_back(assign(centroids, features, result.assignments, dist));

  for (int iter = 0; iter < config.max_iters; ++iter) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(config.k, features.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(config.k), 0);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const int c = result.assignments[static_cast<std::size_t>(i)];
      sums.row(c) += features.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    Eigen::MatrixXd next = centroids;
    std::vector<char> taken(static_cast<std::size_t>(features.rows()), 0);
    for (int c = 0; c < config.k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = 0;
      double best = -1.0;
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        if (!taken[static_cast<std::size_t>(i)] && dist(i) > best) {
          best = dist(i);
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = 1;
      next.row(c) = features.row(far);
    }
    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    result.objective_history.push_back(assign(centroids, features, result.assignments, dist));
    result.iterations = iter + 1;
    if (shift < config.tol) break;
  }
  result.model.centroids = std::move(centroids);
  result.model.fitted = true;
  return result;
}

}  // namespace bevlab
