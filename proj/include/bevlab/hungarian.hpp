#pragma once

#include <vector>

#include <Eigen/Core>

namespace bevlab {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unmatched rows
  double total = 0.0;
};

/// Minimum-cost one-to-one assignment of min(n, m) pairs (Kuhn-Munkres with
/// potentials, O(n^2 m)).
Assignment hungarian(const Eigen::MatrixXd& cost);

}  // namespace bevlab
