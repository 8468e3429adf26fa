#include "bevlab/splat.hpp"

#include <cmath>

namespace bevlab {

std::array<CornerWeight, 4> bilinear_weights(const Eigen::Vector3d& local, const GridConfig& grid) {
  // Shift so that cell centres land on integer coordinates.
  const Eigen::Vector2d g = grid.continuous(local) - Eigen::Vector2d::Constant(0.5);
  const double r0 = std::floor(g.x());
  const double c0 = std::floor(g.y());
  const double fr = g.x() - r0;
  const double fc = g.y() - c0;
  const int r = static_cast<int>(r0);
  const int c = static_cast<int>(c0);
  return {{{r, c, (1.0 - fr) * (1.0 - fc)},
           {r, c + 1, (1.0 - fr) * fc},
           {r + 1, c, fr * (1.0 - fc)},
           {r + 1, c + 1, fr * fc}}};
}

SplatResult splat_features(const PointCloud& cloud, const GridConfig& grid) {
  grid.validate();
  cloud.validate();
  require(cloud.has_features(), ErrorCode::InvalidArgument, "splat needs per-point features");
  const int dim = static_cast<int>(cloud.features.cols());

  SplatResult out;
  out.features = FeatureGrid(grid, dim, 0.0, true);
  out.weight = FeatureGrid(grid, 1, 0.0, false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d local = cloud.frame == Frame::World ? grid.to_grid_frame(cloud.points[i]) : cloud.points[i];
    bool any = false;
    for (const auto& corner : bilinear_weights(local, grid)) {
      if (!grid.contains(corner.row, corner.col)) continue;
      any = true;
      if (corner.weight <= 0.0) continue;
      const std::size_t cell = grid.index(corner.row, corner.col);
      out.weight.at(cell) += corner.weight;
      double* f = &out.features.at(cell);
      for (int z = 0; z < dim; ++z) f[z] += corner.weight * cloud.features(static_cast<Eigen::Index>(i), z);
    }
    if (!any) ++out.dropped;
  }
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const double w = out.weight.at(cell);
    if (w <= 0.0) continue;
    out.features.valid[cell] = 1;
    double* f = &out.features.at(cell);
    for (int z = 0; z < dim; ++z) f[z] /= w;
  }
  return out;
}

}  // namespace bevlab
