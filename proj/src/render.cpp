#include "bevlab/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bevlab/clustering.hpp"

namespace bevlab {

namespace {

constexpr io::Rgb kWhite{255, 255, 255};

constexpr std::array<io::Rgb, 20> kPalette{{
    {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
    {145, 30, 180}, {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212},
    {0, 128, 128},  {220, 190, 255}, {170, 110, 40}, {128, 0, 0},    {170, 255, 195},
    {128, 128, 0},  {255, 215, 180}, {0, 0, 128},    {128, 128, 128}, {40, 40, 90},
}};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

io::Rgb label_color(std::uint16_t label) {
  if (label == 0) return {64, 64, 64};
  return kPalette[(label - 1u) % kPalette.size()];
}

io::Rgb elevation_color(double z, double lo, double hi) {
  const double f = hi > lo ? std::clamp((z - lo) / (hi - lo), 0.0, 1.0) : 0.0;
  return {to_byte(255.0 * f), to_byte(255.0 * (1.0 - std::abs(2.0 * f - 1.0)) * 0.5), to_byte(255.0 * (1.0 - f))};
}

io::RgbImage render_grid_ppm(const LabelGrid& grid) {
  io::RgbImage image(grid.cols(), grid.rows(), kWhite);
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (grid.is_valid(r, c)) image(r, c) = label_color(grid.at(r, c));
    }
  }
  return image;
}

io::RgbImage render_grid_ppm(const FeatureGrid& grid, RenderMode mode) {
  io::RgbImage image(grid.cols(), grid.rows(), kWhite);
  if (mode == RenderMode::Labels) {
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        if (grid.is_valid(r, c)) image(r, c) = label_color(static_cast<std::uint16_t>(std::lround(grid.at(r, c))));
      }
    }
    return image;
  }
  if (mode == RenderMode::Elevation) {
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        if (grid.is_valid(r, c)) image(r, c) = elevation_color(grid.at(r, c));
      }
    }
    return image;
  }

  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (grid.is_valid(i)) cells.push_back(i);
  }
  if (cells.empty()) return image;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(cells.size()), grid.channels);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (int ch = 0; ch < grid.channels; ++ch) x(static_cast<Eigen::Index>(k), ch) = grid.at(cells[k], ch);
  }
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), 3);
  const int dim = std::min(3, grid.channels);
  if (grid.channels > 3 && x.rows() > 3) {
    const PcaModel model = pca_fit(x, 3);
    const Eigen::MatrixXd p = pca_transform(model, x);
    y.leftCols(p.cols()) = p;
  } else {
    y.leftCols(dim) = x.leftCols(dim);
  }
  for (int ch = 0; ch < 3; ++ch) {
    const double lo = y.col(ch).minCoeff();
    const double hi = y.col(ch).maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    y.col(ch) = ((y.col(ch).array() - lo) / span * 255.0).matrix();
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const int r = static_cast<int>(cells[k] / static_cast<std::size_t>(grid.cols()));
    const int c = static_cast<int>(cells[k] % static_cast<std::size_t>(grid.cols()));
    image(r, c) = {to_byte(y(row, 0)), to_byte(y(row, 1)), to_byte(y(row, 2))};
  }
  return image;
}

}  // namespace bevlab
