#pragma once

#include <cstdint>

#include "bevlab/grid.hpp"
#include "bevlab/io.hpp"

namespace bevlab {

enum class RenderMode { Labels, Elevation, FeaturePca };

/// Fixed categorical colour for a label (label 0 is dark grey).
io::Rgb label_color(std::uint16_t label);
/// Linear blue -> red ramp over [lo, hi], clamped.
io::Rgb elevation_color(double z, double lo = -1.2, double hi = 1.8);

/// Invalid cells are white. Row 0 is the top image row.
io::RgbImage render_grid_ppm(const LabelGrid& grid);
io::RgbImage render_grid_ppm(const FeatureGrid& grid, RenderMode mode);

}  // namespace bevlab
