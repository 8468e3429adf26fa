#include <doctest.h>

#include <set>

#include "bevlab/render.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

const GridConfig kGrid = GridConfig::ego_centered(6, 5, 0.2);

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("a constant label grid renders one colour") {
    const LabelGrid g(kGrid, 1, 3, false);
    const io::RgbImage img = render_grid_ppm(g);
    CHECK(img.width() == 5);
    CHECK(img.height() == 6);
    for (const auto& px : img.data()) CHECK(px == label_color(3));
  }

  TEST_CASE("distinct small labels get distinct colours") {
    std::set<std::tuple<int, int, int>> seen;
    for (std::uint16_t l = 0; l <= 20; ++l) {
      const io::Rgb c = label_color(l);
      seen.insert({c.r, c.g, c.b});
    }
    CHECK(seen.size() == 21);
  }

  TEST_CASE("invalid cells are white") {
    LabelGrid g(kGrid, 1, 1, true);
    g.valid[kGrid.index(2, 2)] = 1;
    const io::RgbImage img = render_grid_ppm(g);
    CHECK(img(2, 2) == label_color(1));
    CHECK(img(0, 0) == io::Rgb{255, 255, 255});
  }

  TEST_CASE("elevation ramp endpoints and clamping") {
    CHECK(elevation_color(-1.2) == io::Rgb{0, 0, 255});
    CHECK(elevation_color(1.8) == io::Rgb{255, 0, 0});
    CHECK(elevation_color(-9.0) == elevation_color(-1.2));
    CHECK(elevation_color(9.0) == elevation_color(1.8));
    FeatureGrid g(kGrid, 1, 1.8, false);
    g.at(0, 0) = -1.2;
    const io::RgbImage img = render_grid_ppm(g, RenderMode::Elevation);
    CHECK(img(0, 0) == io::Rgb{0, 0, 255});
    CHECK(img(5, 4) == io::Rgb{255, 0, 0});
  }

  TEST_CASE("feature rendering is deterministic and respects validity") {
    testgen::Gen gen(1);
    FeatureGrid g(kGrid, 6, 0.0, true);
    for (auto& v : g.values) v = gen.uniform(-1, 1);
    for (std::size_t i = 0; i < g.cell_count(); ++i) g.valid[i] = i % 4 != 0;
    const io::RgbImage a = render_grid_ppm(g, RenderMode::FeaturePca);
    CHECK(a == render_grid_ppm(g, RenderMode::FeaturePca));
    CHECK(a[0] == io::Rgb{255, 255, 255});
    CHECK(io::encode_ppm(a).rfind("P6\n5 6\n255\n", 0) == 0);
  }
}
