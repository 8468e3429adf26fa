#include <doctest.h>

#include <cmath>

#include "bevlab/stereo.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

GrayImage shifted(const GrayImage& left, int shift, testgen::Gen& g) {
  GrayImage right(left.width(), left.height());
  for (int r = 0; r < left.height(); ++r) {
    for (int c = 0; c < left.width(); ++c) {
      right(r, c) = c + shift < left.width() ? left(r, c + shift) : static_cast<std::uint8_t>(g.integer(0, 255));
    }
  }
  return right;
}

}  // namespace

TEST_SUITE("stereo") {
  TEST_CASE("identical textured images give zero disparity") {
    testgen::Gen g(1);
    const GrayImage img = g.texture(64, 40);
    const DisparityMap d = stereo_disparity(img, img, StereoConfig{});
    int valid = 0;
    for (int r = 0; r < d.height(); ++r) {
      for (int c = 0; c < d.width(); ++c) {
        if (!d.is_valid(r, c)) continue;
        ++valid;
        CHECK(std::abs(d.values(r, c)) <= 0.5);
      }
    }
    CHECK(valid >= 0.95 * 64 * 40);
  }

  TEST_CASE("an 8 px shift is recovered on interior pixels") {
    testgen::Gen g(2);
    const GrayImage left = g.texture(96, 48);
    const GrayImage right = shifted(left, 8, g);
    const DisparityMap d = stereo_disparity(left, right, StereoConfig{});
    int interior = 0, good = 0;
    for (int r = 4; r < 44; ++r) {
      for (int c = 16; c < 90; ++c) {
        ++interior;
        if (d.is_valid(r, c) && std::abs(d.values(r, c) - 8.0) <= 0.5) ++good;
      }
    }
    CHECK(good == interior);
  }

  TEST_CASE("textureless pair is mostly rejected") {
    const GrayImage flat(64, 40, 120);
    const DisparityMap d = stereo_disparity(flat, flat, StereoConfig{});
    CHECK(d.valid_fraction() <= 0.10);
  }

  TEST_CASE("mismatched sizes are rejected") {
    try {
      stereo_disparity(GrayImage(10, 10), GrayImage(11, 10), StereoConfig{});
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }

  TEST_CASE("4-path aggregation also recovers the shift") {
    testgen::Gen g(3);
    const GrayImage left = g.texture(80, 40);
    StereoConfig cfg;
    cfg.num_paths = 4;
    const DisparityMap d = stereo_disparity(left, shifted(left, 5, g), cfg);
    CHECK(d.is_valid(20, 40));
    CHECK(d.values(20, 40) == doctest::Approx(5.0).epsilon(0.1));
  }

  TEST_CASE("disparity to depth") {
    DisparityMap d(3, 1);
    d.set(0, 0, 10.0);
    d.set(0, 1, 20.0);
    const DepthImage depth = disparity_to_depth(d, 0.5, 100.0);
    CHECK(depth[0] == doctest::Approx(5.0));
    CHECK(depth[1] == doctest::Approx(2.5));
    CHECK(depth[2] == 0.0);
  }

  TEST_CASE("property: depth_to_disparity inverts disparity_to_depth") {
    testgen::Gen g(4);
    DepthImage depth(20, 10);
    for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = g.coin(0.8) ? g.uniform(0.5, 60) : 0.0;
    const double b = g.uniform(0.1, 1.0), fx = g.uniform(100, 900);
    const DepthImage back = disparity_to_depth(depth_to_disparity(depth, b, fx), b, fx);
    for (std::size_t i = 0; i < depth.size(); ++i) CHECK(back[i] == doctest::Approx(depth[i]).epsilon(1e-12));
  }

  TEST_CASE("output is deterministic") {
    testgen::Gen g(5);
    const GrayImage left = g.texture(48, 32);
    const GrayImage right = shifted(left, 3, g);
    const DisparityMap a = stereo_disparity(left, right, StereoConfig{});
    const DisparityMap b = stereo_disparity(left, right, StereoConfig{});
    CHECK(a.values == b.values);
    CHECK(a.valid == b.valid);
  }
}
