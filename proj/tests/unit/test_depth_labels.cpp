#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bevlab/depth_labels.hpp"
#include "bevlab/stereo.hpp"
#include "bevlab/synth.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

DepthImage one_pixel(double v) { return DepthImage(1, 1, v); }

// Straight transcription of the weighted mean over the (2r+1)^2 window.
DepthImage idw_oracle(const DepthImage& in, int r, double p, const GrayImage* guide, double sigma) {
  DepthImage out = in;
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      if (in(y, x) > 0.0) continue;
      double num = 0.0, den = 0.0;
      for (int yy = y - r; yy <= y + r; ++yy) {
        for (int xx = x - r; xx <= x + r; ++xx) {
          if (!in.contains(yy, xx) || in(yy, xx) <= 0.0) continue;
          double w = std::pow(std::hypot(xx - x, yy - y), -p);
          if (guide != nullptr) {
            const double di = double((*guide)(y, x)) - double((*guide)(yy, xx));
            w *= std::exp(-di * di / (2 * sigma * sigma));
          }
          num += w * in(yy, xx);
          den += w;
        }
      }
      if (den > 0.0) out(y, x) = num / den;
    }
  }
  return out;
}

DepthImage random_sparse(testgen::Gen& g, int w, int h, double fill) {
  DepthImage d(w, h, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (g.coin(fill)) d[i] = g.uniform(1.0, 40.0);
  }
  return d;
}

}  // namespace

TEST_SUITE("depth_labels") {
  TEST_CASE("consistency filter examples") {
    CHECK(consistency_filter(one_pixel(10.0), one_pixel(12.0), 0.30)[0] == 10.0);
    CHECK(consistency_filter(one_pixel(10.0), one_pixel(5.0), 0.30)[0] == 0.0);
    CHECK(consistency_filter(one_pixel(10.0), one_pixel(0.0), 0.30)[0] == 10.0);
  }

  TEST_CASE("consistency filter threshold is relative to stereo") {
    // |13 - 10| / 10 = 0.3 is kept; |7.6 - 10.9| / 10.9 > 0.3 is not.
    CHECK(consistency_filter(one_pixel(13.0), one_pixel(10.0), 0.30)[0] == 13.0);
    CHECK(consistency_filter(one_pixel(7.6), one_pixel(10.9), 0.30)[0] == 0.0);
  }

  TEST_CASE("property: consistency filter is a restriction") {
    testgen::Gen g(1);
    for (int trial = 0; trial < 50; ++trial) {
      const DepthImage lidar = random_sparse(g, 20, 15, 0.5);
      const DepthImage stereo = random_sparse(g, 20, 15, 0.7);
      const double t = g.uniform(0.05, 1.0);
      const DepthImage out = consistency_filter(lidar, stereo, t);
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > 0.0) CHECK(out[i] == lidar[i]);
        if (lidar[i] == 0.0) CHECK(out[i] == 0.0);
      }
    }
  }

  TEST_CASE("IDW hand example") {
    DepthImage d(5, 1, 0.0);
    d(0, 1) = 2.0;  // distance 1 from pixel 2
    d(0, 4) = 4.0;  // distance 2
    const DepthImage out = idw_infill(d, IdwConfig{2, 2.0, 0.0});
    CHECK(out(0, 2) == doctest::Approx(2.4).epsilon(1e-12));
  }

  TEST_CASE("IDW leaves a fully valid image untouched") {
    testgen::Gen g(2);
    const DepthImage d = random_sparse(g, 12, 9, 1.0);
    CHECK(idw_infill(d, IdwConfig{}) == d);
  }

  TEST_CASE("IDW leaves isolated pixels invalid") {
    DepthImage d(30, 1, 0.0);
    d(0, 0) = 5.0;
    const DepthImage out = idw_infill(d, IdwConfig{4, 2.0, 0.0});
    CHECK(out(0, 4) > 0.0);
    CHECK(out(0, 5) == 0.0);
  }

  TEST_CASE("property: IDW matches the oracle with and without a guide") {
    testgen::Gen g(3);
    for (int trial = 0; trial < 20; ++trial) {
      const DepthImage d = random_sparse(g, 24, 18, g.uniform(0.05, 0.5));
      const int r = g.integer(1, 4);
      const double p = g.uniform(0.5, 3.0);
      const DepthImage a = idw_infill(d, IdwConfig{r, p, 0.0});
      const DepthImage b = idw_oracle(d, r, p, nullptr, 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

      const GrayImage guide = g.texture(24, 18);
      const double sigma = g.uniform(5, 60);
      const DepthImage c = idw_infill(d, IdwConfig{r, p, sigma}, &guide);
      const DepthImage e = idw_oracle(d, r, p, &guide, sigma);
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (e[i] > 0.0) CHECK(c[i] == doctest::Approx(e[i]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("property: IDW output is a convex combination of its window") {
    testgen::Gen g(4);
    for (int trial = 0; trial < 20; ++trial) {
      const DepthImage d = random_sparse(g, 20, 20, 0.2);
      const int r = g.integer(1, 4);
      const DepthImage out = idw_infill(d, IdwConfig{r, 2.0, 0.0});
      for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
          if (out(y, x) <= 0.0 || d(y, x) > 0.0) continue;
          double lo = 1e9, hi = -1e9;
          for (int yy = std::max(0, y - r); yy <= std::min(19, y + r); ++yy) {
            for (int xx = std::max(0, x - r); xx <= std::min(19, x + r); ++xx) {
              if (d(yy, xx) > 0.0) {
                lo = std::min(lo, d(yy, xx));
                hi = std::max(hi, d(yy, xx));
              }
            }
          }
          CHECK(out(y, x) >= lo - 1e-12);
          CHECK(out(y, x) <= hi + 1e-12);
        }
      }
    }
  }

  TEST_CASE("30% samples of a plane infill to >= 90% density within 0.06 m") {
    testgen::Gen g(5);
    const int w = 256, h = 192;
    DepthImage truth(w, h), sparse(w, h, 0.0);
    // A tilted plane in view: inverse depth is affine in the pixel coordinates.
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) truth(v, u) = 1.0 / (0.05 + 0.0004 * u + 0.0008 * v);
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (g.coin(0.30)) sparse[i] = truth[i];
    }
    CHECK(density(sparse) <= 0.35);
    const DepthImage out = idw_infill(sparse, IdwConfig{4, 2.0, 0.0});
    CHECK(density(out) >= 0.90);
    double err = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (sparse[i] > 0.0 || out[i] <= 0.0) continue;
      err += std::abs(out[i] - truth[i]);
      ++n;
    }
    CHECK(err / static_cast<double>(n) < 0.06);
  }

  TEST_CASE("bin_depth examples") {
    CHECK(depth_bin(0.0, 128, 0.5, 51.2) == 0);
    CHECK(depth_bin(0.5, 128, 0.5, 51.2) == 1);
    CHECK(depth_bin(25.85, 128, 0.5, 51.2) == 64);
    CHECK(depth_bin(51.2, 128, 0.5, 51.2) == 127);
    CHECK(depth_bin(80.0, 128, 0.5, 51.2) == 127);
    CHECK(depth_bin(0.2, 128, 0.5, 51.2) == 1);
  }

  TEST_CASE("property: bin_depth is monotone and bounded") {
    testgen::Gen g(6);
    for (int trial = 0; trial < 2000; ++trial) {
      const int c = g.integer(2, 256);
      const double a = g.uniform(0.01, 80), b = g.uniform(0.01, 80);
      const auto ba = depth_bin(std::min(a, b), c, 0.5, 51.2);
      const auto bb = depth_bin(std::max(a, b), c, 0.5, 51.2);
      CHECK(ba <= bb);
      CHECK(bb < c);
      CHECK(ba >= 1);
    }
    DepthImage img(3, 1, 0.0);
    img[1] = 3.0;
    const BinnedDepth bins = bin_depth(img, 16, 0.5, 51.2);
    CHECK(bins.num_bins == 16);
    CHECK(bins.bins[0] == 0);
    CHECK(bins.bins[1] == depth_bin(3.0, 16, 0.5, 51.2));
  }

  TEST_CASE("make_depth_label rejects an empty scan list") {
    const DisparityMap disp(4, 4);
    StereoInput stereo;
    stereo.disparity = &disp;
    stereo.baseline = 0.3;
    CHECK_THROWS_AS(make_depth_label({}, {}, testgen::simple_camera(4, 4, 10, 2), stereo, DepthLabelConfig{}), Error);
  }

  TEST_CASE("static scene with perfect stereo reproduces the analytic depth") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    const synth::Scene scene = synth::generate_scene(11, sc);
    const synth::RigConfig rig = synth::default_rig();
    const auto poses = synth::straight_trajectory(scene, 20, 0.1, 1.5, 0.0, {0, 0}, rig.sensor_height);
    std::vector<PointCloud> scans;
    for (const auto& p : poses) scans.push_back(synth::render_frame(scene, p, rig, p.timestamp).scan);
    const synth::RenderedFrame last = synth::render_frame(scene, poses.back(), rig, poses.back().timestamp);
    const DisparityMap disp = depth_to_disparity(last.depth, rig.baseline, rig.camera.fx);
    StereoInput stereo;
    stereo.disparity = &disp;
    stereo.baseline = rig.baseline;
    const DepthLabel label = make_depth_label(scans, poses, last.camera, stereo, DepthLabelConfig{});
    CHECK(label.density_after >= label.density_before);
    // Mean error over the pixels the infill created.
    std::size_t filled = 0;
    double err = 0.0;
    for (std::size_t i = 0; i < label.label.size(); ++i) {
      if (label.filtered[i] > 0.0 || label.label[i] <= 0.0 || last.depth[i] <= 0.0) continue;
      ++filled;
      err += std::abs(label.label[i] - last.depth[i]);
    }
    REQUIRE(filled > 0);
    MESSAGE("infilled MAE ", err / static_cast<double>(filled), " over ", filled, " pixels");
    CHECK(err / static_cast<double>(filled) < 0.06);
  }
}
