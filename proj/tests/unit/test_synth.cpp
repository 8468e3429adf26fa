#include <doctest.h>

#include "bevlab/synth.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

synth::RigConfig small_rig() {
  synth::RigConfig rig = synth::default_rig();
  rig.camera.width = 64;
  rig.camera.height = 48;
  rig.camera.fx = rig.camera.fy = 90.0;
  rig.camera.cx = 31.5;
  rig.camera.cy = 23.5;
  rig.lidar.rings = 16;
  rig.lidar.points_per_ring = 64;
  return rig;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("the same seed gives the same scene and frame") {
    synth::SceneConfig sc;
    const synth::Scene a = synth::generate_scene(11, sc), b = synth::generate_scene(11, sc);
    REQUIRE(a.regions.size() == b.regions.size());
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
      CHECK(a.regions[i].site == b.regions[i].site);
      CHECK(a.regions[i].base == b.regions[i].base);
    }
    const synth::RigConfig rig = small_rig();
    const Pose p = Pose::from_yaw(0.0, {0, 0, a.height_at(0, 0) + 1.6}, 0.0);
    const synth::RenderedFrame fa = synth::render_frame(a, p, rig, 0.3), fb = synth::render_frame(b, p, rig, 0.3);
    CHECK(fa.left == fb.left);
    CHECK(fa.scan.points == fb.scan.points);
    CHECK(synth::generate_scene(12, sc).regions[0].site != a.regions[0].site);
  }

  TEST_CASE("a one-region scene has a single class everywhere") {
    synth::SceneConfig sc;
    sc.num_regions = 1;
    const synth::Scene s = synth::generate_scene(3, sc);
    testgen::Gen g(1);
    for (int i = 0; i < 200; ++i) CHECK(s.class_at(g.uniform(-50, 50), g.uniform(-50, 50)) == 1);
    const GridConfig grid = GridConfig::ego_centered(20, 20, 0.5);
    for (auto v : synth::interior_cells(s, grid)) CHECK(v == 1);
  }

  TEST_CASE("without dynamic objects every point is static and nothing is movable") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    const synth::Scene s = synth::generate_scene(4, sc);
    const Pose p = Pose::from_yaw(0.3, {2, 1, s.height_at(2, 1) + 1.6}, 0.0);
    const synth::RenderedFrame f = synth::render_frame(s, p, small_rig(), 0.0);
    for (auto m : f.motion) CHECK(m == Motion::Static);
    for (auto v : f.movable.data()) CHECK(v == 0);
  }

  TEST_CASE("scan size accounts for every beam") {
    const synth::Scene s = synth::generate_scene(5, {});
    const synth::RigConfig rig = small_rig();
    const Pose p = Pose::from_yaw(0.0, {0, 0, s.height_at(0, 0) + 1.6}, 0.0);
    const synth::RenderedFrame f = synth::render_frame(s, p, rig, 0.0);
    CHECK(f.scan.size() + f.missed_rays ==
          static_cast<std::size_t>(rig.lidar.rings) * static_cast<std::size_t>(rig.lidar.points_per_ring));
    CHECK(f.scan.labels.size() == f.scan.size());
    CHECK(f.motion.size() == f.scan.size());
    CHECK(f.missed_rays > 0);  // upward beams see sky
  }

  TEST_CASE("dynamic flags agree with the box class") {
    const synth::Scene s = synth::generate_scene(6, {});
    const synth::RigConfig rig = small_rig();
    // Ego near the boxes so they are in view.
    const Pose p = Pose::from_yaw(0.0, {6, 0, s.height_at(6, 0) + 1.6}, 0.0);
    const synth::RenderedFrame f = synth::render_frame(s, p, rig, 1.0);
    std::size_t dynamic = 0;
    for (std::size_t i = 0; i < f.scan.size(); ++i) {
      CHECK((f.motion[i] == Motion::Dynamic) == (f.scan.labels[i] == s.box_class()));
      dynamic += f.motion[i] == Motion::Dynamic;
    }
    CHECK(dynamic > 0);
    for (std::size_t i = 0; i < f.movable.size(); ++i) CHECK((f.movable[i] != 0) == (f.classes[i] == s.box_class()));
  }

  TEST_CASE("flat ground depth matches the ray-plane intersection") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    sc.max_step = 0.0;
    sc.max_slope = 0.0;
    const synth::Scene s = synth::generate_scene(7, sc);
    const synth::RigConfig rig = small_rig();
    const Pose p = Pose::from_yaw(0.4, {1, -2, 1.6}, 0.0);
    const synth::RenderedFrame f = synth::render_frame(s, p, rig, 0.0);
    const CameraModel& cam = f.camera;
    const Eigen::Matrix3d r = cam.extrinsics.rotation.toRotationMatrix();
    const Eigen::Vector3d centre = -r.transpose() * cam.extrinsics.translation;
    std::size_t checked = 0;
    for (int row = 0; row < cam.height; ++row) {
      for (int col = 0; col < cam.width; ++col) {
        const Eigen::Vector3d ray((col - cam.cx) / cam.fx, (row - cam.cy) / cam.fy, 1.0);
        const Eigen::Vector3d dir = r.transpose() * ray;
        const double expected = dir.z() < 0.0 ? centre.z() / -dir.z() : 0.0;
        if (expected <= 0.0 || expected > rig.max_depth) {
          CHECK(f.depth(row, col) == 0.0);
          continue;
        }
        CHECK(f.depth(row, col) == doctest::Approx(expected).epsilon(1e-9));
        ++checked;
      }
    }
    CHECK(checked > 1000);
  }

  TEST_CASE("lidar returns agree with camera ray casts") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    const synth::Scene s = synth::generate_scene(8, sc);
    const synth::RigConfig rig = small_rig();
    const Pose p = Pose::from_yaw(-0.2, {0, 3, s.height_at(0, 3) + 1.6}, 0.0);
    const synth::RenderedFrame f = synth::render_frame(s, p, rig, 0.0);
    const PointCloud world = transform_cloud(f.scan, p);
    std::size_t checked = 0;
    for (const auto& pt : world.points) {
      const auto px = project_point(f.camera, pt);
      if (!px || px->depth > 40.0) continue;
      const double d = s.depth_at(f.camera, px->u, px->v, 0.0, 200.0);
      CHECK(d == doctest::Approx(px->depth).epsilon(1e-6));
      ++checked;
    }
    CHECK(checked > 50);
  }

  TEST_CASE("trajectory keeps the sensor above the terrain") {
    const synth::Scene s = synth::generate_scene(9, {});
    const auto poses = synth::straight_trajectory(s, 5, 0.1, 2.0, 0.0, {-4, 0}, 1.6);
    REQUIRE(poses.size() == 5);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const auto& t = poses[i].translation;
      CHECK(t.x() == doctest::Approx(-4.0 + 0.2 * static_cast<double>(i)));
      CHECK(t.z() == doctest::Approx(s.height_at(t.x(), t.y()) + 1.6));
      CHECK(poses[i].timestamp == doctest::Approx(0.1 * static_cast<double>(i)));
    }
  }

  TEST_CASE("rendering outside the scene is refused") {
    const synth::Scene s = synth::generate_scene(10, {});
    try {
      synth::render_frame(s, Pose::from_yaw(0.0, {500, 0, 1.6}, 0.0), small_rig(), 0.0);
      FAIL("expected PoseOutsideScene");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoseOutsideScene);
    }
  }

  TEST_CASE("class features sit the requested distance apart") {
    const GridConfig grid = GridConfig::ego_centered(2, 2, 1.0);
    LabelGrid labels(grid, 1, 0, false);
    labels.values = {1, 2, 1, 3};
    const FeatureGrid f = synth::class_features(labels, 8, 10.0, 0.0, 1);
    auto row = [&](std::size_t cell) {
      Eigen::VectorXd v(8);
      for (int c = 0; c < 8; ++c) v(c) = f.at(cell, c);
      return v;
    };
    CHECK((row(0) - row(2)).norm() == 0.0);
    CHECK((row(0) - row(1)).norm() == doctest::Approx(10.0));
    CHECK((row(1) - row(3)).norm() == doctest::Approx(10.0));
  }

  TEST_CASE("analytic grids follow the scene") {
    const synth::Scene s = synth::generate_scene(13, {});
    const GridConfig grid = GridConfig::ego_centered(8, 8, 0.5).with_frame(Pose::from_yaw(0.7, {3, 4, 0}));
    const LabelGrid sem = synth::analytic_semantic_grid(s, grid);
    const FeatureGrid elev = synth::analytic_elevation_grid(s, grid);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        const Eigen::Vector2d local = grid.cell_center(r, c);
        const Eigen::Vector3d w = grid.frame().apply({local.x(), local.y(), 0.0});
        CHECK(sem.at(r, c) == s.class_at(w.x(), w.y()));
        CHECK(elev.at(r, c) == s.height_at(w.x(), w.y()));
        CHECK(std::abs(elev.at(r, c)) <= 1.2);
      }
    }
  }
}
