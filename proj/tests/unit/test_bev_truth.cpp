#include <doctest.h>

#include <algorithm>

#include "bevlab/bev_truth.hpp"
#include "bevlab/synth.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

const GridConfig kGrid = GridConfig::ego_centered(16, 16, 0.5);

Eigen::Vector3d in_cell(int row, int col, double z, double dx = 0.0, double dy = 0.0) {
  const Eigen::Vector2d c = kGrid.cell_center(row, col);
  return {c.x() + dx, c.y() + dy, z};
}

PointCloud labelled(std::vector<Eigen::Vector3d> pts, std::vector<std::uint16_t> labels) {
  PointCloud c;
  c.frame = Frame::World;
  c.points = std::move(pts);
  c.labels = std::move(labels);
  return c;
}

std::vector<Motion> all_static(const PointCloud& c) { return std::vector<Motion>(c.size(), Motion::Static); }

}  // namespace

TEST_SUITE("bev_truth") {
  TEST_CASE("semantic vote and empty cells") {
    const std::vector<PointCloud> clouds{
        labelled({in_cell(3, 4, 0, 0.1), in_cell(3, 4, 0, -0.1), in_cell(3, 4, 0, 0, 0.2)}, {2, 9, 2})};
    const LabelGrid g = build_semantic_map(clouds, kGrid);
    CHECK(g.is_valid(3, 4));
    CHECK(g.at(3, 4) == 2);
    CHECK(!g.is_valid(0, 0));
  }

  TEST_CASE("semantic ties go to the smaller class") {
    const std::vector<PointCloud> clouds{labelled({in_cell(1, 1, 0), in_cell(1, 1, 0.3)}, {8, 5})};
    CHECK(build_semantic_map(clouds, kGrid).at(1, 1) == 5);
  }

  TEST_CASE("unlabelled clouds are rejected") {
    PointCloud c;
    c.points = {in_cell(0, 0, 0)};
    const std::vector<PointCloud> clouds{c};
    try {
      build_semantic_map(clouds, kGrid);
      FAIL("expected UnlabeledCloud");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnlabeledCloud);
    }
  }

  TEST_CASE("elevation is the mean of the three lowest static points") {
    const PointCloud c = labelled({in_cell(2, 2, 0.9), in_cell(2, 2, 0.1), in_cell(2, 2, 0.3), in_cell(2, 2, 0.2),
                                   in_cell(4, 4, 0.5), in_cell(6, 6, -3.0), in_cell(6, 6, -2.0)},
                                  {});
    const std::vector<PointCloud> clouds{c};
    const std::vector<std::vector<Motion>> flags{all_static(c)};
    const FeatureGrid e = build_elevation_map(clouds, flags, kGrid);
    CHECK(e.at(2, 2) == doctest::Approx(0.2));
    CHECK(e.at(4, 4) == doctest::Approx(0.5));
    CHECK(e.at(6, 6) == doctest::Approx(-1.2));
    CHECK(!e.is_valid(0, 0));
  }

  TEST_CASE("dynamic points do not contribute to elevation") {
    const PointCloud c = labelled({in_cell(2, 2, -0.5), in_cell(2, 2, 0.4)}, {});
    const std::vector<PointCloud> clouds{c};
    const std::vector<std::vector<Motion>> flags{{Motion::Dynamic, Motion::Static}};
    CHECK(build_elevation_map(clouds, flags, kGrid).at(2, 2) == doctest::Approx(0.4));
  }

  TEST_CASE("property: elevation ignores point order and stays in range") {
    testgen::Gen g(3);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Eigen::Vector3d> pts;
      for (int i = 0; i < 200; ++i) {
        pts.push_back(in_cell(g.integer(0, 15), g.integer(0, 15), g.uniform(-3, 3), g.uniform(-0.24, 0.24),
                              g.uniform(-0.24, 0.24)));
      }
      const PointCloud a = labelled(pts, {});
      std::shuffle(pts.begin(), pts.end(), g.rng());
      const PointCloud b = labelled(pts, {});
      const std::vector<PointCloud> ca{a}, cb{b};
      const std::vector<std::vector<Motion>> fa{all_static(a)}, fb{all_static(b)};
      const FeatureGrid ea = build_elevation_map(ca, fa, kGrid);
      const FeatureGrid eb = build_elevation_map(cb, fb, kGrid);
      CHECK(ea.valid == eb.valid);
      for (std::size_t i = 0; i < ea.values.size(); ++i) {
        CHECK(ea.values[i] == doctest::Approx(eb.values[i]).epsilon(1e-12));
        if (ea.is_valid(i)) CHECK((ea.values[i] >= -1.2 && ea.values[i] <= 1.8));
      }
    }
  }

  TEST_CASE("partition: observed, occluded and outside") {
    // Camera at the ego cell looking forward (towards row 0), 1.5 m up.
    const CameraModel cam = testgen::forward_camera(1.5, 128, 96, 60.0);
    // One return near the ego; everything farther is hidden behind a wall.
    const PointCloud scan = labelled({in_cell(12, 8, 0.0)}, {});
    const PartitionGrid p = observation_partition(scan, cam, kGrid);
    CHECK(p.at(12, 8) == CellState::Observed);
    CHECK(p.at(2, 8) == CellState::Occluded);
    CHECK(p.at(14, 0) == CellState::OutsideFov);  // far to the side of the field of view
    const GridConfig behind = kGrid.with_frame(Pose::from_yaw(std::numbers::pi, Eigen::Vector3d::Zero()));
    const PartitionGrid q = observation_partition(labelled({}, {}), cam, behind);
    for (auto s : q.values) CHECK(s == CellState::OutsideFov);
  }

  TEST_CASE("oracle scans reproduce the analytic region map") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    sc.num_regions = 2;
    const synth::Scene scene = synth::generate_scene(9, sc);
    const synth::RigConfig rig = synth::default_rig();
    const auto poses = synth::straight_trajectory(scene, 20, 0.1, 1.5, 0.0, {-4, 0}, rig.sensor_height);
    std::vector<PointCloud> clouds;
    for (const auto& p : poses) {
      PointCloud w = transform_cloud(synth::render_frame(scene, p, rig, p.timestamp).scan, p);
      w.frame = Frame::World;
      clouds.push_back(std::move(w));
    }
    const GridConfig grid = GridConfig::ego_centered(256, 256, 0.1).with_frame(ego_frame(poses.back()));
    const LabelGrid sem = build_semantic_map(clouds, grid);
    const LabelGrid truth = synth::analytic_semantic_grid(scene, grid);
    const auto interior = synth::interior_cells(scene, grid);
    std::size_t n = 0, agree = 0;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      if (!sem.is_valid(i) || !interior[i]) continue;
      ++n;
      agree += sem.at(i) == truth.at(i);
    }
    REQUIRE(n > 1000);
    CHECK(static_cast<double>(agree) / static_cast<double>(n) >= 0.99);
  }
}
