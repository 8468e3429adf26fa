#include <doctest.h>

#include "bevlab/dynamics.hpp"
#include "bevlab/synth.hpp"
#include "gen.hpp"

using namespace bevlab;

namespace {

PointCloud world_cloud(std::vector<Eigen::Vector3d> pts) {
  PointCloud c;
  c.frame = Frame::World;
  c.points = std::move(pts);
  return c;
}

std::size_t brute_count(const std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& q, double radius) {
  std::size_t n = 0;
  for (const auto& p : pts) n += (p - q).norm() <= radius;
  return n;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("points seen in every cloud are static, one-off points are not") {
    const Eigen::Vector3d ground(1.05, 2.05, 0.05), ghost(5.05, 5.05, 1.05);
    std::vector<PointCloud> clouds;
    for (int v = 0; v < 5; ++v) {
      std::vector<Eigen::Vector3d> pts{ground};
      if (v == 2) pts.push_back(ghost);
      clouds.push_back(world_cloud(pts));
    }
    const VoxelMap map = build_static_map(clouds, 0.2, 2);
    CHECK(map.count_within(ground, 1e-9, 100) == 5);
    CHECK(map.count_within(ghost, 1e-9, 100) == 0);
  }

  TEST_CASE("a single cloud is not enough views") {
    const std::vector<PointCloud> one{world_cloud({{0, 0, 0}})};
    try {
      build_static_map(one, 0.2, 2);
      FAIL("expected InsufficientViews");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientViews);
    }
  }

  TEST_CASE("classification examples") {
    const std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {0.1, 0, 0}};
    const VoxelMap map = VoxelMap::from_points(pts, 0.2);
    const PointCloud q = world_cloud({{0, 0, 0}, {10, 0, 0}, {0.05, 0, 0}});
    const auto k1 = classify_dynamic(q, map, 1, 0.2);
    CHECK(k1[0] == Motion::Static);
    CHECK(k1[1] == Motion::Dynamic);
    const auto k3 = classify_dynamic(q, map, 3, 0.2);
    CHECK(k3[2] == Motion::Dynamic);  // exactly 2 neighbours
    CHECK(classify_dynamic(q, map, 2, 0.2)[2] == Motion::Static);
  }

  TEST_CASE("empty static map is an error") {
    try {
      classify_dynamic(world_cloud({{0, 0, 0}}), VoxelMap(0.2), 1, 0.2);
      FAIL("expected EmptyStaticMap");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyStaticMap);
    }
  }

  TEST_CASE("property: voxel search equals brute force") {
    testgen::Gen g(1);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Eigen::Vector3d> pts;
      for (int i = 0; i < 400; ++i) pts.push_back({g.uniform(-3, 3), g.uniform(-3, 3), g.uniform(-1, 1)});
      const double voxel = g.uniform(0.05, 0.6);
      const VoxelMap map = VoxelMap::from_points(pts, voxel);
      for (int i = 0; i < 50; ++i) {
        const Eigen::Vector3d q(g.uniform(-3.5, 3.5), g.uniform(-3.5, 3.5), g.uniform(-1.5, 1.5));
        const double radius = g.uniform(0.01, 1.5);
        CHECK(map.count_within(q, radius, 1000000) == brute_count(pts, q, radius));
      }
    }
  }

  TEST_CASE("property: monotone in k and radius; huge radius is all static") {
    testgen::Gen g(2);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-0.5, 0.5)});
    const VoxelMap map = VoxelMap::from_points(pts, 0.2);
    std::vector<Eigen::Vector3d> q;
    for (int i = 0; i < 300; ++i) q.push_back({g.uniform(-3, 3), g.uniform(-3, 3), g.uniform(-1, 1)});
    const PointCloud query = world_cloud(q);
    for (int k = 1; k < 5; ++k) {
      const auto a = classify_dynamic(query, map, k, 0.3);
      const auto b = classify_dynamic(query, map, k + 1, 0.3);
      const auto c = classify_dynamic(query, map, k, 0.45);
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (a[i] == Motion::Dynamic) CHECK(b[i] == Motion::Dynamic);
        if (a[i] == Motion::Static) CHECK(c[i] == Motion::Static);
      }
    }
    for (auto f : classify_dynamic(query, map, 3, 1e6)) CHECK(f == Motion::Static);
  }

  TEST_CASE("movable mask: empty, single pixel, dilation") {
    const CameraModel cam = testgen::simple_camera(9, 9, 10.0, 4.0);
    const MovableMask none = render_movable_mask(world_cloud({}), cam, 2);
    for (auto v : none.data()) CHECK(v == 0);

    const MovableMask one = render_movable_mask(world_cloud({{0, 0, 3}}), cam, 0);
    int count = 0;
    for (auto v : one.data()) count += v;
    CHECK(count == 1);
    CHECK(one(4, 4) == 1);

    const MovableMask grown = render_movable_mask(world_cloud({{0, 0, 3}}), cam, 2);
    for (int r = 0; r < 9; ++r) {
      for (int c = 0; c < 9; ++c) CHECK(grown(r, c) == (std::abs(r - 4) <= 2 && std::abs(c - 4) <= 2 ? 1 : 0));
    }
  }

  TEST_CASE("property: dilation is monotone in radius") {
    testgen::Gen g(3);
    MovableMask m(20, 20, 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = g.coin(0.05);
    for (int r = 0; r < 4; ++r) {
      const MovableMask a = dilate(m, r), b = dilate(m, r + 1);
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(a[i] <= b[i]);
    }
    CHECK(dilate(m, 0) == m);
  }

  TEST_CASE("a box that vacates its voxels between views drops out of the static map") {
    synth::SceneConfig sc;
    sc.num_dynamic = 0;
    synth::Scene scene = synth::generate_scene(5, sc);
    synth::DynamicBox box;
    box.half_extent = {1.0, 0.6, 0.8};
    box.start = {8.0, 0.5, scene.height_at(8.0, 0.5) + 0.8};
    box.velocity = {3.0, 0.0, 0.0};  // 3 m per view, longer than the box
    box.class_id = scene.box_class();
    box.instance_id = 99;
    scene.boxes.push_back(box);
    const synth::RigConfig rig = synth::default_rig();
    const Pose pose = Pose::from_yaw(0.0, {0, 0, scene.height_at(0, 0) + rig.sensor_height}, 0.0);
    std::vector<PointCloud> clouds;
    std::vector<std::vector<Motion>> truth;
    for (int v = 0; v < 5; ++v) {
      const synth::RenderedFrame f = synth::render_frame(scene, pose, rig, static_cast<double>(v));
      PointCloud w = transform_cloud(f.scan, pose);
      w.frame = Frame::World;
      clouds.push_back(std::move(w));
      truth.push_back(f.motion);
    }
    const VoxelMap map = build_static_map(clouds, 0.2, 2);
    std::size_t ground = 0, ground_kept = 0, moving = 0, moving_kept = 0;
    for (std::size_t v = 0; v < clouds.size(); ++v) {
      const auto flags = classify_dynamic(clouds[v], map, 1, 1e-9);
      for (std::size_t i = 0; i < clouds[v].size(); ++i) {
        const bool kept = flags[i] == Motion::Static;
        if (truth[v][i] == Motion::Dynamic) {
          ++moving;
          moving_kept += kept;
        } else {
          ++ground;
          ground_kept += kept;
        }
      }
    }
    REQUIRE(moving > 100);
    CHECK(static_cast<double>(moving_kept) / static_cast<double>(moving) < 0.05);
    CHECK(static_cast<double>(ground_kept) / static_cast<double>(ground) >= 0.99);
  }
}
