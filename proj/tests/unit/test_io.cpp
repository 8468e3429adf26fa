#include <doctest.h>

#include <filesystem>

#include "bevlab/io.hpp"
#include "bevlab/stereo.hpp"
#include "gen.hpp"

using namespace bevlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "bevlab_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("PCB round trip with labels and features") {
    testgen::Gen g(1);
    PointCloud c;
    c.timestamp = 12.5;
    for (int i = 0; i < 50; ++i) {
      c.points.push_back({g.uniform(-10, 10), g.uniform(-10, 10), g.uniform(-2, 2)});
      c.labels.push_back(static_cast<std::uint16_t>(g.integer(0, 30)));
    }
    c.features = g.matrix(50, 6, -1, 1);
    const PointCloud back = io::decode_pcb(io::encode_pcb(c));
    CHECK(back.timestamp == 12.5);
    CHECK(back.labels == c.labels);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK((back.points[i] - c.points[i]).norm() < 1e-5);
    }
    CHECK((back.features - c.features).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("PCB header layout") {
    PointCloud c;
    c.points = {{1, 2, 3}};
    const std::string bytes = io::encode_pcb(c);
    CHECK(bytes.substr(0, 4) == "PCB1");
    CHECK(bytes.size() == 4 + 4 + 1 + 4 + 8 + 12);
    CHECK(static_cast<std::uint8_t>(bytes[8]) == 0);
  }

  TEST_CASE("corrupt PCB is a parse error") {
    CHECK(code_of([] { io::decode_pcb("PCB2aaaaaaaaaaaaaaaaaaaaaaaaaaaa"); }) == ErrorCode::ParseError);
    PointCloud c;
    c.points = {{1, 2, 3}};
    std::string bytes = io::encode_pcb(c);
    bytes.pop_back();
    CHECK(code_of([&] { io::decode_pcb(bytes); }) == ErrorCode::ParseError);
  }

  TEST_CASE("poses and cameras round trip through text") {
    testgen::Gen g(2);
    std::vector<Pose> poses;
    for (int i = 0; i < 5; ++i) {
      Pose p = g.pose();
      p.timestamp = i * 0.1;
      poses.push_back(p);
    }
    const fs::path pf = scratch("poses.txt");
    io::write_poses(pf, poses);
    const auto back = io::read_poses(pf);
    REQUIRE(back.size() == poses.size());
    for (std::size_t i = 0; i < poses.size(); ++i) {
      CHECK(back[i].timestamp == doctest::Approx(poses[i].timestamp));
      CHECK((back[i].translation - poses[i].translation).norm() < 1e-9);
      CHECK(back[i].rotation.angularDistance(poses[i].rotation) < 1e-9);
    }

    const io::CameraFile cam{g.camera(), 0.3};
    const fs::path cf = scratch("camera.txt");
    io::write_camera(cf, cam);
    const io::CameraFile cb = io::read_camera(cf);
    CHECK(cb.camera.fx == doctest::Approx(cam.camera.fx));
    CHECK(cb.camera.width == cam.camera.width);
    CHECK(cb.baseline.value() == doctest::Approx(0.3));
    CHECK((cb.camera.extrinsics.translation - cam.camera.extrinsics.translation).norm() < 1e-9);
  }

  TEST_CASE("malformed pose line is a parse error") {
    const fs::path pf = scratch("bad_poses.txt");
    io::write_file_atomic(pf, "0.0 1 2 3 1 0 0\n");
    CHECK(code_of([&] { io::read_poses(pf); }) == ErrorCode::ParseError);
  }

  TEST_CASE("missing file is an I/O error") {
    CHECK(code_of([] { io::read_file("/nonexistent/bevlab/file"); }) == ErrorCode::IoError);
  }

  TEST_CASE("16-bit PGM is big-endian P5 with maxval 65535") {
    io::Gray16 img(3, 2, 0);
    img(0, 0) = 0x1234;
    img(1, 2) = 65535;
    const fs::path p = scratch("img16.pgm");
    io::write_pgm16(p, img);
    const std::string bytes = io::read_file(p);
    CHECK(bytes.rfind("P5", 0) == 0);
    CHECK(bytes.find("65535") != std::string::npos);
    const std::size_t payload = bytes.size() - 12;
    CHECK(static_cast<unsigned char>(bytes[payload]) == 0x12);
    CHECK(static_cast<unsigned char>(bytes[payload + 1]) == 0x34);
    CHECK(io::read_pgm16(p) == img);
  }

  TEST_CASE("depth is stored in millimetres, disparity in 1/256 px") {
    DepthImage d(2, 1, 0.0);
    d[0] = 12.3456;
    const io::Gray16 mm = io::encode_depth_mm(d);
    CHECK(mm[0] == 12346);
    CHECK(mm[1] == 0);
    CHECK(io::decode_depth_mm(mm)[0] == doctest::Approx(12.346));
    CHECK(io::decode_depth_mm(mm)[1] == 0.0);

    DisparityMap disp(2, 1);
    disp.set(0, 0, 8.25);
    const io::Gray16 enc = io::encode_disparity(disp);
    CHECK(enc[0] == 2112);
    CHECK(enc[1] == 0);
    const DisparityMap back = io::decode_disparity(enc);
    CHECK(back.is_valid(0, 0));
    CHECK(!back.is_valid(0, 1));
    CHECK(back.values(0, 0) == doctest::Approx(8.25));
  }

  TEST_CASE("masks round trip; flags are 0/255 on disk") {
    testgen::Gen g(3);
    const LabelMask m = g.label_mask(17, 9, 500);
    const fs::path p = scratch("mask.pgm");
    io::write_label_pgm(p, m);
    CHECK(io::read_label_pgm(p) == m);

    MovableMask f(4, 1, 0);
    f[2] = 1;
    const fs::path fp = scratch("flags.pgm");
    io::write_flag_pgm(fp, f);
    const std::string bytes = io::read_file(fp);
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 255);
    CHECK(io::read_flag_pgm(fp) == f);
  }

  TEST_CASE("BEVG round trip for every dtype") {
    const GridConfig cfg = GridConfig::ego_centered(8, 6, 0.1);
    FeatureGrid fg(cfg, 3, 0.0, true);
    LabelGrid lg(cfg, 1, 0, true);
    PartitionGrid pg(cfg, 1, CellState::OutsideFov, false);
    testgen::Gen g(4);
    for (std::size_t c = 0; c < cfg.cell_count(); ++c) {
      fg.valid[c] = g.coin();
      lg.valid[c] = g.coin();
      lg.at(c) = static_cast<std::uint16_t>(g.integer(0, 900));
      pg.at(c) = static_cast<CellState>(g.integer(0, 2));
      for (int ch = 0; ch < 3; ++ch) fg.at(c, ch) = g.uniform(-1, 1);
    }
    const auto fb = std::get<FeatureGrid>(io::decode_bevg(io::encode_bevg(fg)));
    CHECK(fb.channels == 3);
    CHECK(fb.valid == fg.valid);
    for (std::size_t i = 0; i < fg.values.size(); ++i) CHECK(std::abs(fb.values[i] - fg.values[i]) < 1e-6);
    CHECK(fb.config.same_layout(cfg));

    const auto lb = std::get<LabelGrid>(io::decode_bevg(io::encode_bevg(lg)));
    CHECK(lb.values == lg.values);
    CHECK(lb.valid == lg.valid);
    const auto pb = std::get<PartitionGrid>(io::decode_bevg(io::encode_bevg(pg)));
    CHECK(pb.values == pg.values);
    CHECK(!pb.has_validity());
  }

  TEST_CASE("BEVG header layout") {
    const GridConfig cfg = GridConfig::ego_centered(2, 3, 0.5);
    LabelGrid lg(cfg, 1, 7, false);
    const std::string bytes = io::encode_bevg(lg);
    CHECK(bytes.substr(0, 4) == "BEVG");
    CHECK(bytes.size() == 4 + 12 + 1 + 12 + 6 * 2 + 1);
    CHECK(static_cast<int>(bytes[16]) == 1);
  }

  TEST_CASE("reading the wrong grid type is a validation problem") {
    const GridConfig cfg = GridConfig::ego_centered(2, 2, 0.1);
    const fs::path p = scratch("labels.bevg");
    io::write_bevg(p, LabelGrid(cfg, 1, 0, false));
    CHECK_THROWS_AS(io::read_feature_grid(p), Error);
  }

  TEST_CASE("FMAP round trip") {
    testgen::Gen g(5);
    io::FeatureMap fm;
    fm.width = 4;
    fm.height = 3;
    fm.features = g.matrix(12, 5, -2, 2);
    const io::FeatureMap back = io::decode_fmap(io::encode_fmap(fm));
    CHECK(back.width == 4);
    CHECK(back.height == 3);
    CHECK((back.features - fm.features).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("grid spec parsing") {
    const GridConfig cfg = io::parse_grid_spec("256x128x0.2");
    CHECK(cfg.rows == 256);
    CHECK(cfg.cols == 128);
    CHECK(cfg.resolution == doctest::Approx(0.2));
    CHECK(code_of([] { io::parse_grid_spec("256x256"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { io::parse_grid_spec("0x4x0.1"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("atomic write leaves only the target") {
    const fs::path dir = fs::temp_directory_path() / "bevlab_unit_atomic";
    fs::remove_all(dir);
    io::write_file_atomic(dir / "a.txt", "hello");
    io::write_file_atomic(dir / "a.txt", "world");
    CHECK(io::read_file(dir / "a.txt") == "world");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
  }

  TEST_CASE("list_scans returns sorted pcb files only") {
    const fs::path dir = fs::temp_directory_path() / "bevlab_unit_scans";
    fs::remove_all(dir);
    PointCloud c;
    io::write_pcb(dir / "000002.pcb", c);
    io::write_pcb(dir / "000001.pcb", c);
    io::write_file_atomic(dir / "notes.txt", "x");
    const auto scans = io::list_scans(dir);
    REQUIRE(scans.size() == 2);
    CHECK(scans[0].filename() == "000001.pcb");
  }
}
