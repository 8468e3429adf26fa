#include <doctest.h>

#include "bevlab/manifest.hpp"

using namespace bevlab;

namespace {

// Two frames with every referenced file present.
Manifest small_manifest(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir / "scans");
  PointCloud c;
  c.points = {{1, 2, 3}};
  io::write_pcb(dir / "scans/000000.pcb", c);
  io::write_pcb(dir / "scans/000001.pcb", c);
  io::write_poses(dir / "poses.txt", {Pose::from_yaw(0, {0, 0, 0}, 0.0), Pose::from_yaw(0, {1, 0, 0}, 0.1)});
  io::write_file_atomic(dir / "camera.txt", "placeholder\n");
  Manifest m;
  m.root = dir;
  m.poses = "poses.txt";
  m.cameras["front"] = "camera.txt";
  for (int i = 0; i < 2; ++i) {
    FrameRecord r;
    r.timestamp = 0.1 * i;
    r.scan = "scans/00000" + std::to_string(i) + ".pcb";
    r.pose_index = static_cast<std::size_t>(i);
    r.splits = {i == 0 ? "train" : "val"};
    m.frames.push_back(r);
  }
  return m;
}

bool mentions(const ValidationReport& r, const std::string& needle) {
  for (const auto& p : r.problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("manifest") {
  TEST_CASE("a complete manifest validates and round-trips") {
    const fs::path dir = fs::temp_directory_path() / "bevlab_unit_manifest_ok";
    const Manifest m = small_manifest(dir);
    CHECK(validate_manifest(m).ok());
    save_manifest(dir / "manifest.json", m);
    const Manifest back = load_manifest(dir / "manifest.json");
    CHECK(manifest_to_json(back) == manifest_to_json(m));
    CHECK(back.frames_in_split("val") == std::vector<std::size_t>{1});
    CHECK(back.root == dir);
  }

  TEST_CASE("an empty frame list fails validation") {
    Manifest m = small_manifest(fs::temp_directory_path() / "bevlab_unit_manifest_empty");
    m.frames.clear();
    try {
      require_valid(m);
      FAIL("expected ValidationError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ValidationError);
    }
  }

  TEST_CASE("every problem is reported") {
    Manifest m = small_manifest(fs::temp_directory_path() / "bevlab_unit_manifest_bad");
    m.frames[1].splits = {"train", "test"};
    m.frames[1].timestamp = 0.0;
    m.frames[1].pose_index = 7;
    m.frames[0].depth = "depth/missing.pgm";
    m.frames[0].camera = "rear";
    m.frames[0].splits.insert("holdout");
    const ValidationReport r = validate_manifest(m);
    CHECK(mentions(r, "overlapping"));
    CHECK(mentions(r, "timestamp"));
    CHECK(mentions(r, "pose index"));
    CHECK(mentions(r, "missing depth"));
    CHECK(mentions(r, "unknown camera rear"));
    CHECK(mentions(r, "unknown split holdout"));
    CHECK(r.problems.size() == 6);
  }

  TEST_CASE("pretrain frames may not be evaluation frames") {
    Manifest m = small_manifest(fs::temp_directory_path() / "bevlab_unit_manifest_pre");
    m.frames[1].splits.insert("pretrain");
    CHECK(mentions(validate_manifest(m), "pretrain"));
    m.frames[0].splits.insert("pretrain");
    m.frames[1].splits.erase("pretrain");
    CHECK(validate_manifest(m).ok());
  }

  TEST_CASE("malformed JSON and missing keys are parse errors") {
    for (const std::string text : {"{", "{\"poses\": \"p\"}", "{\"poses\": \"p\", \"cameras\": {}, \"frames\": [{}]}"}) {
      try {
        parse_manifest(text, ".");
        FAIL("expected ParseError");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
      }
    }
  }
}
