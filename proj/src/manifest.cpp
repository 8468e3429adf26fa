#include "bevlab/manifest.hpp"

#include <nlohmann/json.hpp>

#include "bevlab/error.hpp"

namespace bevlab {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string> kSplits = {"pretrain", "train", "val", "test"};

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

void put_optional(json& j, const char* key, const std::optional<std::string>& value) {
  if (value) j[key] = *value;
}

}  // namespace

std::vector<std::size_t> Manifest::frames_in_split(const std::string& split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].splits.count(split) != 0) out.push_back(i);
  }
  return out;
}

Manifest parse_manifest(const std::string& json_text, const fs::path& root) {
  Manifest m;
  m.root = root;
  try {
    const json j = json::parse(json_text);
    m.poses = j.at("poses").get<std::string>();
    for (const auto& [name, path] : j.at("cameras").items()) m.cameras[name] = path.get<std::string>();
    for (const auto& f : j.at("frames")) {
      FrameRecord r;
      r.timestamp = f.at("timestamp").get<double>();
      r.scan = f.at("scan").get<std::string>();
      r.pose_index = f.at("pose_index").get<std::size_t>();
      r.camera = f.value("camera", std::string("front"));
      r.mask = optional_string(f, "mask");
      r.depth = optional_string(f, "depth");
      r.features = optional_string(f, "features");
      r.semantic = optional_string(f, "semantic");
      r.movable = optional_string(f, "movable");
      r.left = optional_string(f, "left");
      r.right = optional_string(f, "right");
      r.disparity = optional_string(f, "disparity");
      if (f.contains("splits")) {
        for (const auto& s : f.at("splits")) r.splits.insert(s.get<std::string>());
      }
      m.frames.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  return parse_manifest(io::read_file(path), path.parent_path());
}

std::string manifest_to_json(const Manifest& manifest) {
  json j;
  j["poses"] = manifest.poses;
  json cams = json::object();
  for (const auto& [name, path] : manifest.cameras) cams[name] = path;
  j["cameras"] = cams;
  json frames = json::array();
  for (const auto& r : manifest.frames) {
    json f;
    f["timestamp"] = r.timestamp;
    f["scan"] = r.scan;
    f["pose_index"] = r.pose_index;
    f["camera"] = r.camera;
    put_optional(f, "mask", r.mask);
    put_optional(f, "depth", r.depth);
    put_optional(f, "features", r.features);
    put_optional(f, "semantic", r.semantic);
    put_optional(f, "movable", r.movable);
    put_optional(f, "left", r.left);
    put_optional(f, "right", r.right);
    put_optional(f, "disparity", r.disparity);
    f["splits"] = json(std::vector<std::string>(r.splits.begin(), r.splits.end()));
    frames.push_back(std::move(f));
  }
  j["frames"] = std::move(frames);
  return j.dump(2) + "\n";
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  io::write_file_atomic(path, manifest_to_json(manifest));
}

ValidationReport validate_manifest(const Manifest& manifest) {
  ValidationReport report;
  auto problem = [&](const std::string& msg) { report.problems.push_back(msg); };
  if (manifest.frames.empty()) problem("manifest has no frames");

  std::size_t pose_count = 0;
  bool poses_known = false;
  if (!fs::exists(manifest.resolve(manifest.poses))) {
    problem("missing pose file " + manifest.poses);
  } else {
    try {
      pose_count = io::read_poses(manifest.resolve(manifest.poses)).size();
      poses_known = true;
    } catch (const Error& e) {
      problem(std::string("unreadable pose file: ") + e.what());
    }
  }
  for (const auto& [name, path] : manifest.cameras) {
    if (!fs::exists(manifest.resolve(path))) problem("camera " + name + ": missing file " + path);
  }

  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const FrameRecord& r = manifest.frames[i];
    const std::string where = "frame " + std::to_string(i) + ": ";
    auto check_file = [&](const std::string& what, const std::optional<std::string>& path) {
      if (path && !fs::exists(manifest.resolve(*path))) problem(where + "missing " + what + " " + *path);
    };
    check_file("scan", r.scan);
    check_file("mask", r.mask);
    check_file("depth", r.depth);
    check_file("features", r.features);
    check_file("semantic", r.semantic);
    check_file("movable", r.movable);
    check_file("left", r.left);
    check_file("right", r.right);
    check_file("disparity", r.disparity);
    if (i > 0 && !(r.timestamp > manifest.frames[i - 1].timestamp)) {
      problem(where + "timestamp does not increase");
    }
    if (poses_known && r.pose_index >= pose_count) problem(where + "pose index out of range");
    if (manifest.cameras.count(r.camera) == 0) problem(where + "unknown camera " + r.camera);
    int exclusive = 0;
    for (const auto& s : r.splits) {
      if (kSplits.count(s) == 0) problem(where + "unknown split " + s);
      if (s == "train" || s == "val" || s == "test") ++exclusive;
    }
    if (exclusive > 1) problem(where + "overlapping train/val/test splits");
    if (r.splits.count("pretrain") != 0 && (r.splits.count("val") != 0 || r.splits.count("test") != 0)) {
      problem(where + "pretrain frame is also tagged val/test");
    }
  }
  return report;
}

void require_valid(const Manifest& manifest) {
  const ValidationReport report = validate_manifest(manifest);
  if (report.ok()) return;
  std::string msg = "manifest validation failed:";
  for (const auto& p : report.problems) msg += "\n  " + p;
  fail(ErrorCode::ValidationError, msg);
}

}  // namespace bevlab
