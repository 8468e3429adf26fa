#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bevlab/geometry.hpp"
#include "bevlab/io.hpp"

namespace bevlab {

namespace fs = std::filesystem;

struct FrameRecord {
  double timestamp = 0.0;
  std::string scan;
  std::size_t pose_index = 0;
  std::string camera = "front";
  std::optional<std::string> mask;
  std::optional<std::string> depth;
  std::optional<std::string> features;
  std::optional<std::string> semantic;
  std::optional<std::string> movable;
  std::optional<std::string> left;
  std::optional<std::string> right;
  std::optional<std::string> disparity;
  std::set<std::string> splits;
};

/// Ordered frame list plus camera table; paths are relative to `root`.
struct Manifest {
  fs::path root;
  std::string poses;
  std::map<std::string, std::string> cameras;
  std::vector<FrameRecord> frames;

  fs::path resolve(const std::string& relative) const { return root / relative; }
  std::vector<std::size_t> frames_in_split(const std::string& split) const;
};

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Throws ParseError on malformed JSON or missing required keys.
Manifest load_manifest(const fs::path& path);
Manifest parse_manifest(const std::string& json_text, const fs::path& root);
std::string manifest_to_json(const Manifest& manifest);
void save_manifest(const fs::path& path, const Manifest& manifest);

/// Missing files, non-increasing timestamps, split overlaps, bad indices.
ValidationReport validate_manifest(const Manifest& manifest);
/// validate_manifest, throwing ValidationError listing every problem.
void require_valid(const Manifest& manifest);

}  // namespace bevlab
