#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bevlab/geometry.hpp"
#include "bevlab/grid.hpp"
#include "bevlab/raster.hpp"
#include "bevlab/stereo.hpp"

namespace bevlab::io {

namespace fs = std::filesystem;

/// Writes `bytes` to `path` through a sibling temp file and rename.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// PCB1: "PCB1", u32 N, u8 flags (bit0 labels, bit1 features), u32 Z,
// f64 timestamp, N x 3 f32 xyz, [N u16 labels], [N x Z f32 features].
std::string encode_pcb(const PointCloud& cloud);
PointCloud decode_pcb(const std::string& bytes, Frame frame = Frame::Sensor);
void write_pcb(const fs::path& path, const PointCloud& cloud);
PointCloud read_pcb(const fs::path& path, Frame frame = Frame::Sensor);
/// Sorted *.pcb files in a directory.
std::vector<fs::path> list_scans(const fs::path& dir);

/// "timestamp tx ty tz qw qx qy qz" per line; blank lines and '#' comments skipped.
std::vector<Pose> read_poses(const fs::path& path);
void write_poses(const fs::path& path, const std::vector<Pose>& poses);

struct CameraFile {
  CameraModel camera;
  std::optional<double> baseline;  // stereo baseline in meters
};
/// key=value lines: fx fy cx cy width height qw qx qy qz tx ty tz [baseline].
CameraFile read_camera(const fs::path& path);
void write_camera(const fs::path& path, const CameraFile& camera);

// Binary PGM ("P5"). 16-bit samples are big-endian per the netpbm format.
struct Gray16Tag;
using Gray16 = Raster<std::uint16_t, Gray16Tag>;
Gray16 read_pgm16(const fs::path& path);
void write_pgm16(const fs::path& path, const Gray16& image);
GrayImage read_pgm8(const fs::path& path);
void write_pgm8(const fs::path& path, const GrayImage& image);

/// Depth in millimetres (0 = invalid), values above 65.535 m saturate.
Gray16 encode_depth_mm(const DepthImage& depth);
DepthImage decode_depth_mm(const Gray16& image);
/// Disparity in 1/256 pixel units (0 = invalid, so a valid zero disparity is lost).
Gray16 encode_disparity(const DisparityMap& disparity);
DisparityMap decode_disparity(const Gray16& image);
LabelMask read_label_pgm(const fs::path& path);
void write_label_pgm(const fs::path& path, const LabelMask& mask);
/// 0/255 on disk, 0/1 in memory.
MovableMask read_flag_pgm(const fs::path& path);
void write_flag_pgm(const fs::path& path, const MovableMask& mask);

struct RgbTag;
struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};
using RgbImage = Raster<Rgb, RgbTag>;
std::string encode_ppm(const RgbImage& image);
void write_ppm(const fs::path& path, const RgbImage& image);

// BEVG: "BEVG", u32 H, u32 W, u32 C, u8 dtype (0 f32, 1 u16, 2 u8), f32
// resolution, 2 x f32 origin, row-major payload, u8 flag, [H x W u8 validity].
enum class GridDtype : std::uint8_t { F32 = 0, U16 = 1, U8 = 2 };
using AnyGrid = std::variant<FeatureGrid, LabelGrid, PartitionGrid>;

std::string encode_bevg(const FeatureGrid& grid);
std::string encode_bevg(const LabelGrid& grid);
std::string encode_bevg(const PartitionGrid& grid);
AnyGrid decode_bevg(const std::string& bytes);

void write_bevg(const fs::path& path, const FeatureGrid& grid);
void write_bevg(const fs::path& path, const LabelGrid& grid);
void write_bevg(const fs::path& path, const PartitionGrid& grid);
AnyGrid read_bevg(const fs::path& path);
FeatureGrid read_feature_grid(const fs::path& path);
LabelGrid read_label_grid(const fs::path& path);
PartitionGrid read_partition_grid(const fs::path& path);

/// Per-pixel feature map: BEVG layout with magic "FMAP" and image dims.
struct FeatureMap {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd features;          // (width*height) x Z, row-major pixel order
  std::vector<std::uint8_t> valid;   // empty = all valid
};
std::string encode_fmap(const FeatureMap& map);
FeatureMap decode_fmap(const std::string& bytes);
void write_fmap(const fs::path& path, const FeatureMap& map);
FeatureMap read_fmap(const fs::path& path);

/// Parses "256x256x0.1" into an ego-centred grid.
GridConfig parse_grid_spec(const std::string& spec);

}  // namespace bevlab::io
