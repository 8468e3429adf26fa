#include "bevlab/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace bevlab::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void put_bytes(const char* data, std::size_t n) { bytes_.append(data, n); }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const char* what) : bytes_(bytes), what_(what) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorCode::ParseError, std::string("truncated ") + what_);
  }

 private:
  const std::string& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  std::error_code dir_ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), dir_ec);
  require(!dir_ec, ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + dir_ec.message());
  // Unique per process and thread so concurrent writers never share a temp file.
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- PCB1 ---------------------------------------------------------------------

std::string encode_pcb(const PointCloud& cloud) {
  cloud.validate();
  Writer w;
  w.put_bytes("PCB1", 4);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cloud.size()));
  const std::uint8_t flags = (cloud.has_labels() ? 1u : 0u) | (cloud.has_features() ? 2u : 0u);
  w.put<std::uint8_t>(flags);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cloud.feature_dim()));
  w.put<double>(cloud.timestamp);
  for (const auto& p : cloud.points) {
    w.put<float>(static_cast<float>(p.x()));
    w.put<float>(static_cast<float>(p.y()));
    w.put<float>(static_cast<float>(p.z()));
  }
  if (cloud.has_labels()) {
    for (auto l : cloud.labels) w.put<std::uint16_t>(l);
  }
  if (cloud.has_features()) {
    for (Eigen::Index i = 0; i < cloud.features.rows(); ++i) {
      for (Eigen::Index j = 0; j < cloud.features.cols(); ++j) w.put<float>(static_cast<float>(cloud.features(i, j)));
    }
  }
  return w.take();
}

PointCloud decode_pcb(const std::string& bytes, Frame frame) {
  Reader r(bytes, "PCB1 file");
  require(r.get_bytes(4) == "PCB1", ErrorCode::ParseError, "bad PCB1 magic");
  const auto n = r.get<std::uint32_t>();
  const auto flags = r.get<std::uint8_t>();
  const auto dim = r.get<std::uint32_t>();
  PointCloud cloud;
  cloud.frame = frame;
  cloud.timestamp = r.get<double>();
  r.need(static_cast<std::size_t>(n) * 12);
  cloud.points.resize(n);
  for (auto& p : cloud.points) {
    const float x = r.get<float>(), y = r.get<float>(), z = r.get<float>();
    p = {x, y, z};
  }
  if (flags & 1u) {
    cloud.labels.resize(n);
    for (auto& l : cloud.labels) l = r.get<std::uint16_t>();
  }
  if ((flags & 2u) && dim > 0) {
    cloud.features.resize(n, dim);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = 0; j < dim; ++j) cloud.features(i, j) = r.get<float>();
    }
  }
  require(r.at_end(), ErrorCode::ParseError, "trailing bytes in PCB1 file");
  return cloud;
}

void write_pcb(const fs::path& path, const PointCloud& cloud) { write_file_atomic(path, encode_pcb(cloud)); }

PointCloud read_pcb(const fs::path& path, Frame frame) { return decode_pcb(read_file(path), frame); }

std::vector<fs::path> list_scans(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pcb") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- poses / camera -------------------------------------------------------------

std::vector<Pose> read_poses(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Pose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double t, tx, ty, tz, qw, qx, qy, qz;
    require(static_cast<bool>(ls >> t >> tx >> ty >> tz >> qw >> qx >> qy >> qz), ErrorCode::ParseError,
            path.string() + ":" + std::to_string(lineno) + ": expected 8 numbers");
    Pose p;
    p.timestamp = t;
    p.translation = {tx, ty, tz};
    p.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    // Text round trips lose a few ulps; renormalise before validating.
    require(std::abs(p.rotation.norm() - 1.0) < 1e-6, ErrorCode::ParseError,
            path.string() + ":" + std::to_string(lineno) + ": quaternion is not unit norm");
    p.rotation.normalize();
    poses.push_back(p);
  }
  return poses;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_poses(const fs::path& path, const std::vector<Pose>& poses) {
  std::string text;
  for (const auto& p : poses) {
    const auto& q = p.rotation;
    text += format_double(p.timestamp) + ' ' + format_double(p.translation.x()) + ' ' +
            format_double(p.translation.y()) + ' ' + format_double(p.translation.z()) + ' ' + format_double(q.w()) +
            ' ' + format_double(q.x()) + ' ' + format_double(q.y()) + ' ' + format_double(q.z()) + '\n';
  }
  write_file_atomic(path, text);
}

CameraFile read_camera(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::ParseError, path.string() + ": expected key=value, got '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      std::size_t used = 0;
      kv[key] = std::stod(value, &used);
      require(used == value.size(), ErrorCode::ParseError, "");
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, path.string() + ": bad number for '" + key + "'");
    }
  }
  auto get = [&](const char* key, std::optional<double> fallback = std::nullopt) {
    auto it = kv.find(key);
    if (it != kv.end()) return it->second;
    require(fallback.has_value(), ErrorCode::ParseError, path.string() + ": missing key '" + key + "'");
    return *fallback;
  };
  CameraFile out;
  auto& cam = out.camera;
  cam.fx = get("fx");
  cam.fy = get("fy");
  cam.cx = get("cx");
  cam.cy = get("cy");
  cam.width = static_cast<int>(get("width"));
  cam.height = static_cast<int>(get("height"));
  cam.extrinsics.rotation = Eigen::Quaterniond(get("qw", 1.0), get("qx", 0.0), get("qy", 0.0), get("qz", 0.0));
  require(std::abs(cam.extrinsics.rotation.norm() - 1.0) < 1e-6, ErrorCode::ParseError,
          path.string() + ": extrinsic quaternion is not unit norm");
  cam.extrinsics.rotation.normalize();
  cam.extrinsics.translation = {get("tx", 0.0), get("ty", 0.0), get("tz", 0.0)};
  if (kv.count("baseline")) out.baseline = kv["baseline"];
  try {
    cam.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

void write_camera(const fs::path& path, const CameraFile& file) {
  const auto& c = file.camera;
  const auto& q = c.extrinsics.rotation;
  const auto& t = c.extrinsics.translation;
  std::string text;
  auto add = [&](const char* key, double v) { text += std::string(key) + "=" + format_double(v) + "\n"; };
  add("fx", c.fx);
  add("fy", c.fy);
  add("cx", c.cx);
  add("cy", c.cy);
  text += "width=" + std::to_string(c.width) + "\nheight=" + std::to_string(c.height) + "\n";
  add("qw", q.w());
  add("qx", q.x());
  add("qy", q.y());
  add("qz", q.z());
  add("tx", t.x());
  add("ty", t.y());
  add("tz", t.z());
  if (file.baseline) add("baseline", *file.baseline);
  write_file_atomic(path, text);
}

// ---- netpbm -----------------------------------------------------------------------

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::string& bytes, const fs::path& path) {
  PnmHeader h;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_ws();
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  auto number = [&] {
    const std::string t = token();
    require(!t.empty() && t.find_first_not_of("0123456789") == std::string::npos, ErrorCode::ParseError,
            path.string() + ": bad netpbm header");
    return std::stoi(t);
  };
  h.magic = token();
  h.width = number();
  h.height = number();
  h.maxval = number();
  require(pos < bytes.size(), ErrorCode::ParseError, path.string() + ": truncated netpbm header");
  h.data_offset = pos + 1;  // single whitespace byte after maxval
  return h;
}

std::string pnm_header(const char* magic, int width, int height, int maxval) {
  return std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
         std::to_string(maxval) + "\n";
}

}  // namespace

Gray16 read_pgm16(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto h = parse_pnm_header(bytes, path);
  require(h.magic == "P5" && h.maxval > 255 && h.maxval <= 65535, ErrorCode::ParseError,
          path.string() + ": expected a 16-bit P5 PGM");
  Gray16 img(h.width, h.height, 0);
  require(bytes.size() >= h.data_offset + img.size() * 2, ErrorCode::ParseError, path.string() + ": truncated PGM");
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto hi = static_cast<std::uint8_t>(bytes[h.data_offset + 2 * i]);
    const auto lo = static_cast<std::uint8_t>(bytes[h.data_offset + 2 * i + 1]);
    img[i] = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return img;
}

void write_pgm16(const fs::path& path, const Gray16& image) {
  std::string out = pnm_header("P5", image.width(), image.height(), 65535);
  out.reserve(out.size() + image.size() * 2);
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.push_back(static_cast<char>(image[i] >> 8));
    out.push_back(static_cast<char>(image[i] & 0xff));
  }
  write_file_atomic(path, out);
}

GrayImage read_pgm8(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto h = parse_pnm_header(bytes, path);
  require(h.magic == "P5" && h.maxval > 0 && h.maxval <= 255, ErrorCode::ParseError,
          path.string() + ": expected an 8-bit P5 PGM");
  GrayImage img(h.width, h.height, 0);
  require(bytes.size() >= h.data_offset + img.size(), ErrorCode::ParseError, path.string() + ": truncated PGM");
  std::memcpy(img.data().data(), bytes.data() + h.data_offset, img.size());
  return img;
}

void write_pgm8(const fs::path& path, const GrayImage& image) {
  std::string out = pnm_header("P5", image.width(), image.height(), 255);
  out.append(reinterpret_cast<const char*>(image.data().data()), image.size());
  write_file_atomic(path, out);
}

Gray16 encode_depth_mm(const DepthImage& depth) {
  Gray16 out(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    if (d > 0.0) out[i] = static_cast<std::uint16_t>(std::clamp(std::lround(d * 1000.0), 1L, 65535L));
  }
  return out;
}

DepthImage decode_depth_mm(const Gray16& image) {
  DepthImage out(image.width(), image.height(), 0.0);
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = image[i] / 1000.0;
  return out;
}

Gray16 encode_disparity(const DisparityMap& disparity) {
  Gray16 out(disparity.width(), disparity.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (disparity.valid[i]) {
      out[i] = static_cast<std::uint16_t>(std::clamp(std::lround(disparity.values[i] * 256.0), 0L, 65535L));
    }
  }
  return out;
}

DisparityMap decode_disparity(const Gray16& image) {
  DisparityMap out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image[i] != 0) out.set(static_cast<int>(i / image.width()), static_cast<int>(i % image.width()),
                               image[i] / 256.0);
  }
  return out;
}

LabelMask read_label_pgm(const fs::path& path) {
  const Gray16 img = read_pgm16(path);
  LabelMask mask(img.width(), img.height(), 0);
  mask.data() = img.data();
  return mask;
}

void write_label_pgm(const fs::path& path, const LabelMask& mask) {
  Gray16 img(mask.width(), mask.height(), 0);
  img.data() = mask.data();
  write_pgm16(path, img);
}

MovableMask read_flag_pgm(const fs::path& path) {
  const GrayImage img = read_pgm8(path);
  MovableMask mask(img.width(), img.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] != 0;
  return mask;
}

void write_flag_pgm(const fs::path& path, const MovableMask& mask) {
  GrayImage img(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 255 : 0;
  write_pgm8(path, img);
}

std::string encode_ppm(const RgbImage& image) {
  std::string out = pnm_header("P6", image.width(), image.height(), 255);
  out.reserve(out.size() + image.size() * 3);
  for (const auto& px : image.data()) {
    out.push_back(static_cast<char>(px.r));
    out.push_back(static_cast<char>(px.g));
    out.push_back(static_cast<char>(px.b));
  }
  return out;
}

void write_ppm(const fs::path& path, const RgbImage& image) { write_file_atomic(path, encode_ppm(image)); }

// ---- BEVG / FMAP ------------------------------------------------------------------

namespace {

void put_header(Writer& w, const char* magic, std::uint32_t h, std::uint32_t wd, std::uint32_t c, GridDtype dtype,
                float res, float ox, float oy) {
  w.put_bytes(magic, 4);
  w.put<std::uint32_t>(h);
  w.put<std::uint32_t>(wd);
  w.put<std::uint32_t>(c);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
  w.put<float>(res);
  w.put<float>(ox);
  w.put<float>(oy);
}

void put_validity(Writer& w, const std::vector<std::uint8_t>& valid) {
  w.put<std::uint8_t>(valid.empty() ? 0 : 1);
  for (auto v : valid) w.put<std::uint8_t>(v ? 1 : 0);
}

template <typename G>
void put_grid_header(Writer& w, const G& g, GridDtype dtype) {
  put_header(w, "BEVG", static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols()),
             static_cast<std::uint32_t>(g.channels), dtype, static_cast<float>(g.config.resolution),
             static_cast<float>(g.config.origin.x()), static_cast<float>(g.config.origin.y()));
}

}  // namespace

std::string encode_bevg(const FeatureGrid& grid) {
  Writer w;
  put_grid_header(w, grid, GridDtype::F32);
  for (double v : grid.values) w.put<float>(static_cast<float>(v));
  put_validity(w, grid.valid);
  return w.take();
}

std::string encode_bevg(const LabelGrid& grid) {
  Writer w;
  put_grid_header(w, grid, GridDtype::U16);
  for (auto v : grid.values) w.put<std::uint16_t>(v);
  put_validity(w, grid.valid);
  return w.take();
}

std::string encode_bevg(const PartitionGrid& grid) {
  Writer w;
  put_grid_header(w, grid, GridDtype::U8);
  for (auto v : grid.values) w.put<std::uint8_t>(static_cast<std::uint8_t>(v));
  put_validity(w, grid.valid);
  return w.take();
}

AnyGrid decode_bevg(const std::string& bytes) {
  Reader r(bytes, "BEVG file");
  require(r.get_bytes(4) == "BEVG", ErrorCode::ParseError, "bad BEVG magic");
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const auto c = r.get<std::uint32_t>();
  const auto dtype = r.get<std::uint8_t>();
  const auto res = r.get<float>();
  const auto ox = r.get<float>();
  const auto oy = r.get<float>();
  require(h > 0 && w > 0 && c > 0 && res > 0.0f, ErrorCode::ParseError, "bad BEVG dimensions");
  GridConfig cfg = GridConfig::ego_centered(static_cast<int>(h), static_cast<int>(w), res);
  cfg.origin = {ox, oy};
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  const std::size_t n = cells * c;

  auto finish = [&](auto grid) -> AnyGrid {
    const auto flag = r.get<std::uint8_t>();
    if (flag) {
      grid.valid.resize(cells);
      for (auto& v : grid.valid) v = r.get<std::uint8_t>();
    }
    require(r.at_end(), ErrorCode::ParseError, "trailing bytes in BEVG file");
    return grid;
  };

  switch (static_cast<GridDtype>(dtype)) {
    case GridDtype::F32: {
      r.need(n * 4);
      FeatureGrid g(cfg, static_cast<int>(c), 0.0, false);
      for (auto& v : g.values) v = r.get<float>();
      return finish(std::move(g));
    }
    case GridDtype::U16: {
      r.need(n * 2);
      LabelGrid g(cfg, static_cast<int>(c), 0, false);
      for (auto& v : g.values) v = r.get<std::uint16_t>();
      return finish(std::move(g));
    }
    case GridDtype::U8: {
      r.need(n);
      PartitionGrid g(cfg, static_cast<int>(c), CellState::OutsideFov, false);
      for (auto& v : g.values) {
        const auto raw = r.get<std::uint8_t>();
        require(raw <= 2, ErrorCode::ParseError, "bad cell state in BEVG partition");
        v = static_cast<CellState>(raw);
      }
      return finish(std::move(g));
    }
  }
  fail(ErrorCode::ParseError, "unknown BEVG dtype " + std::to_string(dtype));
}

void write_bevg(const fs::path& path, const FeatureGrid& grid) { write_file_atomic(path, encode_bevg(grid)); }
void write_bevg(const fs::path& path, const LabelGrid& grid) { write_file_atomic(path, encode_bevg(grid)); }
void write_bevg(const fs::path& path, const PartitionGrid& grid) { write_file_atomic(path, encode_bevg(grid)); }

AnyGrid read_bevg(const fs::path& path) { return decode_bevg(read_file(path)); }

namespace {

template <typename G>
G read_grid_as(const fs::path& path, const char* kind) {
  AnyGrid any = read_bevg(path);
  auto* g = std::get_if<G>(&any);
  require(g != nullptr, ErrorCode::ParseError, path.string() + ": expected a " + kind + " grid");
  return std::move(*g);
}

}  // namespace

FeatureGrid read_feature_grid(const fs::path& path) { return read_grid_as<FeatureGrid>(path, "f32"); }
LabelGrid read_label_grid(const fs::path& path) { return read_grid_as<LabelGrid>(path, "u16 label"); }
PartitionGrid read_partition_grid(const fs::path& path) { return read_grid_as<PartitionGrid>(path, "u8 partition"); }

std::string encode_fmap(const FeatureMap& map) {
  require(map.features.rows() == static_cast<Eigen::Index>(map.width) * map.height, ErrorCode::DimensionMismatch,
          "feature map rows must equal width * height");
  Writer w;
  put_header(w, "FMAP", static_cast<std::uint32_t>(map.height), static_cast<std::uint32_t>(map.width),
             static_cast<std::uint32_t>(map.features.cols()), GridDtype::F32, 0.0f, 0.0f, 0.0f);
  for (Eigen::Index i = 0; i < map.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.features.cols(); ++j) w.put<float>(static_cast<float>(map.features(i, j)));
  }
  put_validity(w, map.valid);
  return w.take();
}

FeatureMap decode_fmap(const std::string& bytes) {
  Reader r(bytes, "FMAP file");
  require(r.get_bytes(4) == "FMAP", ErrorCode::ParseError, "bad FMAP magic");
  FeatureMap map;
  map.height = static_cast<int>(r.get<std::uint32_t>());
  map.width = static_cast<int>(r.get<std::uint32_t>());
  const auto c = r.get<std::uint32_t>();
  require(r.get<std::uint8_t>() == 0, ErrorCode::ParseError, "FMAP payload must be f32");
  (void)r.get<float>();
  (void)r.get<float>();
  (void)r.get<float>();
  const auto n = static_cast<Eigen::Index>(map.width) * map.height;
  r.need(static_cast<std::size_t>(n) * c * 4);
  map.features.resize(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(c); ++j) map.features(i, j) = r.get<float>();
  }
  if (r.get<std::uint8_t>()) {
    map.valid.resize(static_cast<std::size_t>(n));
    for (auto& v : map.valid) v = r.get<std::uint8_t>();
  }
  require(r.at_end(), ErrorCode::ParseError, "trailing bytes in FMAP file");
  return map;
}

void write_fmap(const fs::path& path, const FeatureMap& map) { write_file_atomic(path, encode_fmap(map)); }
FeatureMap read_fmap(const fs::path& path) { return decode_fmap(read_file(path)); }

GridConfig parse_grid_spec(const std::string& spec) {
  int rows = 0, cols = 0;
  double res = 0.0;
  char x1 = 0, x2 = 0;
  std::istringstream in(spec);
  require(static_cast<bool>(in >> rows >> x1 >> cols >> x2 >> res) && x1 == 'x' && x2 == 'x' && in.eof(),
          ErrorCode::ParseError, "grid spec must look like 256x256x0.1, got '" + spec + "'");
  require(rows > 0 && cols > 0 && res > 0.0, ErrorCode::ParseError, "grid spec values must be positive");
  return GridConfig::ego_centered(rows, cols, res);
}

}  // namespace bevlab::io
