#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bevlab/error.hpp"

namespace bevlab {

/// Row-major 2D array. The Tag parameter keeps semantically different
/// images (depth vs disparity, instance labels vs bins) from mixing.
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    require(width >= 0 && height >= 0, ErrorCode::InvalidArgument, "negative raster size");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  template <typename OtherT, typename OtherTag>
  bool same_shape(const Raster<OtherT, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct DepthTag;
struct GrayTag;
struct LabelTag;
struct BinTag;
struct FlagTag;

/// Metric depth per pixel; 0.0 = invalid.
using DepthImage = Raster<double, DepthTag>;
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Instance ids (image or grid); 0 = unlabeled.
using LabelMask = Raster<std::uint16_t, LabelTag>;
/// Binary {0,1} per pixel (movable mask, validity planes).
using MovableMask = Raster<std::uint8_t, FlagTag>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  require(a.same_shape(b), ErrorCode::DimensionMismatch, what);
}

/// Fraction of pixels with depth > 0.
double density(const DepthImage& depth);

}  // namespace bevlab
