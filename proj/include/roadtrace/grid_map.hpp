#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace roadtrace {

// Row-major 8-bit raster with interleaved channels.
class GridMap {
 public:
  using Plane = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  GridMap() = default;
  GridMap(int width, int height, int channels = 1, std::uint8_t fill = 0)
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1)
      throw std::invalid_argument("invalid grid map shape");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }
  GridMap(int width, int height, int channels, std::vector<std::uint8_t> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
      throw std::invalid_argument("sample buffer does not match grid map shape");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  bool contains(long x, long y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::uint8_t &at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  const std::vector<std::uint8_t> &data() const { return data_; }
  std::vector<std::uint8_t> &data() { return data_; }

  // Single-channel view as an Eigen matrix (rows = y, cols = x).
  Eigen::Map<const Plane> plane() const {
    if (channels_ != 1) throw std::logic_error("plane() requires a single-channel map");
    return {data_.data(), height_, width_};
  }
  Eigen::Map<Plane> plane() {
    if (channels_ != 1) throw std::logic_error("plane() requires a single-channel map");
    return {data_.data(), height_, width_};
  }

  std::size_t count_nonzero() const {
    std::size_t n = 0;
    for (std::uint8_t v : data_) n += v != 0;
    return n;
  }

  friend bool operator==(const GridMap &, const GridMap &) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> data_;
};

}  // namespace roadtrace
