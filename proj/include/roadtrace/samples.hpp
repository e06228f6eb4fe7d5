#pragma once

#include "roadtrace/geometry.hpp"
#include "roadtrace/grid_map.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace roadtrace {

struct LabelVertex {
  Point2 offset = Point2::Zero();  // relative to the sample center
  bool valid = false;
};

// One expert step as stored by emit_samples.
struct TrainingSample {
  std::string tile;
  std::size_t index = 0;
  Point2 center = Point2::Zero();
  std::vector<LabelVertex> label_vertices;
  GridMap rgb;
  GridMap history;
  GridMap segmentation;
  GridMap intersection;
  // One per valid label vertex, in label order.
  std::vector<GridMap> instance_masks;

  std::size_t num_valid() const;
};

// Reader for a manifest.json written by emit_samples.
class SampleSet {
 public:
  explicit SampleSet(const std::filesystem::path &manifest);

  std::size_t size() const { return count_; }
  int roi_size() const { return roi_size_; }
  int n_queries() const { return n_queries_; }
  const std::string &tile() const { return tile_; }
  TrainingSample load(std::size_t k) const;

 private:
  std::filesystem::path dir_;
  std::string text_;
  std::size_t count_ = 0;
  int roi_size_ = 128;
  int n_queries_ = 10;
  std::string tile_;
};

}  // namespace roadtrace
