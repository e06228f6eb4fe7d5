#include "roadtrace/samples.hpp"

#include "roadtrace/codec.hpp"
#include "roadtrace/graph_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace roadtrace {

std::size_t TrainingSample::num_valid() const {
  return static_cast<std::size_t>(std::count_if(label_vertices.begin(), label_vertices.end(),
                                                [](const LabelVertex &l) { return l.valid; }));
}

SampleSet::SampleSet(const std::filesystem::path &manifest) : dir_(manifest.parent_path()) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot read " + manifest.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  text_ = buf.str();
  const auto doc = nlohmann::json::parse(text_, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("samples"))
    throw FormatError(manifest.string() + ": not a sample manifest");
  count_ = doc["samples"].size();
  roi_size_ = doc.value("roi_size", 128);
  n_queries_ = doc.value("n_queries", 10);
  tile_ = doc.value("tile", std::string());
}

TrainingSample SampleSet::load(std::size_t k) const {
  const auto doc = nlohmann::json::parse(text_);
  const auto &rec = doc["samples"].at(k);
  TrainingSample s;
  s.index = rec.at("k").get<std::size_t>();
  s.tile = rec.value("tile", tile_);
  s.center = Point2(rec.at("center")[0].get<double>(), rec.at("center")[1].get<double>());
  for (const auto &lv : rec.at("label_vertices"))
    s.label_vertices.push_back({Point2(lv.at("dx").get<double>(), lv.at("dy").get<double>()),
                                lv.at("valid").get<bool>()});
  const std::string stem = (dir_ / std::to_string(s.index)).string();
  s.rgb = read_png(stem + "_rgb.png");
  s.history = read_png(stem + "_hist.png");
  s.segmentation = read_png(stem + "_seg.png");
  s.intersection = read_png(stem + "_int.png");
  for (std::size_t i = 0; i < s.num_valid(); ++i)
    s.instance_masks.push_back(read_png(stem + "_inst" + std::to_string(i) + ".png"));
  return s;
}

}  // namespace roadtrace
