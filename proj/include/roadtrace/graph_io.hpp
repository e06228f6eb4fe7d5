#pragma once

#include "roadtrace/road_graph.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace roadtrace {

// Malformed input file. The message names the offending line or field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// roadgraph-v1:
//   {"format":"roadgraph-v1","width":W,"height":H,
//    "vertices":[[x,y],...],"edges":[[i,j],...]}
// with i < j in every edge pair, plus an optional free-form "provenance"
// object. Readers ignore keys they do not know.
std::string graph_to_json(const RoadGraph &g, std::string_view provenance_json = {});
RoadGraph graph_from_json(std::string_view text);

void save_graph(const RoadGraph &g, const std::filesystem::path &path,
                std::string_view provenance_json = {});
RoadGraph load_graph(const std::filesystem::path &path);

}  // namespace roadtrace
