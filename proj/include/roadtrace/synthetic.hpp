#pragma once

#include "roadtrace/grid_map.hpp"
#include "roadtrace/road_graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace roadtrace {

enum class SyntheticKind { Grid, Ring, Tree };

const char *to_string(SyntheticKind k);
SyntheticKind synthetic_kind_from(const std::string &name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::Grid;
  int width = 512;
  int height = 512;
  std::uint64_t seed = 0;
  // Grid: rows x cols lattice. Ring: spokes from the hub (0 = plain ring).
  // Tree: node count and degree cap.
  int rows = 3;
  int cols = 3;
  int spokes = 0;
  int nodes = 12;
  int max_degree = 4;
  // Random vertex displacement for grids, px.
  double jitter = 6.0;
};

// Road graph for a spec. Generated roads keep at least ~30 px clear of each
// other away from shared vertices and meet at angles of 40 degrees or more.
RoadGraph make_synthetic(const SyntheticSpec &spec);

// Plausible-looking aerial tile: noisy vegetation with gray roads drawn
// `road_width` px wide.
GridMap synthetic_aerial(const RoadGraph &g, int width, int height, std::uint64_t seed,
                         double road_width = 8.0);

struct SyntheticCase {
  std::string name;
  SyntheticSpec spec;
  RoadGraph graph;
};

// Fixed mix of grids, rings (with and without hubs) and random trees,
// covering vertex degrees 1 through 6.
std::vector<SyntheticCase> synthetic_suite(std::size_t count = 20, std::uint64_t seed = 1);

}  // namespace roadtrace
