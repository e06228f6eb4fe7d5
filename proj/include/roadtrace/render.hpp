#pragma once

#include "roadtrace/grid_map.hpp"
#include "roadtrace/road_graph.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace roadtrace {

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr Rgb kTruthColor{0, 255, 255};   // cyan
inline constexpr Rgb kPredColor{255, 140, 0};    // orange

struct RenderStyle {
  double truth_width = 3.0;
  double pred_width = 2.0;
  double vertex_radius = 2.5;
  // Embedded as a data URI under the graphs when non-empty.
  std::string background_png;
};

// Side-by-side comparison as SVG: ground truth below, prediction on top.
// Either graph may be empty.
std::string render_svg(const RoadGraph &truth, const RoadGraph &pred, int width, int height,
                       const RenderStyle &style = {});

// Draws the graphs onto a copy of `base` (gray or RGB; output is RGB).
GridMap render_overlay(const GridMap &base, const RoadGraph &truth, const RoadGraph &pred,
                       const RenderStyle &style = {});

}  // namespace roadtrace
