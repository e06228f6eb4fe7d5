#pragma once

#include "roadtrace/grid_map.hpp"
#include "roadtrace/road_graph.hpp"

#include <span>
#include <utility>
#include <vector>

namespace roadtrace {

inline constexpr std::uint8_t kOn = 255;

// Square window around an integer-rounded center. Output pixel (0, 0) maps to
// tile pixel (cx - size/2, cy - size/2).
struct RoiWindow {
  long cx = 0;
  long cy = 0;
  int size = 128;

  RoiWindow() = default;
  RoiWindow(long cx, long cy, int size = 128);
  static RoiWindow centered_at(const Point2 &center, int size = 128);

  long x0() const { return cx - size / 2; }
  long y0() const { return cy - size / 2; }
  Point2 center() const { return {static_cast<double>(cx), static_cast<double>(cy)}; }
};

// Sets every pixel whose center lies within thickness/2 of segment [a, b].
// Pixel (i, j) of `m` has its center at (origin_x + i, origin_y + j).
void stroke_segment(GridMap &m, const Point2 &a, const Point2 &b, double thickness,
                    long origin_x = 0, long origin_y = 0);
void fill_disc(GridMap &m, const Point2 &center, double radius, long origin_x = 0,
               long origin_y = 0);

GridMap rasterize_graph(const RoadGraph &g, int width, int height, double thickness);
GridMap rasterize_polyline(std::span<const Point2> path, int width, int height,
                           double thickness, long origin_x = 0, long origin_y = 0);

// Zero-padded crop; windows may overhang the tile.
GridMap crop_roi(const GridMap &m, const RoiWindow &win);
// Writes an ROI back into `m` at its window, clipping to the tile.
void paste_roi(GridMap &m, const GridMap &roi, const RoiWindow &win);

// Discs at junctions (degree >= 3) and, when `include_ends`, road ends
// (degree 1). Pure cycles get a disc at their anchor vertex.
GridMap intersection_label(const RoadGraph &g, int width, int height, double radius,
                           bool include_ends = true);

using HeatmapTile = std::pair<RoiWindow, GridMap>;

// Per-pixel maximum over all tiles covering a pixel. Uncovered pixels stay 0,
// are counted into `uncovered` and logged as a warning.
GridMap merge_heatmaps(std::span<const HeatmapTile> tiles, int width, int height,
                       std::size_t *uncovered = nullptr);

struct PeakParams {
  int threshold = 128;
  double nms_radius = 16.0;
};

// Greedy non-maximum suppression. The brightest remaining pixel (ties in
// row-major order) is taken, refined to the centroid of its flat plateau,
// emitted, and everything within nms_radius of the emitted point is
// suppressed. Emitted points are pairwise more than nms_radius apart.
std::vector<Point2> local_peaks(const GridMap &m, const PeakParams &params = {});

struct InstanceMask {
  GridMap mask;
  bool reachable = true;
};

// The ground-truth road stretch from the projection of `from` to the
// projection of `to`, stroked inside `win`.
InstanceMask instance_mask_label(const RoadGraph &g, const Point2 &from, const Point2 &to,
                                 const RoiWindow &win, double thickness);

}  // namespace roadtrace
