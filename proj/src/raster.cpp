#include "roadtrace/raster.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace roadtrace {

RoiWindow::RoiWindow(long cx, long cy, int size) : cx(cx), cy(cy), size(size) {
  if (size < 32 || size % 2 != 0)
    throw std::invalid_argument("ROI size must be even and at least 32");
}

RoiWindow RoiWindow::centered_at(const Point2 &center, int size) {
  return {round_to_pixel(center.x()), round_to_pixel(center.y()), size};
}

void stroke_segment(GridMap &m, const Point2 &a, const Point2 &b, double thickness,
                    long origin_x, long origin_y) {
  const double r = thickness / 2.0;
  const double r2 = r * r;
  const long x_lo = std::max<long>(0, static_cast<long>(std::ceil(std::min(a.x(), b.x()) - r)) - origin_x);
  const long x_hi = std::min<long>(m.width() - 1, static_cast<long>(std::floor(std::max(a.x(), b.x()) + r)) - origin_x);
  const long y_lo = std::max<long>(0, static_cast<long>(std::ceil(std::min(a.y(), b.y()) - r)) - origin_y);
  const long y_hi = std::min<long>(m.height() - 1, static_cast<long>(std::floor(std::max(a.y(), b.y()) + r)) - origin_y);
  for (long y = y_lo; y <= y_hi; ++y)
    for (long x = x_lo; x <= x_hi; ++x) {
      const Point2 p(static_cast<double>(origin_x + x), static_cast<double>(origin_y + y));
      if (squared_distance_to_segment(a, b, p) <= r2)
        for (int c = 0; c < m.channels(); ++c)
          m.at(static_cast<int>(x), static_cast<int>(y), c) = kOn;
    }
}

void fill_disc(GridMap &m, const Point2 &center, double radius, long origin_x,
               long origin_y) {
  const double r2 = radius * radius;
  const long x_lo = std::max<long>(0, static_cast<long>(std::ceil(center.x() - radius)) - origin_x);
  const long x_hi = std::min<long>(m.width() - 1, static_cast<long>(std::floor(center.x() + radius)) - origin_x);
  const long y_lo = std::max<long>(0, static_cast<long>(std::ceil(center.y() - radius)) - origin_y);
  const long y_hi = std::min<long>(m.height() - 1, static_cast<long>(std::floor(center.y() + radius)) - origin_y);
  for (long y = y_lo; y <= y_hi; ++y)
    for (long x = x_lo; x <= x_hi; ++x) {
      const Point2 p(static_cast<double>(origin_x + x), static_cast<double>(origin_y + y));
      if ((p - center).squaredNorm() <= r2)
        for (int c = 0; c < m.channels(); ++c)
          m.at(static_cast<int>(x), static_cast<int>(y), c) = kOn;
    }
}

GridMap rasterize_graph(const RoadGraph &g, int width, int height, double thickness) {
  if (thickness < 1.0) throw std::invalid_argument("stroke thickness must be at least 1");
  GridMap m(width, height);
  for (const Edge &e : g.edges()) stroke_segment(m, g.vertex(e.a), g.vertex(e.b), thickness);
  return m;
}

GridMap rasterize_polyline(std::span<const Point2> path, int width, int height,
                           double thickness, long origin_x, long origin_y) {
  GridMap m(width, height);
  if (path.size() == 1) stroke_segment(m, path[0], path[0], thickness, origin_x, origin_y);
  for (std::size_t i = 1; i < path.size(); ++i)
    stroke_segment(m, path[i - 1], path[i], thickness, origin_x, origin_y);
  return m;
}

GridMap crop_roi(const GridMap &m, const RoiWindow &win) {
  GridMap out(win.size, win.size, m.channels());
  const long x0 = win.x0(), y0 = win.y0();
  for (int y = 0; y < win.size; ++y) {
    const long sy = y0 + y;
    if (sy < 0 || sy >= m.height()) continue;
    const long sx_lo = std::max<long>(0, x0);
    const long sx_hi = std::min<long>(m.width(), x0 + win.size);
    if (sx_lo >= sx_hi) continue;
    const auto *src = &m.data()[(static_cast<std::size_t>(sy) * m.width() + sx_lo) * m.channels()];
    auto *dst = &out.data()[(static_cast<std::size_t>(y) * win.size + (sx_lo - x0)) * m.channels()];
    std::copy(src, src + (sx_hi - sx_lo) * m.channels(), dst);
  }
  return out;
}

void paste_roi(GridMap &m, const GridMap &roi, const RoiWindow &win) {
  if (roi.channels() != m.channels()) throw std::invalid_argument("channel count mismatch");
  for (int y = 0; y < roi.height(); ++y)
    for (int x = 0; x < roi.width(); ++x) {
      const long tx = win.x0() + x, ty = win.y0() + y;
      if (!m.contains(tx, ty)) continue;
      for (int c = 0; c < m.channels(); ++c)
        m.at(static_cast<int>(tx), static_cast<int>(ty), c) = roi.at(x, y, c);
    }
}

GridMap intersection_label(const RoadGraph &g, int width, int height, double radius,
                           bool include_ends) {
  if (radius < 1.0) throw std::invalid_argument("disc radius must be at least 1");
  GridMap m(width, height);
  for (std::size_t v : key_vertices(g, include_ends)) fill_disc(m, g.vertex(v), radius);
  return m;
}

GridMap merge_heatmaps(std::span<const HeatmapTile> tiles, int width, int height,
                       std::size_t *uncovered) {
  GridMap out(width, height);
  std::vector<bool> covered(static_cast<std::size_t>(width) * height, false);
  for (const auto &[win, tile] : tiles) {
    if (tile.channels() != 1) throw std::invalid_argument("heatmap tiles must be single-channel");
    for (int y = 0; y < tile.height(); ++y)
      for (int x = 0; x < tile.width(); ++x) {
        const long tx = win.x0() + x, ty = win.y0() + y;
        if (!out.contains(tx, ty)) continue;
        auto &px = out.at(static_cast<int>(tx), static_cast<int>(ty));
        px = std::max(px, tile.at(x, y));
        covered[static_cast<std::size_t>(ty) * width + tx] = true;
      }
  }
  const auto gaps = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), false));
  if (gaps > 0) spdlog::warn("merge_heatmaps: {} pixels not covered by any ROI", gaps);
  if (uncovered) *uncovered = gaps;
  return out;
}

std::vector<Point2> local_peaks(const GridMap &m, const PeakParams &params) {
  if (params.nms_radius < 1.0) throw std::invalid_argument("nms_radius must be at least 1");
  if (m.channels() != 1) throw std::invalid_argument("peak extraction needs a single-channel map");
  const int w = m.width();
  const auto &data = m.data();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i] >= params.threshold && data[i] > 0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return data[i] > data[j]; });

  std::vector<bool> suppressed(data.size(), false);
  std::vector<Point2> peaks;
  const double r = params.nms_radius;
  const double r2 = r * r;
  const auto suppress_around = [&](const Point2 &c) {
    const int x_lo = std::max(0, static_cast<int>(std::ceil(c.x() - r)));
    const int x_hi = std::min(w - 1, static_cast<int>(std::floor(c.x() + r)));
    const int y_lo = std::max(0, static_cast<int>(std::ceil(c.y() - r)));
    const int y_hi = std::min(m.height() - 1, static_cast<int>(std::floor(c.y() + r)));
    for (int y = y_lo; y <= y_hi; ++y)
      for (int x = x_lo; x <= x_hi; ++x)
        if ((Point2(x, y) - c).squaredNorm() <= r2)
          suppressed[static_cast<std::size_t>(y) * w + x] = true;
  };

  std::vector<std::size_t> stack, plateau;
  std::vector<bool> in_plateau(data.size(), false);
  for (std::size_t idx : order) {
    if (suppressed[idx]) continue;
    const int sx = static_cast<int>(idx % w), sy = static_cast<int>(idx / w);
    const std::uint8_t level = data[idx];
    // Flat plateau: 8-connected equal-valued pixels near the seed.
    plateau.clear();
    stack.assign(1, idx);
    in_plateau[idx] = true;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      plateau.push_back(cur);
      const int cx = static_cast<int>(cur % w), cy = static_cast<int>(cur / w);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = cx + dx, ny = cy + dy;
          if (!m.contains(nx, ny)) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
          if (in_plateau[n] || suppressed[n] || data[n] != level) continue;
          if ((Point2(nx, ny) - Point2(sx, sy)).squaredNorm() > r2) continue;
          in_plateau[n] = true;
          stack.push_back(n);
        }
    }
    Point2 centroid = Point2::Zero();
    for (std::size_t p : plateau) {
      centroid += Point2(static_cast<double>(p % w), static_cast<double>(p / w));
      in_plateau[p] = false;
      suppressed[p] = true;
    }
    centroid /= static_cast<double>(plateau.size());
    const bool clear = std::none_of(peaks.begin(), peaks.end(), [&](const Point2 &q) {
      return (q - centroid).squaredNorm() <= r2;
    });
    if (!clear) continue;
    peaks.push_back(centroid);
    suppress_around(centroid);
  }
  return peaks;
}

InstanceMask instance_mask_label(const RoadGraph &g, const Point2 &from, const Point2 &to,
                                 const RoiWindow &win, double thickness) {
  InstanceMask out{GridMap(win.size, win.size), false};
  if (g.num_edges() == 0) return out;
  const auto path = shortest_path(g, project_point(g, from), project_point(g, to));
  if (!path) return out;
  out.reachable = true;
  out.mask = rasterize_polyline(*path, win.size, win.size, thickness, win.x0(), win.y0());
  return out;
}

}  // namespace roadtrace
