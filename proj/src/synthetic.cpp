#include "roadtrace/synthetic.hpp"

#include "roadtrace/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace roadtrace {

namespace {

constexpr double kPi = std::numbers::pi;

RoadGraph make_grid(const SyntheticSpec &s, std::mt19937_64 &rng) {
  if (s.rows < 2 || s.cols < 2) throw std::invalid_argument("grid needs at least 2 rows and 2 columns");
  std::uniform_real_distribution<double> j(-s.jitter, s.jitter);
  const double margin = 40.0;
  const double dx = (s.width - 2 * margin) / (s.cols - 1);
  const double dy = (s.height - 2 * margin) / (s.rows - 1);
  std::vector<Point2> v;
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) v.emplace_back(margin + c * dx + j(rng), margin + r * dy + j(rng));
  std::vector<std::pair<std::size_t, std::size_t>> e;
  const auto id = [&](int r, int c) { return static_cast<std::size_t>(r * s.cols + c); };
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) {
      if (c + 1 < s.cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < s.rows) e.emplace_back(id(r, c), id(r + 1, c));
    }
  return RoadGraph(std::move(v), e);
}

RoadGraph make_ring(const SyntheticSpec &s, std::mt19937_64 &rng) {
  if (s.spokes < 0 || s.spokes > 6 || s.spokes == 1 || s.spokes == 2)
    throw std::invalid_argument("ring spokes must be 0 or 3..6");
  const Point2 c(s.width / 2.0, s.height / 2.0);
  const double radius = 0.4 * std::min(s.width, s.height);
  const int segments = 24;
  const double phase = std::uniform_real_distribution<double>(0.0, 2 * kPi / segments)(rng);
  std::vector<Point2> v;
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (int i = 0; i < segments; ++i) {
    const double a = phase + 2 * kPi * i / segments;
    v.push_back(c + radius * Point2(std::cos(a), std::sin(a)));
    e.emplace_back(i, (i + 1) % segments);
  }
  if (s.spokes > 0) {
    v.push_back(c);
    const std::size_t hub = v.size() - 1;
    for (int k = 0; k < s.spokes; ++k) {
      // Spoke k ends on ring vertex round(k * segments / spokes); long spokes
      // get an intermediate vertex so the hub is not the only key point.
      const std::size_t rim = static_cast<std::size_t>(k * segments / s.spokes);
      v.push_back(0.5 * (c + v[rim]));
      e.emplace_back(hub, v.size() - 1);
      e.emplace_back(v.size() - 1, rim);
    }
  }
  return RoadGraph(std::move(v), e);
}

double angle_between(const Point2 &a, const Point2 &b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
}

double segment_gap(const Point2 &a, const Point2 &b, const Point2 &c, const Point2 &d) {
  // Non-crossing segments are closest at an endpoint; crossing ones return 0.
  const auto cross = [](const Point2 &u, const Point2 &v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
  return std::min({distance_to_segment(a, b, c), distance_to_segment(a, b, d),
                   distance_to_segment(c, d, a), distance_to_segment(c, d, b)});
}

RoadGraph make_tree(const SyntheticSpec &s, std::mt19937_64 &rng) {
  if (s.nodes < 2) throw std::invalid_argument("tree needs at least 2 nodes");
  if (s.max_degree < 2 || s.max_degree > 6) throw std::invalid_argument("tree max_degree must lie in [2, 6]");
  const double margin = 30.0, clearance = 30.0, min_angle = 40.0 * kPi / 180.0;
  std::uniform_real_distribution<double> len(60.0, 110.0), ang(0.0, 2 * kPi);
  std::vector<Point2> v{Point2(s.width / 2.0, s.height / 2.0)};
  std::vector<std::pair<std::size_t, std::size_t>> e;
  std::vector<int> deg{0};
  for (int attempt = 0; attempt < 4000 && static_cast<int>(v.size()) < s.nodes; ++attempt) {
    // Favor the most recent vertices so branches extend instead of all
    // crowding the root.
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    const std::size_t p = attempt % 3 == 0 ? v.size() - 1 : pick(rng);
    if (deg[p] >= s.max_degree) continue;
    const double a = ang(rng);
    const Point2 q = v[p] + len(rng) * Point2(std::cos(a), std::sin(a));
    if (q.x() < margin || q.y() < margin || q.x() > s.width - margin || q.y() > s.height - margin) continue;
    bool ok = true;
    for (const auto &[x, y] : e) {
      if (x == p || y == p) {
        const Point2 other = v[x == p ? y : x] - v[p];
        if (angle_between(other, q - v[p]) < min_angle) ok = false;
      } else if (segment_gap(v[p], q, v[x], v[y]) < clearance) {
        ok = false;
      }
      if (!ok) break;
    }
    for (std::size_t u = 0; ok && u < v.size(); ++u)
      if (u != p && (v[u] - q).norm() < 2 * clearance) ok = false;
    if (!ok) continue;
    v.push_back(q);
    deg.push_back(1);
    ++deg[p];
    e.emplace_back(p, v.size() - 1);
  }
  return RoadGraph(std::move(v), e);
}

}  // namespace

const char *to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::Grid: return "grid";
    case SyntheticKind::Ring: return "ring";
    case SyntheticKind::Tree: return "tree";
  }
  return "?";
}

SyntheticKind synthetic_kind_from(const std::string &name) {
  if (name == "grid") return SyntheticKind::Grid;
  if (name == "ring") return SyntheticKind::Ring;
  if (name == "tree") return SyntheticKind::Tree;
  throw std::invalid_argument("unknown synthetic kind '" + name + "' (grid, ring, tree)");
}

RoadGraph make_synthetic(const SyntheticSpec &spec) {
  if (spec.width < 128 || spec.height < 128) throw std::invalid_argument("synthetic tiles must be at least 128 px");
  std::mt19937_64 rng(spec.seed);
  RoadGraph g;
  switch (spec.kind) {
    case SyntheticKind::Grid: g = make_grid(spec, rng); break;
    case SyntheticKind::Ring: g = make_ring(spec, rng); break;
    case SyntheticKind::Tree: g = make_tree(spec, rng); break;
  }
  g.width = spec.width;
  g.height = spec.height;
  return g;
}

GridMap synthetic_aerial(const RoadGraph &g, int width, int height, std::uint64_t seed, double road_width) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 12.0);
  GridMap img(width, height, 3);
  const GridMap roads = rasterize_graph(g, width, height, road_width);
  const auto sat = [](double x) { return static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0)); };
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double n = noise(rng);
      // Slow variation so the background is not flat.
      const double field = 20.0 * std::sin(x / 37.0) * std::cos(y / 53.0);
      if (roads.at(x, y)) {
        img.at(x, y, 0) = sat(150 + n);
        img.at(x, y, 1) = sat(150 + n);
        img.at(x, y, 2) = sat(155 + n);
      } else {
        img.at(x, y, 0) = sat(70 + field + n);
        img.at(x, y, 1) = sat(105 + field + n);
        img.at(x, y, 2) = sat(60 + field + n);
      }
    }
  return img;
}

std::vector<SyntheticCase> synthetic_suite(std::size_t count, std::uint64_t seed) {
  std::vector<SyntheticCase> out;
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticSpec s;
    s.seed = seed * 1000 + i;
    switch (i % 5) {
      case 0:
        s.kind = SyntheticKind::Grid;
        s.rows = 2 + static_cast<int>(i % 3);
        s.cols = 3 + static_cast<int>(i % 2);
        break;
      case 1:
        s.kind = SyntheticKind::Ring;
        s.spokes = std::array<int, 4>{0, 3, 4, 6}[i / 5 % 4];
        break;
      default:
        s.kind = SyntheticKind::Tree;
        s.nodes = 8 + static_cast<int>(i % 7);
        s.max_degree = 3 + static_cast<int>(i % 4);
        break;
    }
    SyntheticCase c{std::string(to_string(s.kind)) + "_" + std::to_string(i), s, make_synthetic(s)};
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace roadtrace
