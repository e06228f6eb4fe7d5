#pragma once
// Shared helpers and independent reference implementations for the tests.

#include "roadtrace/grid_map.hpp"
#include "roadtrace/predictor.hpp"
#include "roadtrace/road_graph.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace testutil {

using roadtrace::GridMap;
using roadtrace::Point2;
using roadtrace::RoadGraph;

inline RoadGraph graph(std::vector<Point2> v, std::vector<std::pair<std::size_t, std::size_t>> e,
                       int w = 0, int h = 0) {
  RoadGraph g(std::move(v), e);
  g.width = w;
  g.height = h;
  return g;
}

inline RoadGraph line(double x0, double y0, double x1, double y1) {
  return graph({{x0, y0}, {x1, y1}}, {{0, 1}});
}

// Plus sign centered at c with arms of length `arm`.
inline RoadGraph plus(Point2 c, double arm) {
  return graph({c, c + Point2(arm, 0), c + Point2(-arm, 0), c + Point2(0, arm), c + Point2(0, -arm)},
               {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
}

// Random graph with `n` vertices in [margin, size-margin]^2 and a random
// spanning forest plus a few extra edges. Edges may cross.
inline RoadGraph random_graph(std::mt19937_64 &rng, std::size_t n, int size, double margin = 4.0,
                              std::size_t extra = 2) {
  std::uniform_real_distribution<double> c(margin, size - margin);
  std::vector<Point2> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back(c(rng), c(rng));
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    e.emplace_back(pick(rng), i);
  }
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) e.emplace_back(any(rng), any(rng));
  return graph(std::move(v), e, size, size);
}

// Straightforward point-segment distance, written independently of the
// library's geometry helpers.
inline double seg_dist(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Per-pixel oracle: set iff the pixel center is within thickness/2 of an edge.
inline GridMap brute_raster(const RoadGraph &g, int w, int h, double thickness) {
  GridMap m(w, h);
  const double r = thickness / 2.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto &e : g.edges()) {
        const Point2 &a = g.vertex(e.a), &b = g.vertex(e.b);
        // Compare squared distances as the definition does, to avoid a
        // rounding disagreement exactly on the boundary.
        const double d = seg_dist(x, y, a.x(), a.y(), b.x(), b.y());
        if (d * d <= r * r + 1e-12 && d <= r + 1e-9) {
          m.at(x, y) = 255;
          break;
        }
      }
  return m;
}

inline GridMap brute_discs(const std::vector<Point2> &centers, int w, int h, double radius) {
  GridMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const Point2 &c : centers)
        if ((x - c.x()) * (x - c.x()) + (y - c.y()) * (y - c.y()) <= radius * radius) {
          m.at(x, y) = 255;
          break;
        }
  return m;
}

// Minimum over all permutations assigning every row of a square matrix.
inline double brute_assignment(const Eigen::MatrixXd &c) {
  std::vector<int> perm(static_cast<std::size_t>(c.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(static_cast<long>(i), perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::size_t differing_pixels(const GridMap &a, const GridMap &b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) n += a.data()[i] != b.data()[i];
  return n;
}

// Replays a fixed list of answers (offsets with p = 0.9), then answers
// "nothing ahead" forever. Records every request center.
class ScriptedPredictor : public roadtrace::Predictor {
 public:
  ScriptedPredictor(std::vector<std::vector<Point2>> script, int n_queries = 10)
      : script_(std::move(script)), n_(n_queries) {}

  roadtrace::PredictorOutput predict(const roadtrace::PredictorRequest &req) override {
    centers.push_back(req.center);
    roadtrace::PredictorOutput out;
    out.candidates.resize(static_cast<std::size_t>(n_));
    if (next_ < script_.size()) {
      const auto &offsets = script_[next_++];
      for (std::size_t i = 0; i < offsets.size(); ++i) {
        out.candidates[i].offset = offsets[i];
        out.candidates[i].probability = 0.9;
      }
    }
    return out;
  }

  std::vector<Point2> centers;

 private:
  std::vector<std::vector<Point2>> script_;
  std::size_t next_ = 0;
  int n_;
};

}  // namespace testutil
