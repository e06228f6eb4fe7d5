#include "roadtrace/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace roadtrace {

namespace {

struct CellKey {
  long long x;
  long long y;
  bool operator==(const CellKey &) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey &k) const noexcept {
    return std::hash<long long>()(k.x * 73856093LL ^ k.y * 19349663LL);
  }
};

// Maps each input vertex to its surviving index.
std::vector<std::size_t> merge_close_vertices(const std::vector<Point2> &in,
                                              double eps,
                                              std::vector<Point2> &out) {
  std::vector<std::size_t> remap(in.size());
  const double cell = std::max(eps, 1e-12);
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  grid.reserve(in.size());
  const double eps2 = eps * eps;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Point2 &p = in[i];
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw std::invalid_argument("vertex " + std::to_string(i) +
                                  " has a non-finite coordinate");
    const CellKey key{static_cast<long long>(std::floor(p.x() / cell)),
                      static_cast<long long>(std::floor(p.y() / cell))};
    std::size_t found = out.size();
    for (long long dx = -1; dx <= 1 && found == out.size(); ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({key.x + dx, key.y + dy});
        if (it == grid.end()) continue;
        for (std::size_t cand : it->second)
          if ((out[cand] - p).squaredNorm() < eps2 && cand < found) found = cand;
      }
    if (found == out.size()) {
      out.push_back(p);
      grid[key].push_back(found);
    }
    remap[i] = found;
  }
  return remap;
}

}  // namespace

RoadGraph::RoadGraph(std::vector<Point2> vertices,
                     const std::vector<std::pair<std::size_t, std::size_t>> &edges,
                     double merge_epsilon) {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].first >= vertices.size() || edges[e].second >= vertices.size())
      throw std::invalid_argument("edge " + std::to_string(e) +
                                  " references a vertex out of range");
  }
  const auto remap = merge_close_vertices(vertices, merge_epsilon, vertices_);
  std::unordered_set<std::uint64_t> seen;
  for (const auto &[i, j] : edges) {
    std::size_t a = remap[i], b = remap[j];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (!seen.insert(key).second) continue;
    edges_.push_back({a, b});
  }
  build_adjacency();
}

RoadGraph RoadGraph::from_segments(
    const std::vector<std::pair<Point2, Point2>> &segments, double merge_epsilon) {
  std::vector<Point2> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  vertices.reserve(segments.size() * 2);
  for (const auto &[p, q] : segments) {
    vertices.push_back(p);
    vertices.push_back(q);
    edges.emplace_back(vertices.size() - 2, vertices.size() - 1);
  }
  return RoadGraph(std::move(vertices), edges, merge_epsilon);
}

void RoadGraph::build_adjacency() {
  const std::size_t n = vertices_.size();
  offsets_.assign(n + 1, 0);
  lengths_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    ++offsets_[edges_[e].a + 1];
    ++offsets_[edges_[e].b + 1];
    lengths_[e] = (vertices_[edges_[e].a] - vertices_[edges_[e].b]).norm();
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  incident_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incident_[fill[edges_[e].a]++] = e;
    incident_[fill[edges_[e].b]++] = e;
  }
}

double RoadGraph::total_length() const {
  return std::accumulate(lengths_.begin(), lengths_.end(), 0.0);
}

std::size_t RoadGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < vertices_.size(); ++v) best = std::max(best, degree(v));
  return best;
}

bool operator==(const RoadGraph &lhs, const RoadGraph &rhs) {
  if (lhs.vertices_.size() != rhs.vertices_.size() || lhs.edges_ != rhs.edges_)
    return false;
  for (std::size_t i = 0; i < lhs.vertices_.size(); ++i)
    if (lhs.vertices_[i] != rhs.vertices_[i]) return false;
  return true;
}

GraphLocation make_location(const RoadGraph &g, std::size_t edge, double t) {
  const Edge &e = g.edge(edge);
  return {edge, t, lerp(g.vertex(e.a), g.vertex(e.b), t)};
}

GraphLocation vertex_location(const RoadGraph &g, std::size_t v) {
  if (g.degree(v) == 0) throw std::invalid_argument("isolated vertex has no location");
  const std::size_t e = g.incident(v).front();
  return make_location(g, e, g.edge(e).a == v ? 0.0 : 1.0);
}

RoadGraph densify(const RoadGraph &g, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("densify spacing must be positive");
  std::vector<Point2> vertices = g.vertices();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge &ed = g.edge(e);
    const double len = g.edge_length(e);
    const auto parts = static_cast<std::size_t>(std::ceil(len / spacing));
    if (parts <= 1) {
      edges.emplace_back(ed.a, ed.b);
      continue;
    }
    std::size_t prev = ed.a;
    for (std::size_t k = 1; k < parts; ++k) {
      vertices.push_back(lerp(g.vertex(ed.a), g.vertex(ed.b),
                              static_cast<double>(k) / static_cast<double>(parts)));
      edges.emplace_back(prev, vertices.size() - 1);
      prev = vertices.size() - 1;
    }
    edges.emplace_back(prev, ed.b);
  }
  // Subdivision points are distinct by construction; a zero epsilon keeps
  // topology intact even where unrelated edges pass close to each other.
  RoadGraph out(std::move(vertices), edges, 0.0);
  out.width = g.width;
  out.height = g.height;
  return out;
}

GraphLocation project_point(const RoadGraph &g, const Point2 &p) {
  if (g.num_edges() == 0) throw std::domain_error("cannot project onto a graph without edges");
  std::size_t best_edge = 0;
  double best_t = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Point2 &a = g.vertex(g.edge(e).a);
    const Point2 &b = g.vertex(g.edge(e).b);
    const double t = closest_parameter(a, b, p);
    const double d2 = (p - lerp(a, b, t)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_edge = e;
      best_t = t;
    }
  }
  return make_location(g, best_edge, best_t);
}

ShortestPaths shortest_paths_from(const RoadGraph &g, const GraphLocation &source,
                                  double limit) {
  ShortestPaths out;
  out.dist.assign(g.num_vertices(), kUnreachable);
  out.parent.assign(g.num_vertices(), -1);
  if (g.num_edges() == 0) return out;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const Edge &se = g.edge(source.edge);
  const double len = g.edge_length(source.edge);
  const double to_a = source.t * len;
  const double to_b = (1.0 - source.t) * len;
  if (to_a <= limit) {
    out.dist[se.a] = to_a;
    heap.push({to_a, se.a});
  }
  if (to_b <= limit && to_b < out.dist[se.b]) {
    out.dist[se.b] = to_b;
    heap.push({to_b, se.b});
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > out.dist[v]) continue;
    for (std::size_t e : g.incident(v)) {
      const std::size_t w = g.other_end(e, v);
      const double nd = d + g.edge_length(e);
      if (nd < out.dist[w] && nd <= limit) {
        out.dist[w] = nd;
        out.parent[w] = static_cast<long>(v);
        heap.push({nd, w});
      }
    }
  }
  return out;
}

double distance_to(const RoadGraph &g, const GraphLocation &source,
                   const ShortestPaths &paths, const GraphLocation &target) {
  const Edge &te = g.edge(target.edge);
  const double len = g.edge_length(target.edge);
  double best = std::min(paths.dist[te.a] + target.t * len,
                         paths.dist[te.b] + (1.0 - target.t) * len);
  if (source.edge == target.edge) best = std::min(best, std::abs(source.t - target.t) * len);
  return best;
}

std::optional<double> graph_distance(const RoadGraph &g, const GraphLocation &a,
                                     const GraphLocation &b) {
  const auto paths = shortest_paths_from(g, a);
  const double d = distance_to(g, a, paths, b);
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

std::optional<std::vector<Point2>> shortest_path(const RoadGraph &g,
                                                 const GraphLocation &a,
                                                 const GraphLocation &b) {
  const auto paths = shortest_paths_from(g, a);
  const Edge &te = g.edge(b.edge);
  const double len = g.edge_length(b.edge);
  const double via_a = paths.dist[te.a] + b.t * len;
  const double via_b = paths.dist[te.b] + (1.0 - b.t) * len;
  const double direct =
      a.edge == b.edge ? std::abs(a.t - b.t) * len : kUnreachable;
  const double best = std::min({via_a, via_b, direct});
  if (!std::isfinite(best)) return std::nullopt;
  if (direct <= best) return std::vector<Point2>{a.point, b.point};
  std::vector<Point2> reversed{b.point};
  long v = static_cast<long>(via_a <= via_b ? te.a : te.b);
  while (v >= 0) {
    reversed.push_back(g.vertex(static_cast<std::size_t>(v)));
    v = paths.parent[static_cast<std::size_t>(v)];
  }
  reversed.push_back(a.point);
  return std::vector<Point2>(reversed.rbegin(), reversed.rend());
}

RoadGraph subgraph_within(const RoadGraph &g, const GraphLocation &seed,
                          double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("subgraph radius must be positive");
  const auto paths = shortest_paths_from(g, seed, radius);
  std::vector<std::pair<Point2, Point2>> pieces;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge &ed = g.edge(e);
    const double len = g.edge_length(e);
    if (len <= 0.0) continue;
    // Arc-length intervals [lo, hi] reachable within radius.
    std::vector<std::pair<double, double>> spans;
    if (std::isfinite(paths.dist[ed.a]))
      spans.emplace_back(0.0, std::min(len, radius - paths.dist[ed.a]));
    if (std::isfinite(paths.dist[ed.b]))
      spans.emplace_back(std::max(0.0, len - (radius - paths.dist[ed.b])), len);
    if (e == seed.edge) {
      const double s0 = seed.t * len;
      spans.emplace_back(std::max(0.0, s0 - radius), std::min(len, s0 + radius));
    }
    std::sort(spans.begin(), spans.end());
    // Spans that touch up to rounding are joined, so tiny changes in the
    // seed position cannot split an edge into two pieces.
    std::vector<std::pair<double, double>> merged;
    for (const auto &s : spans) {
      if (s.second < s.first) continue;
      if (!merged.empty() && s.first <= merged.back().second + 1e-9)
        merged.back().second = std::max(merged.back().second, s.second);
      else
        merged.push_back(s);
    }
    const Point2 &pa = g.vertex(ed.a);
    const Point2 &pb = g.vertex(ed.b);
    for (const auto &[lo, hi] : merged) {
      if (hi - lo <= 1e-9) continue;
      const Point2 p = lo <= 0.0 ? pa : lerp(pa, pb, lo / len);
      const Point2 q = hi >= len ? pb : lerp(pa, pb, hi / len);
      pieces.emplace_back(p, q);
    }
  }
  RoadGraph out = RoadGraph::from_segments(pieces);
  out.width = g.width;
  out.height = g.height;
  return out;
}

std::vector<std::size_t> connected_components(const RoadGraph &g) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(g.num_vertices(), kNone);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.num_vertices(); ++s) {
    if (label[s] != kNone) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t e : g.incident(v)) {
        const std::size_t w = g.other_end(e, v);
        if (label[w] == kNone) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

std::vector<std::size_t> key_vertices(const RoadGraph &g, bool include_ends) {
  const auto row_major = [&](std::size_t i, std::size_t j) {
    const Point2 &p = g.vertex(i);
    const Point2 &q = g.vertex(j);
    if (p.y() != q.y()) return p.y() < q.y();
    if (p.x() != q.x()) return p.x() < q.x();
    return i < j;
  };
  std::vector<std::size_t> junctions, ends;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) >= 3) junctions.push_back(v);
    else if (g.degree(v) == 1) ends.push_back(v);
  }
  std::sort(junctions.begin(), junctions.end(), row_major);
  std::sort(ends.begin(), ends.end(), row_major);

  const auto comp = connected_components(g);
  std::vector<bool> anchored(g.num_vertices(), false);
  for (std::size_t v : junctions) anchored[comp[v]] = true;
  if (include_ends)
    for (std::size_t v : ends) anchored[comp[v]] = true;

  std::vector<std::size_t> out = junctions;
  if (include_ends) out.insert(out.end(), ends.begin(), ends.end());
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) == 0 || anchored[comp[v]]) continue;
    anchored[comp[v]] = true;
    out.push_back(v);
  }
  return out;
}

}  // namespace roadtrace
