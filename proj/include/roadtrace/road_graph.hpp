#pragma once

#include "roadtrace/geometry.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace roadtrace {

inline constexpr double kMergeEpsilon = 1e-6;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Undirected edge, stored with a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;

  friend bool operator==(const Edge &, const Edge &) = default;
};

// A point on a graph edge. `point` is lerp(edge.a, edge.b, t).
struct GraphLocation {
  std::size_t edge = 0;
  double t = 0.0;
  Point2 point = Point2::Zero();
};

// Undirected road network embedded in pixel space.
//
// Construction normalizes the input: vertices closer than `merge_epsilon`
// collapse onto the lowest-indexed one (order of survivors is preserved),
// edges are stored as (min, max), and self-loops and duplicate edges are
// dropped. Edge indices outside the vertex list and non-finite coordinates
// throw std::invalid_argument. The graph is immutable afterwards.
class RoadGraph {
 public:
  RoadGraph() = default;
  RoadGraph(std::vector<Point2> vertices,
            const std::vector<std::pair<std::size_t, std::size_t>> &edges,
            double merge_epsilon = kMergeEpsilon);

  // Builds a graph from loose segments; shared endpoints are merged.
  static RoadGraph from_segments(const std::vector<std::pair<Point2, Point2>> &segments,
                                 double merge_epsilon = kMergeEpsilon);

  const std::vector<Point2> &vertices() const { return vertices_; }
  const std::vector<Edge> &edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  bool empty() const { return vertices_.empty(); }

  const Point2 &vertex(std::size_t v) const { return vertices_[v]; }
  const Edge &edge(std::size_t e) const { return edges_[e]; }

  // Edge ids incident to vertex v, in ascending order.
  std::span<const std::size_t> incident(std::size_t v) const {
    return {incident_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t other_end(std::size_t e, std::size_t v) const {
    return edges_[e].a == v ? edges_[e].b : edges_[e].a;
  }

  double edge_length(std::size_t e) const { return lengths_[e]; }
  double total_length() const;
  std::size_t max_degree() const;

  // Tile extent carried through serialization; 0 when unknown.
  int width = 0;
  int height = 0;

  // Same vertex coordinates (bitwise) in the same order and same edge list.
  friend bool operator==(const RoadGraph &lhs, const RoadGraph &rhs);

 private:
  void build_adjacency();

  std::vector<Point2> vertices_;
  std::vector<Edge> edges_;
  std::vector<double> lengths_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> incident_;
};

GraphLocation make_location(const RoadGraph &g, std::size_t edge, double t);

// Location of vertex v on its lowest-indexed incident edge. Requires degree > 0.
GraphLocation vertex_location(const RoadGraph &g, std::size_t v);

// Splits every edge longer than `spacing` into ceil(len / spacing) equal
// parts. Original vertices keep their indices; new ones are appended.
RoadGraph densify(const RoadGraph &g, double spacing);

// Closest point on any edge. Ties go to the lowest edge index.
// Throws std::domain_error if g has no edges.
GraphLocation project_point(const RoadGraph &g, const Point2 &p);

// Single-source shortest paths from a location. `dist[v]` is kUnreachable for
// vertices in other components or beyond `limit`; `parent[v]` is the previous
// vertex on the path, or -1 when v is reached directly from the source edge.
struct ShortestPaths {
  std::vector<double> dist;
  std::vector<long> parent;
};
ShortestPaths shortest_paths_from(const RoadGraph &g, const GraphLocation &source,
                                  double limit = kUnreachable);

// Distance from the source of `paths` to a location `target`.
double distance_to(const RoadGraph &g, const GraphLocation &source,
                   const ShortestPaths &paths, const GraphLocation &target);

// Length of the shortest path along edges, nullopt if disconnected.
std::optional<double> graph_distance(const RoadGraph &g, const GraphLocation &a,
                                     const GraphLocation &b);

// Polyline of the shortest path from a to b (starts at a.point, ends at
// b.point), nullopt if disconnected.
std::optional<std::vector<Point2>> shortest_path(const RoadGraph &g,
                                                 const GraphLocation &a,
                                                 const GraphLocation &b);

// All points within graph distance `radius` of seed, with edges clipped at
// exactly that distance. Throws std::invalid_argument if radius <= 0.
RoadGraph subgraph_within(const RoadGraph &g, const GraphLocation &seed,
                          double radius);

// Component label per vertex; labels are dense and ordered by lowest vertex.
std::vector<std::size_t> connected_components(const RoadGraph &g);

// Vertices that anchor tracing: degree >= 3 first, then degree-1 ends (when
// `include_ends`), each group in row-major order of position. A component
// with no such vertex (a pure cycle) contributes its lowest-indexed vertex.
std::vector<std::size_t> key_vertices(const RoadGraph &g, bool include_ends = true);

}  // namespace roadtrace
