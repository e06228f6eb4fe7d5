#pragma once

#include "roadtrace/grid_map.hpp"
#include "roadtrace/road_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace roadtrace {

// Per-edge record of the arc-length intervals already walked. Intervals only
// ever grow; an edge is fully visited once its single interval is [0, len].
class VisitedState {
 public:
  struct Interval {
    double lo;
    double hi;
  };

  VisitedState() = default;
  explicit VisitedState(const RoadGraph &g);

  // Marks arc-length range [lo, hi] of edge e.
  void mark(std::size_t e, double lo, double hi);

  const std::vector<Interval> &intervals(std::size_t e) const { return covered_[e]; }
  bool edge_visited(std::size_t e) const;
  bool covered_at(std::size_t e, double s) const;
  double covered_length() const;
  double total_length() const { return total_; }
  // Visited fraction of edge length; 1.0 for an empty graph.
  double fraction() const;

 private:
  std::vector<double> lengths_;
  std::vector<std::vector<Interval>> covered_;
  double total_ = 0.0;
};

struct WalkParams {
  // A direction must reach at least this much unwalked road to count.
  // Shorter slivers are marked visited silently.
  double min_unvisited = 1.0;
  // A start point this close (along its edge) to a junction or road end is
  // treated as that vertex.
  double junction_snap = 1.0;
};

// The expert policy. Projects `position` onto `g` and, for every incident
// direction that still has unvisited road, walks `step` pixels along the
// graph, stopping early at a vertex whose degree is not 2 or where the walk
// runs into road that was already visited. Returns one end point per walked
// direction and marks everything walked as visited.
std::vector<Point2> next_vertices_gt(const RoadGraph &g, VisitedState &visited,
                                     const Point2 &position, double step,
                                     const WalkParams &params = {});

struct ExpertConfig {
  double step_length = 20.0;
  double noise_amplitude = 6.0;
  int roi_size = 128;
  int max_queries = 10;
  std::uint64_t rng_seed = 0;
  double seg_thickness = 3.0;
  double history_thickness = 1.0;
  double disc_radius = 3.0;
  bool ends_as_keypoints = true;
  WalkParams walk;

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

enum class AgentAction { Stop, Move, Branch, Failure };
const char *to_string(AgentAction a);
AgentAction action_for(std::size_t valid_count);

struct TrajectoryStep {
  // Agent position used for the sample window; equals `expert_position`
  // before perturbation.
  Point2 position = Point2::Zero();
  Point2 expert_position = Point2::Zero();
  std::vector<Point2> next;
  std::vector<Point2> buffer;
  AgentAction action = AgentAction::Stop;
};

using Trajectory = std::vector<TrajectoryStep>;

// Runs the agent control flow over ground truth with the expert as a perfect
// predictor. The buffer is seeded with key_vertices(g). `visited_out`, when
// given, receives the final coverage over densify(g, step_length).
Trajectory bfs_traverse(const RoadGraph &g, const ExpertConfig &cfg,
                        VisitedState *visited_out = nullptr);

// Displaces each step's agent position by uniform noise in [-a, a] per axis.
// Label vertices stay where the expert put them (on the road); offsets and
// instance masks are later computed from the displaced position.
Trajectory perturb(const Trajectory &trajectory, double amplitude, std::uint64_t rng_seed);

struct SampleSetSummary {
  std::size_t samples = 0;
  std::size_t degree_violations = 0;
  double coverage = 0.0;
  std::filesystem::path manifest;
};

// Writes one training sample per trajectory step into `out_dir`:
// {k}_rgb.png, {k}_hist.png, {k}_seg.png, {k}_int.png, {k}_inst{i}.png and
// manifest.json. `extra` is copied into the manifest's "config" block.
SampleSetSummary emit_samples(const RoadGraph &g, const GridMap &aerial, const ExpertConfig &cfg,
                              const std::filesystem::path &out_dir, const std::string &tile_id,
                              const std::string &extra_json = "{}");

}  // namespace roadtrace
