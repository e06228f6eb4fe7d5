#pragma once

#include "roadtrace/expert.hpp"
#include "roadtrace/grid_map.hpp"
#include "roadtrace/predictor.hpp"
#include "roadtrace/raster.hpp"
#include "roadtrace/road_graph.hpp"

#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace roadtrace {

// FIFO of initial candidates. Popping an empty buffer is not an error; it
// signals that tracing is finished.
class CandidateBuffer {
 public:
  void push(const Point2 &p) { queue_.push_back(p); }
  std::optional<Point2> pop() {
    if (queue_.empty()) return std::nullopt;
    Point2 p = queue_.front();
    queue_.pop_front();
    return p;
  }
  bool empty() const { return queue_.empty(); }
  std::size_t size() const { return queue_.size(); }
  std::vector<Point2> snapshot() const { return {queue_.begin(), queue_.end()}; }

 private:
  std::deque<Point2> queue_;
};

struct EngineConfig {
  double prob_threshold = 0.5;
  int roi_size = 128;
  int n_queries = 10;
  double snap_radius = 5.0;
  // 0 selects roi_size/2 - 1.
  double max_step = 0.0;
  // 0 selects 4 * tile area / expected_step^2.
  std::size_t max_steps = 0;
  double expected_step = 20.0;
  double history_thickness = 1.0;
  PeakParams peaks;
  // Push the agent position back into the buffer after a predictor failure.
  bool reseed_on_failure = false;

  double effective_max_step() const { return max_step > 0.0 ? max_step : roi_size / 2.0 - 1.0; }
  std::size_t effective_max_steps(int width, int height) const;
  void validate() const;
};

// Output graph under construction, with a spatial hash for snapping.
class GraphBuilder {
 public:
  explicit GraphBuilder(double cell = 8.0) : cell_(cell) {}

  // Nearest vertex within `radius` of p (lowest id on ties), else a new vertex.
  std::size_t snap_or_insert(const Point2 &p, double radius);
  std::optional<std::size_t> nearest_within(const Point2 &p, double radius) const;

  bool connected(std::size_t a, std::size_t b) const;
  // Adds an undirected edge; false for self-loops and existing edges.
  bool add_edge(std::size_t a, std::size_t b);

  const Point2 &vertex(std::size_t v) const { return vertices_[v]; }
  std::size_t num_vertices() const { return vertices_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>> &edges() const { return edges_; }
  RoadGraph build(int width = 0, int height = 0) const;

 private:
  std::pair<long, long> cell_of(const Point2 &p) const;

  double cell_;
  std::vector<Point2> vertices_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::unordered_map<long long, std::vector<std::size_t>> grid_;
};

struct StepRecord {
  std::size_t step = 0;
  Point2 position = Point2::Zero();
  std::size_t valid = 0;  // M
  AgentAction action = AgentAction::Stop;
  std::vector<Point2> pushed;
  std::optional<Point2> popped;
  std::size_t edges_added = 0;
  std::string error;
};

std::string to_json_line(const StepRecord &r);

struct RunReport {
  std::size_t steps = 0;
  std::size_t traces = 0;
  std::size_t seeds = 0;
  std::size_t predictor_failures = 0;
  std::size_t dropped_candidates = 0;
  bool forced_termination = false;
  std::size_t vertices = 0;
  std::size_t edges = 0;
};

// Seeds the buffer with local peaks of the key-point heatmap, in emission order.
CandidateBuffer seed_buffer(const GridMap &heatmap, const EngineConfig &cfg);

// Key-point heatmap for a whole tile from a predictor's per-ROI maps: ROIs
// on a half-overlapping grid with an empty history, merged by maximum.
// Throws PredictorError if the predictor returns no key-point maps.
GridMap scan_heatmap(const GridMap &aerial, Predictor &predictor, const EngineConfig &cfg);

// The tracing loop for one tile.
class TracingAgent {
 public:
  TracingAgent(const GridMap &aerial, Predictor &predictor, EngineConfig cfg,
               CandidateBuffer seeds);
  // The aerial tile is held by reference and must outlive the agent.
  TracingAgent(GridMap &&, Predictor &, EngineConfig, CandidateBuffer) = delete;

  // One predictor query and the resulting buffer/graph update. Returns false
  // once tracing has terminated.
  bool step();
  bool finished() const { return finished_; }

  const GraphBuilder &builder() const { return builder_; }
  const GridMap &history() const { return history_; }
  const CandidateBuffer &buffer() const { return buffer_; }
  const std::vector<StepRecord> &log() const { return log_; }
  // Step index that created each output edge, parallel to builder().edges().
  const std::vector<std::size_t> &provenance() const { return provenance_; }
  const RunReport &report() const { return report_; }
  std::optional<Point2> position() const;

 private:
  bool begin_trace(StepRecord &rec);
  void add_edge(std::size_t from, std::size_t to, StepRecord &rec);

  const GridMap &aerial_;
  Predictor &predictor_;
  EngineConfig cfg_;
  CandidateBuffer buffer_;
  GraphBuilder builder_;
  GridMap history_;
  std::optional<std::size_t> current_;
  std::vector<StepRecord> log_;
  std::vector<std::size_t> provenance_;
  RunReport report_;
  std::size_t max_steps_ = 0;
  bool finished_ = false;
};

struct RunResult {
  RoadGraph graph;
  RunReport report;
  std::vector<StepRecord> trace;
  GridMap history;
};

RunResult run(const GridMap &aerial, const GridMap &heatmap, Predictor &predictor,
              const EngineConfig &cfg);

}  // namespace roadtrace
