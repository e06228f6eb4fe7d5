#include "roadtrace/engine.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace roadtrace {

std::size_t EngineConfig::effective_max_steps(int width, int height) const {
  if (max_steps > 0) return max_steps;
  const double area = static_cast<double>(width) * static_cast<double>(height);
  return std::max<std::size_t>(
      64, static_cast<std::size_t>(4.0 * area / (expected_step * expected_step)));
}

void EngineConfig::validate() const {
  if (!(prob_threshold > 0.0 && prob_threshold < 1.0))
    throw std::invalid_argument("prob_threshold must lie in (0, 1)");
  if (roi_size < 32 || roi_size % 2 != 0)
    throw std::invalid_argument("roi_size must be even and at least 32");
  if (!(snap_radius >= 0.0 && snap_radius < roi_size / 4.0))
    throw std::invalid_argument("snap_radius must lie in [0, roi_size/4)");
  if (n_queries < 1) throw std::invalid_argument("n_queries must be positive");
  if (!(expected_step > 0.0)) throw std::invalid_argument("expected_step must be positive");
}

std::pair<long, long> GraphBuilder::cell_of(const Point2 &p) const {
  return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_))};
}

namespace {
long long cell_key(long x, long y) {
  return (static_cast<long long>(x) << 32) ^ static_cast<long long>(static_cast<std::uint32_t>(y));
}
}  // namespace

std::optional<std::size_t> GraphBuilder::nearest_within(const Point2 &p, double radius) const {
  std::optional<std::size_t> best;
  double best_d2 = 0.0;
  const double r2 = radius * radius;
  const long x0 = static_cast<long>(std::floor((p.x() - radius) / cell_));
  const long x1 = static_cast<long>(std::floor((p.x() + radius) / cell_));
  const long y0 = static_cast<long>(std::floor((p.y() - radius) / cell_));
  const long y1 = static_cast<long>(std::floor((p.y() + radius) / cell_));
  for (long cx = x0; cx <= x1; ++cx)
    for (long cy = y0; cy <= y1; ++cy) {
      auto it = grid_.find(cell_key(cx, cy));
      if (it == grid_.end()) continue;
      for (std::size_t v : it->second) {
        const double d2 = (vertices_[v] - p).squaredNorm();
        if (d2 > r2) continue;
        if (!best || d2 < best_d2 || (d2 == best_d2 && v < *best)) {
          best_d2 = d2;
          best = v;
        }
      }
    }
  return best;
}

std::size_t GraphBuilder::snap_or_insert(const Point2 &p, double radius) {
  if (auto hit = nearest_within(p, radius)) return *hit;
  vertices_.push_back(p);
  neighbors_.emplace_back();
  const auto [cx, cy] = cell_of(p);
  grid_[cell_key(cx, cy)].push_back(vertices_.size() - 1);
  return vertices_.size() - 1;
}

bool GraphBuilder::connected(std::size_t a, std::size_t b) const {
  const auto &n = neighbors_[a];
  return std::find(n.begin(), n.end(), b) != n.end();
}

bool GraphBuilder::add_edge(std::size_t a, std::size_t b) {
  if (a == b || connected(a, b)) return false;
  neighbors_[a].push_back(b);
  neighbors_[b].push_back(a);
  edges_.emplace_back(std::min(a, b), std::max(a, b));
  return true;
}

RoadGraph GraphBuilder::build(int width, int height) const {
  RoadGraph g(vertices_, edges_, 0.0);
  g.width = width;
  g.height = height;
  return g;
}

std::string to_json_line(const StepRecord &r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["v_t"] = {r.position.x(), r.position.y()};
  j["M"] = r.valid;
  j["action"] = to_string(r.action);
  nlohmann::json pushed = nlohmann::json::array();
  for (const Point2 &p : r.pushed) pushed.push_back({p.x(), p.y()});
  j["pushed"] = std::move(pushed);
  j["popped"] = r.popped ? nlohmann::json{r.popped->x(), r.popped->y()} : nlohmann::json(nullptr);
  j["edges_added"] = r.edges_added;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

CandidateBuffer seed_buffer(const GridMap &heatmap, const EngineConfig &cfg) {
  CandidateBuffer buffer;
  for (const Point2 &p : local_peaks(heatmap, cfg.peaks)) buffer.push(p);
  return buffer;
}

GridMap scan_heatmap(const GridMap &aerial, Predictor &predictor, const EngineConfig &cfg) {
  cfg.validate();
  const int stride = cfg.roi_size / 2;
  std::vector<HeatmapTile> tiles;
  std::uint64_t id = 1ULL << 40;
  const GridMap blank(aerial.width(), aerial.height());
  for (long cy = stride; cy - stride < aerial.height(); cy += stride)
    for (long cx = stride; cx - stride < aerial.width(); cx += stride) {
      const RoiWindow win(cx, cy, cfg.roi_size);
      PredictorRequest req{id++, Point2(cx, cy), crop_roi(aerial, win), crop_roi(blank, win)};
      PredictorOutput out = predictor.predict(req);
      if (!out.intersection) throw PredictorError("predictor returned no key-point map");
      tiles.emplace_back(win, std::move(*out.intersection));
    }
  return merge_heatmaps(tiles, aerial.width(), aerial.height());
}

TracingAgent::TracingAgent(const GridMap &aerial, Predictor &predictor, EngineConfig cfg,
                           CandidateBuffer seeds)
    : aerial_(aerial),
      predictor_(predictor),
      cfg_(cfg),
      buffer_(std::move(seeds)),
      builder_(std::max(8.0, cfg.snap_radius)),
      history_(aerial.width(), aerial.height()) {
  cfg_.validate();
  report_.seeds = buffer_.size();
  max_steps_ = cfg_.effective_max_steps(aerial.width(), aerial.height());
  StepRecord unused;
  if (!begin_trace(unused)) finished_ = true;
}

std::optional<Point2> TracingAgent::position() const {
  if (!current_) return std::nullopt;
  return builder_.vertex(*current_);
}

bool TracingAgent::begin_trace(StepRecord &rec) {
  const auto seed = buffer_.pop();
  if (!seed) {
    current_.reset();
    return false;
  }
  current_ = builder_.snap_or_insert(*seed, cfg_.snap_radius);
  rec.popped = builder_.vertex(*current_);
  ++report_.traces;
  return true;
}

void TracingAgent::add_edge(std::size_t from, std::size_t to, StepRecord &rec) {
  builder_.add_edge(from, to);
  stroke_segment(history_, builder_.vertex(from), builder_.vertex(to), cfg_.history_thickness);
  provenance_.push_back(rec.step);
  ++rec.edges_added;
}

bool TracingAgent::step() {
  if (finished_) return false;
  if (report_.steps >= max_steps_) {
    spdlog::warn("tracing stopped after {} steps (max_steps)", report_.steps);
    report_.forced_termination = true;
    finished_ = true;
    return false;
  }
  StepRecord rec;
  rec.step = report_.steps++;
  const std::size_t cur = *current_;
  const Point2 v = builder_.vertex(cur);
  rec.position = v;

  const RoiWindow win = RoiWindow::centered_at(v, cfg_.roi_size);
  PredictorRequest req{rec.step, v, crop_roi(aerial_, win), crop_roi(history_, win)};
  std::vector<Point2> targets;
  try {
    const PredictorOutput out = predictor_.predict(req);
    validate_output(out, cfg_.n_queries, cfg_.roi_size);
    for (const Candidate &c : out.candidates)
      if (c.probability >= cfg_.prob_threshold && c.offset.norm() <= cfg_.effective_max_step())
        targets.push_back(v + c.offset);
    rec.valid = targets.size();
    rec.action = action_for(targets.size());
  } catch (const std::exception &err) {
    ++report_.predictor_failures;
    rec.action = AgentAction::Failure;
    rec.error = err.what();
    spdlog::warn("step {}: predictor failure at ({:.1f}, {:.1f}): {}", rec.step, v.x(), v.y(), err.what());
    if (cfg_.reseed_on_failure) buffer_.push(v);
  }

  bool keep_tracing = false;
  if (rec.action == AgentAction::Move) {
    const std::size_t w = builder_.snap_or_insert(targets.front(), cfg_.snap_radius);
    if (w != cur && !builder_.connected(cur, w)) {
      add_edge(cur, w, rec);
      current_ = w;
      keep_tracing = true;
    } else {
      ++report_.dropped_candidates;
    }
  } else if (rec.action == AgentAction::Branch) {
    for (const Point2 &t : targets) {
      const std::size_t w = builder_.snap_or_insert(t, cfg_.snap_radius);
      if (w == cur || builder_.connected(cur, w)) {
        ++report_.dropped_candidates;
        continue;
      }
      add_edge(cur, w, rec);
      buffer_.push(builder_.vertex(w));
      rec.pushed.push_back(builder_.vertex(w));
    }
  }
  if (!keep_tracing && !begin_trace(rec)) finished_ = true;
#ifndef NDEBUG
  // H must always be the output graph drawn at history thickness.
  if (history_ != rasterize_graph(builder_.build(), history_.width(), history_.height(), cfg_.history_thickness))
    throw std::logic_error("historical map diverged from the output graph");
#endif
  log_.push_back(std::move(rec));
  report_.vertices = builder_.num_vertices();
  report_.edges = builder_.edges().size();
  return !finished_;
}

RunResult run(const GridMap &aerial, const GridMap &heatmap, Predictor &predictor,
              const EngineConfig &cfg) {
  if (heatmap.width() != aerial.width() || heatmap.height() != aerial.height())
    throw std::invalid_argument("heatmap and aerial tile dimensions differ");
  TracingAgent agent(aerial, predictor, cfg, seed_buffer(heatmap, cfg));
  while (agent.step()) {
  }
  RunResult result;
  result.graph = agent.builder().build(aerial.width(), aerial.height());
  result.report = agent.report();
  result.trace = agent.log();
  result.history = agent.history();
  return result;
}

}  // namespace roadtrace
