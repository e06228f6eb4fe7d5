#include "roadtrace/expert.hpp"

#include "roadtrace/codec.hpp"
#include "roadtrace/raster.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <stdexcept>

namespace roadtrace {

namespace {

constexpr double kIntervalSnap = 1e-7;
constexpr double kStepEps = 1e-9;

struct Cursor {
  std::size_t edge;
  double s;
  bool forward;  // towards edge.b
};

struct Mark {
  std::size_t edge;
  double lo;
  double hi;
};

struct Walk {
  Point2 end = Point2::Zero();
  double unvisited = 0.0;
  std::vector<Mark> marks;
};

// Extent of the piece of edge starting at s in the walking direction that is
// uniformly visited or unvisited.
std::pair<bool, double> next_piece(const std::vector<VisitedState::Interval> &ivs, double s,
                                   bool forward, double end) {
  if (forward) {
    double next_lo = end;
    for (const auto &iv : ivs) {
      if (iv.lo <= s && s < iv.hi) return {true, std::min(iv.hi, end)};
      if (iv.lo > s) {
        next_lo = std::min(next_lo, iv.lo);
        break;
      }
    }
    return {false, next_lo};
  }
  double prev_hi = end;
  for (auto it = ivs.rbegin(); it != ivs.rend(); ++it) {
    if (it->lo < s && s <= it->hi) return {true, std::max(it->lo, end)};
    if (it->hi < s) {
      prev_hi = std::max(prev_hi, it->hi);
      break;
    }
  }
  return {false, prev_hi};
}

Point2 point_at(const RoadGraph &g, std::size_t e, double s) {
  const Edge &ed = g.edge(e);
  if (s <= 0.0) return g.vertex(ed.a);
  if (s >= g.edge_length(e)) return g.vertex(ed.b);
  return lerp(g.vertex(ed.a), g.vertex(ed.b), s / g.edge_length(e));
}

Walk walk(const RoadGraph &g, const VisitedState &visited, Cursor c, double budget) {
  Walk w;
  double remaining = budget;
  std::size_t hops = 0;
  while (true) {
    const double len = g.edge_length(c.edge);
    const double end = c.forward ? len : 0.0;
    while (c.s != end) {
      const auto [covered, boundary] = next_piece(visited.intervals(c.edge), c.s, c.forward, end);
      if (covered && w.unvisited > kStepEps) {
        w.end = point_at(g, c.edge, c.s);
        return w;
      }
      const double piece = std::abs(boundary - c.s);
      const double step = std::min(piece, remaining);
      const double ns = step == piece ? boundary : (c.forward ? c.s + step : c.s - step);
      w.marks.push_back({c.edge, std::min(c.s, ns), std::max(c.s, ns)});
      if (!covered) w.unvisited += step;
      remaining -= step;
      c.s = ns;
      if (remaining <= kStepEps) {
        w.end = point_at(g, c.edge, c.s);
        return w;
      }
    }
    const std::size_t v = c.forward ? g.edge(c.edge).b : g.edge(c.edge).a;
    if (g.degree(v) != 2 || ++hops > g.num_edges()) {
      w.end = g.vertex(v);
      return w;
    }
    const auto inc = g.incident(v);
    const std::size_t ne = inc[0] == c.edge ? inc[1] : inc[0];
    const bool from_a = g.edge(ne).a == v;
    c = {ne, from_a ? 0.0 : g.edge_length(ne), from_a};
  }
}

}  // namespace

VisitedState::VisitedState(const RoadGraph &g)
    : lengths_(g.num_edges()), covered_(g.num_edges()) {
  for (std::size_t e = 0; e < g.num_edges(); ++e) lengths_[e] = g.edge_length(e);
  total_ = g.total_length();
}

void VisitedState::mark(std::size_t e, double lo, double hi) {
  const double len = lengths_[e];
  lo = std::clamp(lo, 0.0, len);
  hi = std::clamp(hi, 0.0, len);
  if (lo <= kIntervalSnap) lo = 0.0;
  if (hi >= len - kIntervalSnap) hi = len;
  if (hi <= lo) return;
  auto &ivs = covered_[e];
  std::vector<Interval> merged;
  merged.reserve(ivs.size() + 1);
  bool placed = false;
  for (const auto &iv : ivs) {
    if (iv.hi + kIntervalSnap < lo) {
      merged.push_back(iv);
    } else if (hi + kIntervalSnap < iv.lo) {
      if (!placed) merged.push_back({lo, hi});
      placed = true;
      merged.push_back(iv);
    } else {
      lo = std::min(lo, iv.lo);
      hi = std::max(hi, iv.hi);
    }
  }
  if (!placed) merged.push_back({lo, hi});
  ivs = std::move(merged);
}

bool VisitedState::edge_visited(std::size_t e) const {
  const auto &ivs = covered_[e];
  return ivs.size() == 1 && ivs[0].lo == 0.0 && ivs[0].hi == lengths_[e];
}

bool VisitedState::covered_at(std::size_t e, double s) const {
  for (const auto &iv : covered_[e])
    if (iv.lo <= s && s <= iv.hi) return true;
  return false;
}

double VisitedState::covered_length() const {
  double sum = 0.0;
  for (std::size_t e = 0; e < covered_.size(); ++e) {
    if (edge_visited(e)) {
      sum += lengths_[e];
      continue;
    }
    for (const auto &iv : covered_[e]) sum += iv.hi - iv.lo;
  }
  return sum;
}

double VisitedState::fraction() const {
  if (total_ <= 0.0) return 1.0;
  return covered_length() / total_;
}

std::vector<Point2> next_vertices_gt(const RoadGraph &g, VisitedState &visited,
                                     const Point2 &position, double step,
                                     const WalkParams &params) {
  std::vector<Point2> out;
  if (g.num_edges() == 0) return out;
  const GraphLocation loc = project_point(g, position);
  const Edge &ed = g.edge(loc.edge);
  const double len = g.edge_length(loc.edge);
  const double s = loc.t * len;

  std::vector<Cursor> directions;
  const auto start_at_vertex = [&](std::size_t v, double sv) {
    visited.mark(loc.edge, std::min(s, sv), std::max(s, sv));
    for (std::size_t e : g.incident(v)) {
      const bool from_a = g.edge(e).a == v;
      directions.push_back({e, from_a ? 0.0 : g.edge_length(e), from_a});
    }
  };
  const bool near_a = s <= len - s;
  const std::size_t v = near_a ? ed.a : ed.b;
  const double along = near_a ? s : len - s;
  if (along <= kStepEps || (g.degree(v) != 2 && along <= params.junction_snap)) {
    start_at_vertex(v, near_a ? 0.0 : len);
  } else {
    directions.push_back({loc.edge, s, false});
    directions.push_back({loc.edge, s, true});
  }

  for (const Cursor &c : directions) {
    Walk w = walk(g, visited, c, step);
    for (const Mark &m : w.marks) visited.mark(m.edge, m.lo, m.hi);
    if (w.unvisited >= params.min_unvisited) out.push_back(w.end);
  }
  return out;
}

void ExpertConfig::validate() const {
  if (!(step_length > 0.0) || !(step_length < roi_size / 2.0))
    throw std::invalid_argument("step_length must lie in (0, roi_size/2)");
  if (!(noise_amplitude >= 0.0) || !(noise_amplitude < step_length / 2.0))
    throw std::invalid_argument("noise_amplitude must lie in [0, step_length/2)");
  if (roi_size < 32 || roi_size % 2 != 0)
    throw std::invalid_argument("roi_size must be even and at least 32");
  if (max_queries < 1) throw std::invalid_argument("max_queries must be positive");
}

const char *to_string(AgentAction a) {
  switch (a) {
    case AgentAction::Stop: return "stop";
    case AgentAction::Move: return "move";
    case AgentAction::Branch: return "branch";
    case AgentAction::Failure: return "failure";
  }
  return "?";
}

AgentAction action_for(std::size_t valid_count) {
  if (valid_count == 0) return AgentAction::Stop;
  return valid_count == 1 ? AgentAction::Move : AgentAction::Branch;
}

Trajectory bfs_traverse(const RoadGraph &g, const ExpertConfig &cfg, VisitedState *visited_out) {
  cfg.validate();
  Trajectory out;
  if (g.num_edges() == 0) {
    if (visited_out) *visited_out = VisitedState(g);
    return out;
  }
  const RoadGraph dense = densify(g, cfg.step_length);
  VisitedState visited(dense);
  std::deque<Point2> buffer;
  for (std::size_t v : key_vertices(dense, true)) buffer.push_back(dense.vertex(v));

  // Each productive step walks at least min_unvisited of fresh road.
  const std::size_t guard = buffer.size() * 4 + 16 +
      static_cast<std::size_t>(4.0 * dense.total_length() /
                               std::max(cfg.walk.min_unvisited, 1e-3));
  Point2 current = buffer.front();
  buffer.pop_front();
  while (out.size() < guard) {
    TrajectoryStep st;
    st.position = st.expert_position = current;
    st.next = next_vertices_gt(dense, visited, current, cfg.step_length, cfg.walk);
    st.buffer.assign(buffer.begin(), buffer.end());
    st.action = action_for(st.next.size());
    out.push_back(st);
    if (st.action == AgentAction::Move) {
      current = st.next.front();
      continue;
    }
    if (st.action == AgentAction::Branch) buffer.insert(buffer.end(), st.next.begin(), st.next.end());
    if (buffer.empty()) break;
    current = buffer.front();
    buffer.pop_front();
  }
  if (out.size() >= guard) spdlog::warn("bfs_traverse: step guard reached ({})", guard);
  if (visited_out) *visited_out = std::move(visited);
  return out;
}

Trajectory perturb(const Trajectory &trajectory, double amplitude, std::uint64_t rng_seed) {
  Trajectory out = trajectory;
  if (amplitude <= 0.0) return out;
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> noise(-amplitude, amplitude);
  for (auto &st : out) {
    const double dx = noise(rng);
    const double dy = noise(rng);
    st.position = st.expert_position + Point2(dx, dy);
  }
  return out;
}

SampleSetSummary emit_samples(const RoadGraph &g, const GridMap &aerial, const ExpertConfig &cfg,
                              const std::filesystem::path &out_dir, const std::string &tile_id,
                              const std::string &extra_json) {
  using nlohmann::json;
  cfg.validate();
  const int w = aerial.width(), h = aerial.height();
  if ((g.width != 0 && g.width != w) || (g.height != 0 && g.height != h))
    throw std::invalid_argument("aerial tile and graph dimensions differ");
  std::filesystem::create_directories(out_dir);

  VisitedState visited;
  const Trajectory expert = bfs_traverse(g, cfg, &visited);
  const Trajectory noisy = perturb(expert, cfg.noise_amplitude, cfg.rng_seed);
  const GridMap seg_full = rasterize_graph(g, w, h, cfg.seg_thickness);
  const GridMap int_full = intersection_label(g, w, h, cfg.disc_radius, cfg.ends_as_keypoints);
  GridMap history(w, h);

  SampleSetSummary summary;
  summary.coverage = visited.fraction();
  json records = json::array();
  const double half = cfg.roi_size / 2.0;
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    const TrajectoryStep &st = noisy[k];
    const RoiWindow win = RoiWindow::centered_at(st.position, cfg.roi_size);
    std::vector<Point2> labels = st.next;
    if (labels.size() > static_cast<std::size_t>(cfg.max_queries)) {
      ++summary.degree_violations;
      spdlog::warn("sample {}: {} next vertices exceed {} queries", k, labels.size(), cfg.max_queries);
      labels.resize(static_cast<std::size_t>(cfg.max_queries));
    }
    const std::string stem = (out_dir / std::to_string(k)).string();
    write_png(crop_roi(aerial, win), stem + "_rgb.png");
    write_png(crop_roi(history, win), stem + "_hist.png");
    write_png(crop_roi(seg_full, win), stem + "_seg.png");
    write_png(crop_roi(int_full, win), stem + "_int.png");

    json verts = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const Point2 off = labels[i] - st.position;
      if (std::abs(off.x()) >= half || std::abs(off.y()) >= half)
        spdlog::warn("sample {}: label {} lies outside the ROI", k, i);
      verts.push_back({{"dx", off.x()}, {"dy", off.y()}, {"valid", true}});
      const InstanceMask inst = instance_mask_label(g, st.position, labels[i], win, cfg.seg_thickness);
      write_png(inst.mask, stem + "_inst" + std::to_string(i) + ".png");
    }
    for (std::size_t i = labels.size(); i < static_cast<std::size_t>(cfg.max_queries); ++i)
      verts.push_back({{"dx", 0.0}, {"dy", 0.0}, {"valid", false}});

    records.push_back({{"k", k},
                       {"tile", tile_id},
                       {"center", {st.position.x(), st.position.y()}},
                       {"window", {win.cx, win.cy}},
                       {"expert_position", {st.expert_position.x(), st.expert_position.y()}},
                       {"action", to_string(st.action)},
                       {"num_valid", labels.size()},
                       {"label_vertices", std::move(verts)}});

    // History holds everything traced before the next step.
    for (const Point2 &p : labels) stroke_segment(history, st.expert_position, p, cfg.history_thickness);
  }

  json manifest;
  manifest["format"] = "roadtrace-samples-v1";
  manifest["tile"] = tile_id;
  manifest["width"] = w;
  manifest["height"] = h;
  manifest["roi_size"] = cfg.roi_size;
  manifest["n_queries"] = cfg.max_queries;
  manifest["coverage"] = summary.coverage;
  manifest["degree_violations"] = summary.degree_violations;
  manifest["config"] = json::parse(extra_json);
  manifest["samples"] = std::move(records);
  summary.samples = noisy.size();
  summary.manifest = out_dir / "manifest.json";
  std::ofstream(summary.manifest) << manifest.dump(1) << '\n';
  return summary;
}

}  // namespace roadtrace
