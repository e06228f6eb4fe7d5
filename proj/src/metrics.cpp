#include "roadtrace/metrics.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace roadtrace {

namespace {

// Points every `spacing` px of arc length, walking the edges in index order.
// The first point sits `offset` px into the first edge. The point count comes
// from the total length with a small tolerance, so rounding noise in clipped
// sub-graphs cannot add or drop a point at the very end.
std::vector<GraphLocation> sample_along(const RoadGraph &g, double spacing, double offset) {
  std::vector<GraphLocation> out;
  const double total = g.total_length();
  if (g.num_edges() == 0 || offset > total + 1e-9) return out;
  const auto count = static_cast<std::size_t>(std::floor((total - offset) / spacing + 1e-9)) + 1;
  std::size_t e = 0;
  double base = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = offset + static_cast<double>(k) * spacing;
    // A position on an edge end, up to rounding, starts the next edge.
    while (e + 1 < g.num_edges() && pos >= base + g.edge_length(e) - 1e-9) base += g.edge_length(e++);
    const double len = g.edge_length(e);
    out.push_back(make_location(g, e, len > 0.0 ? std::clamp((pos - base) / len, 0.0, 1.0) : 0.0));
  }
  return out;
}

// Maximal chains of edges between vertices whose degree is not 2, as
// (edge, forward) lists. Leftover edges form pure cycles, each started at
// its lowest-indexed vertex.
std::vector<std::vector<std::pair<std::size_t, bool>>> chains_of(const RoadGraph &g) {
  std::vector<std::vector<std::pair<std::size_t, bool>>> chains;
  std::vector<bool> used(g.num_edges(), false);
  const auto walk = [&](std::size_t start, std::size_t first_edge) {
    std::vector<std::pair<std::size_t, bool>> chain;
    std::size_t v = start, e = first_edge;
    while (!used[e]) {
      used[e] = true;
      chain.emplace_back(e, g.edge(e).a == v);
      v = g.other_end(e, v);
      if (g.degree(v) != 2) break;
      const auto inc = g.incident(v);
      e = inc[0] == e ? inc[1] : inc[0];
    }
    chains.push_back(std::move(chain));
  };
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) != 2)
      for (std::size_t e : g.incident(v))
        if (!used[e]) walk(v, e);
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    for (std::size_t e : g.incident(v))
      if (!used[e]) walk(v, e);
  return chains;
}

// Midpoints of an equal subdivision of every chain into pieces of about
// `spacing` px. The point set depends only on the drawn geometry: inserting
// degree-2 vertices or renumbering edges leaves it unchanged, and junctions
// shared by several chains are not counted more than once.
std::vector<Point2> marbles_of(const RoadGraph &sub, double spacing) {
  std::vector<Point2> out;
  for (const auto &chain : chains_of(sub)) {
    double total = 0.0;
    for (const auto &[e, fwd] : chain) total += sub.edge_length(e);
    if (total <= 1e-9) continue;
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(total / spacing)));
    const double step = total / static_cast<double>(n);
    std::size_t i = 0;
    double base = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double pos = (static_cast<double>(k) + 0.5) * step;
      while (i + 1 < chain.size() && pos > base + sub.edge_length(chain[i].first)) base += sub.edge_length(chain[i++].first);
      const auto [e, fwd] = chain[i];
      const double len = sub.edge_length(e);
      const double t = len > 0.0 ? std::clamp((pos - base) / len, 0.0, 1.0) : 0.0;
      out.push_back(make_location(sub, e, fwd ? t : 1.0 - t).point);
    }
  }
  return out;
}

// Greedy one-to-one matching of point sets within `radius`, closest pairs first.
std::size_t match_points(const std::vector<Point2> &a, const std::vector<Point2> &b, double radius) {
  if (a.empty() || b.empty()) return 0;
  const double cell = std::max(radius, 1e-6);
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  const auto key = [](long x, long y) {
    return (static_cast<long long>(x) << 32) ^ static_cast<long long>(static_cast<std::uint32_t>(y));
  };
  for (std::size_t j = 0; j < b.size(); ++j)
    grid[key(static_cast<long>(std::floor(b[j].x() / cell)), static_cast<long>(std::floor(b[j].y() / cell)))]
        .push_back(j);
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long cx = static_cast<long>(std::floor(a[i].x() / cell));
    const long cy = static_cast<long>(std::floor(a[i].y() / cell));
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          const double d2 = (a[i] - b[j]).squaredNorm();
          if (d2 <= r2) pairs.emplace_back(d2, i, j);
        }
      }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  std::size_t matched = 0;
  for (const auto &[d2, i, j] : pairs) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = true;
    ++matched;
  }
  return matched;
}

}  // namespace

void TopoParams::validate() const {
  if (!(seed_spacing > 0.0) || !(marble_spacing > 0.0))
    throw std::invalid_argument("TOPO spacings must be positive");
  if (!(match_radius > 0.0) || !(match_radius < propagation_radius))
    throw std::invalid_argument("TOPO needs 0 < match_radius < propagation_radius");
}

void AplsParams::validate() const {
  if (pairs < 1) throw std::invalid_argument("APLS needs at least one pair");
  if (!(sample_spacing > 0.0) || !(snap_cutoff > 0.0))
    throw std::invalid_argument("APLS spacing and cutoff must be positive");
}

TopoScore topo(const RoadGraph &gt, const RoadGraph &pred, const TopoParams &params) {
  params.validate();
  TopoScore out;
  std::mt19937_64 rng(params.rng_seed);
  std::uniform_real_distribution<double> jitter(0.0, params.seed_spacing);
  const auto gt_seeds = sample_along(gt, params.seed_spacing, jitter(rng));
  const auto pred_seeds = sample_along(pred, params.seed_spacing, jitter(rng));
  out.gt_seeds = gt_seeds.size();

  const bool have_pred = pred.num_edges() > 0;
  const bool have_gt = gt.num_edges() > 0;
  std::vector<std::pair<double, std::size_t>> order;
  std::vector<GraphLocation> proj(gt_seeds.size());
  for (std::size_t i = 0; i < gt_seeds.size(); ++i) {
    if (!have_pred) break;
    proj[i] = project_point(pred, gt_seeds[i].point);
    const double d = (proj[i].point - gt_seeds[i].point).norm();
    if (d <= params.match_radius) order.emplace_back(d, i);
  }
  std::sort(order.begin(), order.end());
  // One-to-one: a prediction location already claimed by a closer seed is
  // not reused. Distinct seeds keep distinct locations even near junctions.
  std::vector<bool> matched(gt_seeds.size(), false);
  std::vector<Point2> taken;
  for (const auto &[d, i] : order) {
    const bool clash = std::any_of(taken.begin(), taken.end(), [&](const Point2 &q) {
      return (q - proj[i].point).norm() <= kMergeEpsilon;
    });
    if (clash) continue;
    taken.push_back(proj[i].point);
    matched[i] = true;
  }

  for (std::size_t i = 0; i < gt_seeds.size(); ++i) {
    const auto marbles =
        marbles_of(subgraph_within(gt, gt_seeds[i], params.propagation_radius), params.marble_spacing);
    out.gt_marbles += marbles.size();
    if (!matched[i]) continue;
    ++out.matched_seeds;
    const auto holes =
        marbles_of(subgraph_within(pred, proj[i], params.propagation_radius), params.marble_spacing);
    out.pred_holes += holes.size();
    out.matched_marbles += match_points(marbles, holes, params.match_radius);
  }
  for (const GraphLocation &seed : pred_seeds) {
    if (have_gt) {
      const GraphLocation back = project_point(gt, seed.point);
      if ((back.point - seed.point).norm() <= params.match_radius) continue;
    }
    out.pred_holes +=
        marbles_of(subgraph_within(pred, seed, params.propagation_radius), params.marble_spacing).size();
  }
  out.precision = out.pred_holes ? static_cast<double>(out.matched_marbles) / out.pred_holes : 0.0;
  out.recall = out.gt_marbles ? static_cast<double>(out.matched_marbles) / out.gt_marbles : 0.0;
  out.f1 = f1_of(out.precision, out.recall);
  return out;
}

std::optional<double> apls_one_way(const RoadGraph &reference, const RoadGraph &candidate,
                                   const AplsParams &params) {
  params.validate();
  if (reference.num_edges() == 0) return std::nullopt;
  const RoadGraph dense = densify(reference, params.sample_spacing);
  std::vector<std::size_t> points;
  for (std::size_t v = 0; v < dense.num_vertices(); ++v)
    if (dense.degree(v) > 0) points.push_back(v);
  const auto comp = connected_components(dense);
  std::unordered_map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t v : points) members[comp[v]].push_back(v);
  // First point drawn with weight (component size - 1), second uniformly
  // among the rest of its component: uniform over connected ordered pairs.
  std::vector<double> weights;
  for (std::size_t v : points) weights.push_back(static_cast<double>(members[comp[v]].size() - 1));
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; }))
    return std::nullopt;
  std::mt19937_64 rng(params.rng_seed);
  std::discrete_distribution<std::size_t> first(weights.begin(), weights.end());

  const bool have_candidate = candidate.num_edges() > 0;
  std::unordered_map<std::size_t, GraphLocation> proj_cache;
  const auto projection = [&](std::size_t v) -> const GraphLocation & {
    auto it = proj_cache.find(v);
    if (it == proj_cache.end()) it = proj_cache.emplace(v, project_point(candidate, dense.vertex(v))).first;
    return it->second;
  };

  double total_cost = 0.0;
  for (std::size_t k = 0; k < params.pairs; ++k) {
    const std::size_t a = points[first(rng)];
    const auto &mem = members[comp[a]];
    std::uniform_int_distribution<std::size_t> pick(0, mem.size() - 2);
    std::size_t b = mem[pick(rng)];
    if (b == a) b = mem.back();

    double cost = 1.0;
    if (have_candidate) {
      const GraphLocation &pa = projection(a);
      const GraphLocation &pb = projection(b);
      const bool snapped = (pa.point - dense.vertex(a)).norm() <= params.snap_cutoff &&
                           (pb.point - dense.vertex(b)).norm() <= params.snap_cutoff;
      if (snapped) {
        const auto l_pred = graph_distance(candidate, pa, pb);
        const auto l_ref = graph_distance(dense, vertex_location(dense, a), vertex_location(dense, b));
        if (l_pred && l_ref && *l_ref > 0.0) cost = std::min(1.0, std::abs(*l_ref - *l_pred) / *l_ref);
      }
    }
    total_cost += cost;
  }
  return 1.0 - total_cost / static_cast<double>(params.pairs);
}

AplsScore apls(const RoadGraph &gt, const RoadGraph &pred, const AplsParams &params) {
  AplsScore out;
  out.pairs = params.pairs;
  out.gt_to_pred = apls_one_way(gt, pred, params);
  if (!out.gt_to_pred) return out;
  if (!params.symmetric) {
    out.score = out.gt_to_pred;
    return out;
  }
  AplsParams back = params;
  back.rng_seed = params.rng_seed ^ 0x9e3779b97f4a7c15ULL;
  out.pred_to_gt = apls_one_way(pred, gt, back);
  out.score = 0.5 * (*out.gt_to_pred + out.pred_to_gt.value_or(0.0));
  return out;
}

MetricReport evaluate(const RoadGraph &gt, const RoadGraph &pred, const TopoParams &tp,
                      const AplsParams &ap) {
  return {topo(gt, pred, tp), apls(gt, pred, ap), tp, ap};
}

std::string to_json(const MetricReport &r) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["topo"] = {{"precision", r.topo.precision},     {"recall", r.topo.recall},
               {"f1", r.topo.f1},                   {"gt_seeds", r.topo.gt_seeds},
               {"matched_seeds", r.topo.matched_seeds}, {"gt_marbles", r.topo.gt_marbles},
               {"pred_holes", r.topo.pred_holes},   {"matched_marbles", r.topo.matched_marbles}};
  j["apls"] = {{"score", opt(r.apls.score)},
               {"gt_to_pred", opt(r.apls.gt_to_pred)},
               {"pred_to_gt", opt(r.apls.pred_to_gt)},
               {"pairs", r.apls.pairs}};
  j["params"] = {{"topo",
                  {{"seed_spacing", r.topo_params.seed_spacing},
                   {"match_radius", r.topo_params.match_radius},
                   {"propagation_radius", r.topo_params.propagation_radius},
                   {"marble_spacing", r.topo_params.marble_spacing},
                   {"rng_seed", r.topo_params.rng_seed}}},
                 {"apls",
                  {{"pairs", r.apls_params.pairs},
                   {"sample_spacing", r.apls_params.sample_spacing},
                   {"snap_cutoff", r.apls_params.snap_cutoff},
                   {"symmetric", r.apls_params.symmetric},
                   {"rng_seed", r.apls_params.rng_seed}}}};
  return j.dump(2);
}

}  // namespace roadtrace
