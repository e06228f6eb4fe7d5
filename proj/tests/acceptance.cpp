// Acceptance run: one PASS/FAIL line per criterion.

#include "support.hpp"

#include "roadtrace/assignment.hpp"
#include "roadtrace/engine.hpp"
#include "roadtrace/expert.hpp"
#include "roadtrace/losses.hpp"
#include "roadtrace/metrics.hpp"
#include "roadtrace/raster.hpp"
#include "roadtrace/samples.hpp"
#include "roadtrace/synthetic.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>

using namespace roadtrace;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// What `trace --predictor oracle` does for one tile.
RunResult closed_loop(const RoadGraph &g) {
  OraclePredictor oracle(g, {});
  const GridMap aerial = synthetic_aerial(g, g.width, g.height, 1);
  return run(aerial, oracle.intersection_map(), oracle, {});
}

std::vector<RoadGraph> test_graphs() {
  std::vector<RoadGraph> out;
  for (const auto &c : synthetic_suite(20, 1)) out.push_back(c.graph);
  return out;
}

// 1. Closed-loop reconstruction with the oracle.
Outcome closed_loop_reconstruction() {
  Outcome o;
  double worst_f1 = 1.0, worst_apls = 1.0;
  for (const auto &c : synthetic_suite(20, 1)) {
    const RunResult r = closed_loop(c.graph);
    const double f1 = topo(c.graph, r.graph).f1, a = *apls(c.graph, r.graph).score;
    worst_f1 = std::min(worst_f1, f1);
    worst_apls = std::min(worst_apls, a);
    if (f1 < 0.95 || a < 0.95) {
      o.pass = false;
      o.detail += fmt::format("{}: F1 {:.4f} APLS {:.4f}; ", c.name, f1, a);
    }
  }
  // City-scale stand-in: a dense 2048 x 2048 grid.
  SyntheticSpec big;
  big.kind = SyntheticKind::Grid;
  big.width = big.height = 2048;
  big.rows = big.cols = 12;
  big.seed = 5;
  const RoadGraph g = make_synthetic(big);
  const auto t0 = Clock::now();
  const RunResult r = closed_loop(g);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const double f1 = topo(g, r.graph).f1, a = *apls(g, r.graph).score;
  if (secs >= 60.0 || f1 < 0.95 || a < 0.95) o.pass = false;
  o.detail += fmt::format("20 graphs: min F1 {:.4f}, min APLS {:.4f}; 2048px grid ({:.0f} px of road): "
                          "F1 {:.4f}, APLS {:.4f}, {:.2f} s",
                          worst_f1, worst_apls, g.total_length(), f1, a, secs);
  return o;
}

// 2. Scripted predictors: every log record agrees with a reference model of
// the buffer rules.
Outcome buffer_rules() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::size_t records = 0, counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 200 && o.pass; ++trial) {
    std::vector<std::vector<Point2>> script;
    const std::size_t len = 1 + rng() % 40;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t m = std::vector<std::size_t>{0, 1, 1, 1, 2, 3, 4}[rng() % 7];
      // Distinct directions in the forward half-plane: traces only ever move
      // rightwards, so no candidate can point back at a vertex the agent is
      // already connected to (those are dropped by design). Continuous
      // angles plus a tiny snap radius keep unrelated vertices from merging.
      std::vector<Point2> offs;
      const double spread = 140.0 / double(std::max<std::size_t>(m, 1));
      for (std::size_t i = 0; i < m; ++i) {
        const double deg = -70.0 + spread * (double(i) + 0.5) + std::uniform_real_distribution<double>(-0.25, 0.25)(rng) * spread;
        const double ang = deg * M_PI / 180.0;
        offs.emplace_back(24 * std::cos(ang), 24 * std::sin(ang));
      }
      script.push_back(offs);
    }
    testutil::ScriptedPredictor pred(script);
    // Seeds 1000 px apart so traces never snap onto each other. Positions
    // may leave the small canvas; crops are zero-padded.
    std::deque<Point2> ref;
    CandidateBuffer seeds;
    const std::size_t n_seeds = 1 + rng() % 3;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      seeds.push({5000.0 + 1000.0 * double(s), 5000.0});
      ref.emplace_back(5000.0 + 1000.0 * double(s), 5000.0);
    }
    EngineConfig cfg;
    cfg.snap_radius = 1e-3;
    cfg.max_steps = 100000;
    const GridMap canvas(256, 256, 3);
    TracingAgent agent(canvas, pred, cfg, std::move(seeds));
    Point2 at = ref.front();
    ref.pop_front();
    std::size_t k = 0;
    while (agent.step()) {
    }
    for (const StepRecord &rec : agent.log()) {
      ++records;
      const auto offs = k < script.size() ? script[k] : std::vector<Point2>{};
      ++k;
      std::string err;
      if (rec.position != at) err = "position";
      if (rec.valid != offs.size()) err = "M";
      if (offs.empty()) {
        ++counts[0];
        if (rec.action != AgentAction::Stop || rec.edges_added != 0 || !rec.pushed.empty()) err = "M=0 action";
      } else if (offs.size() == 1) {
        ++counts[1];
        if (rec.action != AgentAction::Move || rec.edges_added != 1 || rec.popped) err = "M=1 action";
        at = at + offs[0];
        if (err.empty()) continue;
      } else {
        ++counts[2];
        std::vector<Point2> expect;
        for (const auto &d : offs) expect.push_back(at + d);
        if (rec.action != AgentAction::Branch || rec.edges_added != offs.size() || rec.pushed != expect)
          err = "M>1 action";
        ref.insert(ref.end(), expect.begin(), expect.end());
      }
      if (err.empty()) {
        // Pop the next seed, or terminate.
        if (ref.empty()) {
          if (rec.popped || !agent.finished()) err = "termination";
        } else {
          if (!rec.popped || *rec.popped != ref.front()) err = "pop order";
          at = ref.front();
          ref.pop_front();
        }
      }
      if (!err.empty()) {
        o.pass = false;
        o.detail = fmt::format("trial {} step {}: {} mismatch", trial, rec.step, err);
        break;
      }
    }
  }
  if (o.pass)
    o.detail = fmt::format("{} step records over 200 scripts (M=0: {}, M=1: {}, M>1: {})", records, counts[0],
                           counts[1], counts[2]);
  return o;
}

double distance_to_graph(const RoadGraph &g, const Point2 &p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &e : g.edges()) {
    const Point2 &a = g.vertex(e.a), &b = g.vertex(e.b);
    best = std::min(best, testutil::seg_dist(p.x(), p.y(), a.x(), a.y(), b.x(), b.y()));
  }
  return best;
}

// 3. Expert coverage and labels on the road under noise.
Outcome expert_coverage() {
  Outcome o;
  std::vector<RoadGraph> graphs = test_graphs();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) graphs.push_back(testutil::random_graph(rng, 10, 400, 10.0, 3));
  ExpertConfig cfg;
  cfg.noise_amplitude = 6.0;
  double min_cov = 1.0, max_off = 0.0;
  std::size_t labels = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    VisitedState vs;
    const Trajectory tr = perturb(bfs_traverse(graphs[i], cfg, &vs), 6.0, 100 + i);
    min_cov = std::min(min_cov, vs.fraction());
    for (const auto &s : tr)
      for (const auto &q : s.next) {
        ++labels;
        max_off = std::max(max_off, distance_to_graph(graphs[i], q));
      }
  }
  o.pass = min_cov == 1.0 && max_off < 1e-6;
  o.detail = fmt::format("{} graphs: min coverage {:.12f}; {} labels, max distance to road {:.2e} px",
                         graphs.size(), min_cov, labels, max_off);
  return o;
}

// 4. Hungarian against brute force.
Outcome hungarian_exact() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const long n = 1 + long(trial % 6);
    Eigen::MatrixXd c(n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) c(i, j) = trial % 2 ? u(rng) : double(rng() % 10);
    if (assignment_cost(c, hungarian(c)) != testutil::brute_assignment(c)) ++mismatches;
  }
  o.pass = mismatches == 0;
  o.detail = fmt::format("1000 matrices, n = 1..6: {} mismatches", mismatches);
  return o;
}

RoadGraph zigzag(double length, double h) {
  const double a = h * std::sqrt(1.25);
  std::vector<Point2> v;
  std::vector<std::pair<std::size_t, std::size_t>> e;
  const int n = static_cast<int>(std::round(length / h));
  for (int k = 0; k <= n; ++k) {
    v.emplace_back(k * h, 100.0 + ((k % 2) ? a / 2 : -a / 2));
    if (k > 0) e.emplace_back(k - 1, k);
  }
  return testutil::graph(std::move(v), e);
}

RoadGraph jittered(const RoadGraph &g, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<Point2> v = g.vertices();
  for (auto &p : v) p += Point2(u(rng), u(rng));
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (const auto &ed : g.edges()) e.emplace_back(ed.a, ed.b);
  return testutil::graph(std::move(v), e, g.width, g.height);
}

// 5. Metric identities, detour construction, jitter monotonicity.
Outcome metric_identities() {
  Outcome o;
  double worst = 0.0;
  for (const auto &g : test_graphs()) {
    const TopoScore t = topo(g, g);
    worst = std::max({worst, std::abs(1 - t.precision), std::abs(1 - t.recall), std::abs(1 - t.f1),
                      std::abs(1 - *apls(g, g).score)});
  }
  AplsParams p;
  p.pairs = 10000;
  p.symmetric = false;
  const double detour = *apls(testutil::line(0, 100, 1000, 100), zigzag(1000, 2.0), p).score;

  const RoadGraph base = densify(synthetic_suite(1, 1)[0].graph, 10.0);
  std::vector<double> means;
  for (double a : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) sum += *apls(base, jittered(base, a, 500 + seed)).score;
    means.push_back(sum / 10.0);
  }
  const bool ordered = std::is_sorted(means.rbegin(), means.rend());
  o.pass = worst <= 1e-9 && std::abs(detour - 0.5) <= 0.02 && ordered;
  o.detail = fmt::format("max |1 - identity score| {:.1e}; detour APLS {:.4f}; jitter means {:.4f}", worst, detour,
                         fmt::join(means, " >= "));
  return o;
}

// 6. Loss arithmetic and the perfect-oracle floor on noiseless samples.
Outcome loss_arithmetic() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "roadtrace_acceptance_samples";
  ExpertConfig cfg;
  cfg.noise_amplitude = 0.0;
  double max_coord = 0.0, max_ins = 0.0, max_prob_gap = 0.0, max_total_gap = 0.0;
  std::size_t samples = 0;
  const double floor = -std::log(1.0 - 1e-7);
  const auto suite = synthetic_suite(5, 6);
  for (const auto &c : suite) {
    std::filesystem::remove_all(dir);
    const auto summary = emit_samples(c.graph, synthetic_aerial(c.graph, c.graph.width, c.graph.height, 6), cfg,
                                      dir, c.name);
    const SampleSet set(summary.manifest);
    OraclePredictor oracle(c.graph, {});
    for (std::size_t k = 0; k < set.size(); ++k) {
      const TrainingSample s = set.load(k);
      PredictorRequest req;
      req.id = k;
      req.center = s.center;
      const LossBreakdown b = losses(oracle.predict(req), s);
      ++samples;
      max_coord = std::max(max_coord, b.coord);
      max_ins = std::max(max_ins, b.ins);
      max_prob_gap = std::max(max_prob_gap, std::abs(b.prob - floor));
      max_total_gap = std::max(max_total_gap, std::abs(b.total - (b.seg + 5 * b.coord + b.prob + b.ins)));
    }
  }
  std::filesystem::remove_all(dir);
  const LossWeights w;
  o.pass = w.coord == 5.0 && w.prob == 1.0 && w.ins == 1.0 && max_coord == 0.0 && max_ins == 0.0 &&
           max_prob_gap < 1e-12 && max_total_gap == 0.0;
  o.detail = fmt::format("{} samples: max coord {}, max ins {}, max |prob - floor| {:.1e}, "
                         "max |total - (seg + 5 coord + prob + ins)| {}",
                         samples, max_coord, max_ins, max_prob_gap, max_total_gap);
  return o;
}

// Key vertices recomputed from scratch: degree counts plus union-find.
std::vector<Point2> key_points_oracle(const RoadGraph &g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::size_t> deg(n, 0), parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto &e : g.edges()) {
    ++deg[e.a];
    ++deg[e.b];
    parent[find(e.a)] = find(e.b);
  }
  std::vector<Point2> out;
  std::vector<bool> has_key(n, false), has_edge(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (deg[v] > 0) has_edge[find(v)] = true;
    if (deg[v] == 1 || deg[v] >= 3) {
      out.push_back(g.vertex(v));
      has_key[find(v)] = true;
    }
  }
  std::vector<bool> anchored(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = find(v);
    if (deg[v] > 0 && !has_key[r] && !anchored[r]) {
      anchored[r] = true;
      out.push_back(g.vertex(v));
    }
  }
  return out;
}

// Shortest graph distance between two projected points by Floyd-Warshall
// over vertices plus the two split points.
double floyd_distance(const RoadGraph &g, const GraphLocation &a, const GraphLocation &b) {
  const std::size_t n = g.num_vertices() + 2;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n * n, inf);
  const auto link = [&](std::size_t i, std::size_t j, double w) {
    d[i * n + j] = std::min(d[i * n + j], w);
    d[j * n + i] = std::min(d[j * n + i], w);
  };
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) link(g.edge(e).a, g.edge(e).b, g.edge_length(e));
  const GraphLocation locs[2] = {a, b};
  for (std::size_t k = 0; k < 2; ++k) {
    const Edge &e = g.edge(locs[k].edge);
    link(n - 2 + k, e.a, (locs[k].point - g.vertex(e.a)).norm());
    link(n - 2 + k, e.b, (locs[k].point - g.vertex(e.b)).norm());
  }
  if (a.edge == b.edge) link(n - 2, n - 1, (a.point - b.point).norm());
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  return d[(n - 2) * n + n - 1];
}

// 7. Raster products against per-pixel brute force.
Outcome raster_oracles() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::size_t bad_graph = 0, bad_disc = 0, bad_mask = 0, masks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int size = 48 + static_cast<int>(rng() % 208);
    const RoadGraph g = testutil::random_graph(rng, 3 + rng() % 8, size, -4.0, rng() % 4);
    const double thickness = 1.0 + double(rng() % 5) * 0.5;
    bad_graph += testutil::differing_pixels(rasterize_graph(g, size, size, thickness),
                                            testutil::brute_raster(g, size, size, thickness)) != 0;
    bad_disc += intersection_label(g, size, size, 3.0) != testutil::brute_discs(key_points_oracle(g), size, size, 3.0);

    std::uniform_real_distribution<double> c(0, size);
    for (int k = 0; k < 4; ++k) {
      const Point2 from(c(rng), c(rng)), to(c(rng), c(rng));
      const RoiWindow win = RoiWindow::centered_at(from, 64);
      const InstanceMask m = instance_mask_label(g, from, to, win, 3.0);
      const GraphLocation la = project_point(g, from), lb = project_point(g, to);
      const double dist = floyd_distance(g, la, lb);
      ++masks;
      if (!std::isfinite(dist)) {
        bad_mask += m.reachable || m.mask.count_nonzero() != 0;
        continue;
      }
      const auto path = shortest_path(g, la, lb);
      double len = 0.0;
      for (std::size_t i = 1; i < path->size(); ++i) len += ((*path)[i] - (*path)[i - 1]).norm();
      // Per-pixel test against the path, in window coordinates.
      GridMap brute(64, 64);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
          const double px = double(win.x0() + x), py = double(win.y0() + y);
          for (std::size_t i = 0; i < path->size(); ++i) {
            const Point2 &p0 = (*path)[i == 0 ? 0 : i - 1], &p1 = (*path)[i];
            const double dd = testutil::seg_dist(px, py, p0.x(), p0.y(), p1.x(), p1.y());
            if (dd * dd <= 2.25) {
              brute.at(x, y) = 255;
              break;
            }
          }
        }
      bad_mask += std::abs(len - dist) > 1e-9 || !m.reachable || m.mask != brute;
    }
  }
  o.pass = bad_graph == 0 && bad_disc == 0 && bad_mask == 0;
  o.detail = fmt::format("50 graphs: rasterize_graph {} mismatches, intersection_label {} mismatches, "
                         "instance_mask_label {}/{} mismatches",
                         bad_graph, bad_disc, bad_mask, masks);
  return o;
}

// 8. Mean closed-loop APLS does not rise with the drop rate.
Outcome robustness() {
  Outcome o;
  const auto suite = synthetic_suite(5, 8);
  std::vector<double> means;
  for (double drop : {0.0, 0.05, 0.1, 0.2}) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      for (const auto &c : suite) {
        OraclePredictor oracle(c.graph, {});
        NoiseSpec spec;
        spec.drop_probability = drop;
        spec.seed = seed;
        NoisyPredictor noisy(oracle, spec);
        const GridMap aerial(c.graph.width, c.graph.height, 3);
        const RunResult r = run(aerial, oracle.intersection_map(), noisy, {});
        sum += *apls(c.graph, r.graph).score;
        ++n;
      }
    means.push_back(sum / double(n));
  }
  o.pass = std::is_sorted(means.rbegin(), means.rend());
  o.detail = fmt::format("mean APLS at drop 0/0.05/0.1/0.2 over 5 seeds x 5 graphs: {:.4f}", fmt::join(means, ", "));
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<const char *, Outcome (*)()>> criteria{
      {"closed-loop reconstruction", closed_loop_reconstruction},
      {"buffer-rule conformance", buffer_rules},
      {"expert coverage", expert_coverage},
      {"hungarian exactness", hungarian_exact},
      {"metric identities", metric_identities},
      {"loss arithmetic", loss_arithmetic},
      {"raster oracles", raster_oracles},
      {"robustness degradation", robustness},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all &= o.pass;
    std::cout << fmt::format("criterion {}: {} - {}: {}", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                             o.detail)
              << std::endl;
  }
  return all ? 0 : 1;
}
