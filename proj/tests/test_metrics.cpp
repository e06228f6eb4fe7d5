#include "doctest.h"
#include "support.hpp"

#include "roadtrace/metrics.hpp"
#include "roadtrace/synthetic.hpp"

using namespace roadtrace;
using testutil::graph;
using testutil::line;

namespace {

// Zigzag around the x axis from 0 to `length`, 1.5x longer than the straight
// line over every horizontal stretch.
RoadGraph zigzag(double length, double h) {
  const double a = h * std::sqrt(1.25);
  std::vector<Point2> v;
  std::vector<std::pair<std::size_t, std::size_t>> e;
  const int n = static_cast<int>(std::round(length / h));
  for (int k = 0; k <= n; ++k) {
    v.emplace_back(k * h, 100.0 + ((k % 2) ? a / 2 : -a / 2));
    if (k > 0) e.emplace_back(k - 1, k);
  }
  return graph(std::move(v), e);
}

RoadGraph jittered(const RoadGraph &g, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<Point2> v = g.vertices();
  for (auto &p : v) p += Point2(u(rng), u(rng));
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (const auto &ed : g.edges()) e.emplace_back(ed.a, ed.b);
  return graph(std::move(v), e, g.width, g.height);
}

RoadGraph translated(const RoadGraph &g, const Point2 &d) {
  std::vector<Point2> v = g.vertices();
  for (auto &p : v) p += d;
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (const auto &ed : g.edges()) e.emplace_back(ed.a, ed.b);
  return graph(std::move(v), e);
}

}  // namespace

TEST_CASE("identities on the synthetic suite") {
  for (const auto &c : synthetic_suite(20, 1)) {
    const TopoScore t = topo(c.graph, c.graph);
    CHECK(std::abs(t.precision - 1.0) <= 1e-9);
    CHECK(std::abs(t.recall - 1.0) <= 1e-9);
    CHECK(std::abs(t.f1 - 1.0) <= 1e-9);
    CHECK(std::abs(*apls(c.graph, c.graph).score - 1.0) <= 1e-9);
  }
}

TEST_CASE("empty prediction scores zero") {
  const RoadGraph g = testutil::plus({100, 100}, 80);
  const TopoScore t = topo(g, RoadGraph{});
  CHECK(t.precision == 0.0);
  CHECK(t.recall == 0.0);
  CHECK(t.f1 == 0.0);
  CHECK(*apls(g, RoadGraph{}).score == 0.0);
  CHECK_FALSE(apls(RoadGraph{}, g).gt_to_pred.has_value());
}

TEST_CASE("translation by twice the match radius gives F1 = 0") {
  const RoadGraph g = graph({{0, 50}, {400, 50}, {0, 150}, {400, 150}, {0, 250}, {400, 250}},
                            {{0, 1}, {2, 3}, {4, 5}});
  const TopoScore t = topo(g, translated(g, {0, 16}));
  CHECK(t.f1 == 0.0);
  CHECK(topo(g, translated(g, {0, 7})).f1 > 0.9);
}

TEST_CASE("APLS detour construction scores 0.5") {
  const RoadGraph gt = line(0, 100, 1000, 100);
  AplsParams p;
  p.pairs = 10000;
  p.symmetric = false;
  const double s = *apls(gt, zigzag(1000, 2.0), p).score;
  CHECK(std::abs(s - 0.5) <= 0.02);
}

TEST_CASE("APLS examples with analytic values") {
  // A gap in the middle: pairs across it are unreachable.
  const RoadGraph gt = line(0, 0, 200, 0);
  const RoadGraph broken = graph({{0, 0}, {99, 0}, {101, 0}, {200, 0}}, {{0, 1}, {2, 3}});
  AplsParams p;
  p.pairs = 20000;
  p.symmetric = false;
  const double s = *apls(gt, broken, p).score;
  // Two halves of 10 or 11 points out of 21: about half the pairs cross.
  CHECK(s == doctest::Approx(0.5).epsilon(0.05));
  CHECK(s < 0.6);
}

TEST_CASE("APLS decreases with vertex jitter, on average") {
  const RoadGraph g = densify(synthetic_suite(1, 1)[0].graph, 10.0);
  const std::vector<double> amps{0.0, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> means;
  for (double a : amps) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) sum += *apls(g, jittered(g, a, seed + 100)).score;
    means.push_back(sum / 10.0);
  }
  for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] <= means[i - 1]);
}

TEST_CASE("metrics are deterministic and densification-invariant") {
  const auto suite = synthetic_suite(5, 2);
  for (const auto &c : suite) {
    const RoadGraph pred = jittered(densify(c.graph, 15.0), 2.0, 1);
    const TopoScore a = topo(c.graph, pred), b = topo(c.graph, pred);
    CHECK(a.f1 == b.f1);
    CHECK(*apls(c.graph, pred).score == *apls(c.graph, pred).score);
    CHECK(topo(densify(c.graph, 7.0), pred).f1 == doctest::Approx(a.f1).epsilon(0.03));
    CHECK(*apls(densify(c.graph, 7.0), pred).score == doctest::Approx(*apls(c.graph, pred).score).epsilon(0.03));
  }
}

TEST_CASE("F1 follows from precision and recall") {
  CHECK(f1_of(0.0, 0.0) == 0.0);
  CHECK(f1_of(1.0, 0.5) == doctest::Approx(2.0 / 3.0));
  const auto suite = synthetic_suite(3, 3);
  const TopoScore t = topo(suite[0].graph, suite[2].graph);
  CHECK(t.f1 == doctest::Approx(f1_of(t.precision, t.recall)));
  CHECK(t.precision >= 0.0);
  CHECK(t.recall <= 1.0);
}

TEST_CASE("parameter validation") {
  TopoParams t;
  t.match_radius = 400;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  AplsParams a;
  a.pairs = 0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}
