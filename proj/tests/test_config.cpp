#include "doctest.h"
#include "support.hpp"

#include "roadtrace/config.hpp"
#include "roadtrace/render.hpp"
#include "roadtrace/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace roadtrace;

TEST_CASE("default config carries the documented defaults") {
  const RunConfig c = config_from_json(nlohmann::json::object());
  CHECK(c.expert.step_length == 20.0);
  CHECK(c.expert.noise_amplitude == 6.0);
  CHECK(c.expert.roi_size == 128);
  CHECK(c.expert.max_queries == 10);
  CHECK(c.engine.prob_threshold == 0.5);
  CHECK(c.engine.snap_radius == 5.0);
  CHECK(c.engine.peaks.threshold == 128);
  CHECK(c.engine.peaks.nms_radius == 16.0);
  CHECK(c.topo.seed_spacing == 50.0);
  CHECK(c.topo.match_radius == 8.0);
  CHECK(c.topo.propagation_radius == 300.0);
  CHECK(c.apls.pairs == 500);
  CHECK(c.apls.snap_cutoff == 8.0);
  CHECK(c.loss.coord == 5.0);
  CHECK(c.loss.prob == 1.0);
  CHECK(c.loss.ins == 1.0);
  CHECK(c.predictor.timeout_ms == 30000);
  // Echoing the config and reading it back is lossless.
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
}

TEST_CASE("config file and overrides") {
  const auto path = std::filesystem::temp_directory_path() / "roadtrace_config_test.json";
  std::ofstream(path) << R"({"expert":{"step_length":16},"apls":{"pairs":50}})";
  const RunConfig c = load_config(path, {"apls.pairs=75", "predictor.kind=external", "engine.reseed_on_failure=true"});
  CHECK(c.expert.step_length == 16.0);
  CHECK(c.apls.pairs == 75);
  CHECK(c.predictor.kind == "external");
  CHECK(c.engine.reseed_on_failure);
  CHECK(c.oracle_options().step_length == 16.0);

  CHECK_THROWS_AS(load_config({}, {"expert.no_such_key=1"}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {"expert.step_length=\"far\""}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {"engine.prob_threshold=2"}), std::invalid_argument);
  CHECK_THROWS_AS(load_config({}, {"missing_equals"}), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic generator is deterministic and respects its constraints") {
  const auto a = synthetic_suite(20, 1), b = synthetic_suite(20, 1);
  REQUIRE(a.size() == 20);
  std::size_t max_deg = 0, kinds = 0;
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].graph == b[i].graph);
    names.insert(a[i].name);
    max_deg = std::max(max_deg, a[i].graph.max_degree());
    CHECK(a[i].graph.max_degree() <= 6);
    for (const auto &v : a[i].graph.vertices()) {
      CHECK(v.x() >= 0);
      CHECK(v.y() >= 0);
      CHECK(v.x() < a[i].graph.width);
      CHECK(v.y() < a[i].graph.height);
    }
    kinds += a[i].graph.num_edges() > 0;
  }
  CHECK(names.size() == 20);
  CHECK(kinds == 20);
  CHECK(max_deg == 6);
  SyntheticSpec bad;
  bad.kind = SyntheticKind::Ring;
  bad.spokes = 2;
  CHECK_THROWS_AS(make_synthetic(bad), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_kind_from("spiral"), std::invalid_argument);
}

TEST_CASE("render produces an SVG with both colors and an overlay image") {
  const RoadGraph g = testutil::plus({50, 50}, 30);
  const std::string svg = render_svg(g, g, 100, 100);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("#00ffff") != std::string::npos);
  CHECK(svg.find("#ff8c00") != std::string::npos);
  const GridMap overlay = render_overlay(GridMap(100, 100, 3), g, RoadGraph{});
  CHECK(overlay.channels() == 3);
  CHECK(overlay.at(50, 40, 1) == 255);
  CHECK(overlay.at(50, 40, 2) == 255);
  CHECK(overlay.at(5, 5, 1) == 0);
}
