#include "doctest.h"

#include "roadtrace/codec.hpp"
#include "roadtrace/graph_io.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "roadtrace_cli_test";

int cli(const std::string &args) {
  const std::string cmd = std::string(ROADTRACE_CLI) + " -q " + args + " >" + (kWork / "stdout.txt").string() +
                          " 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path &p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string stderr_text() {
  std::ifstream in(kWork / "stderr.txt");
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workspace, "gen-synthetic, trace, eval and render") {
  const std::string w = kWork.string();
  REQUIRE(cli("gen-synthetic --kind grid --size 256 --rows 2 --cols 2 --seed 3 --out " + w + "/tile") == 0);
  CHECK(fs::exists(kWork / "tile" / "grid.json"));
  CHECK(fs::exists(kWork / "tile" / "grid.png"));

  const std::string gt = w + "/tile/grid.json";
  REQUIRE(cli("trace --predictor oracle --aerial " + w + "/tile/grid.png --truth " + gt + " --out " + w + "/run") == 0);
  for (const char *f : {"graph.json", "report.json", "history.png", "trace.jsonl"}) CHECK(fs::exists(kWork / "run" / f));
  const json report = read_json(kWork / "run" / "report.json");
  CHECK(report.contains("config"));
  CHECK(report["run"]["steps"].get<int>() > 0);
  const json graph = read_json(kWork / "run" / "graph.json");
  CHECK(graph["format"] == "roadgraph-v1");
  CHECK(graph["provenance"].contains("config"));
  CHECK(graph["provenance"].contains("inputs"));

  REQUIRE(cli("eval --gt " + gt + " --pred " + gt + " --out " + w + "/self.json") == 0);
  const json self = read_json(kWork / "self.json");
  CHECK(self["topo"]["f1"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(self["apls"]["score"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  REQUIRE(cli("eval --gt " + gt + " --pred " + w + "/run/graph.json --out " + w + "/ev.json --svg " + w + "/ev.svg") == 0);
  CHECK(read_json(kWork / "ev.json")["topo"]["f1"].get<double>() >= 0.95);
  CHECK(fs::exists(kWork / "ev.svg"));

  CHECK(cli("render --gt " + gt + " --pred " + w + "/run/graph.json --aerial " + w + "/tile/grid.png --png " + w +
            "/ov.png --svg " + w + "/ov.svg") == 0);
  CHECK(roadtrace::read_png(kWork / "ov.png").width() == 256);
}

TEST_CASE_FIXTURE(Workspace, "sample then score-predictor with the oracle") {
  const std::string w = kWork.string();
  REQUIRE(cli("gen-synthetic --kind tree --size 256 --nodes 6 --seed 2 --out " + w + "/tile") == 0);
  const std::string gt = w + "/tile/tree.json";
  REQUIRE(cli("sample --graph " + gt + " --aerial " + w + "/tile/tree.png --set expert.noise_amplitude=0 --out " + w +
              "/samples") == 0);
  const json manifest = read_json(kWork / "samples" / "manifest.json");
  CHECK(manifest["samples"].size() > 0);
  CHECK(manifest["config"].contains("inputs"));
  REQUIRE(cli("score-predictor --manifest " + w + "/samples/manifest.json --predictor oracle --truth " + gt +
              " --out " + w + "/scores.json") == 0);
  const json scores = read_json(kWork / "scores.json");
  CHECK(scores["aggregate"]["coord"].get<double>() == 0.0);
  CHECK(scores["aggregate"]["ins"].get<double>() == 0.0);
  CHECK(scores["aggregate"]["prob"].get<double>() == doctest::Approx(1e-7).epsilon(1e-3));
}

TEST_CASE_FIXTURE(Workspace, "check-protocol against the bundled server") {
  const std::string server = std::string(ROADTRACE_CLI) + " serve --truth ";
  REQUIRE(cli("gen-synthetic --kind ring --size 256 --seed 1 --out " + kWork.string()) == 0);
  CHECK(cli("check-protocol '" + server + (kWork / "ring.json").string() + "'") == 0);
  CHECK(cli(std::string("check-protocol '") + ROADTRACE_PYTHON + " " + ROADTRACE_FIXTURE_DIR +
            "/dummy_predictor.py --mode garbage'") == 3);
}

TEST_CASE_FIXTURE(Workspace, "exit codes for validation and runtime errors") {
  CHECK(cli("trace --no-such-flag") == 2);
  CHECK(cli("eval --gt /nonexistent.json --pred /nonexistent.json") == 2);
  std::ofstream(kWork / "bad.json") << R"({"format":"roadgraph-v1","vertices":[[0,0]],"edges":[[0,4]]})";
  CHECK(cli("eval --gt " + (kWork / "bad.json").string() + " --pred " + (kWork / "bad.json").string()) == 2);
  CHECK(stderr_text().find("edges[0]") != std::string::npos);
  CHECK(cli("trace --set engine.prob_threshold=7 --truth " + (kWork / "bad.json").string()) == 2);
  CHECK(cli("gen-synthetic --kind spiral --out " + kWork.string()) == 2);
}
