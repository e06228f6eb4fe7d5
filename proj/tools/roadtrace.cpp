// roadtrace: expert sampling, graph tracing, evaluation and predictor tooling.

#include "roadtrace/codec.hpp"
#include "roadtrace/config.hpp"
#include "roadtrace/engine.hpp"
#include "roadtrace/expert.hpp"
#include "roadtrace/graph_io.hpp"
#include "roadtrace/losses.hpp"
#include "roadtrace/metrics.hpp"
#include "roadtrace/render.hpp"
#include "roadtrace/samples.hpp"
#include "roadtrace/synthetic.hpp"
#include "roadtrace/wire.hpp"

#include "CLI11.hpp"
#include "json.hpp"
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace roadtrace;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Validation problems found after argument parsing.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  fs::path config_file;
  std::vector<std::string> overrides;
  RunConfig cfg;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a config value, e.g. engine.snap_radius=4");
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json input_hash(const fs::path &p) { return {{"path", p.string()}, {"sha256", sha256_file(p)}}; }

// One tile of a dataset manifest.
struct Tile {
  std::string name;
  fs::path graph;
  fs::path aerial;
  fs::path heatmap;  // optional key-point map for seeding
};

// {"format":"roadtrace-dataset-v1","tiles":[{"name":..,"graph":..,"aerial":..}]}
// with paths relative to the manifest.
std::vector<Tile> load_dataset(const fs::path &manifest) {
  std::ifstream in(manifest);
  if (!in) throw UsageError("cannot read dataset " + manifest.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "roadtrace-dataset-v1" || !doc.contains("tiles"))
    throw FormatError(manifest.string() + ": not a roadtrace-dataset-v1 manifest");
  std::vector<Tile> tiles;
  for (const auto &t : doc["tiles"]) {
    Tile tile{t.at("name").get<std::string>(), {}, {}, {}};
    if (t.contains("graph")) tile.graph = manifest.parent_path() / t["graph"].get<std::string>();
    tile.aerial = manifest.parent_path() / t.at("aerial").get<std::string>();
    if (t.contains("heatmap")) tile.heatmap = manifest.parent_path() / t["heatmap"].get<std::string>();
    tiles.push_back(std::move(tile));
  }
  return tiles;
}

// Runs fn(i) for i < n on `jobs` threads; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < std::max(1, jobs); ++k) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::unique_ptr<Connection> open_external(const RunConfig &cfg) {
  if (!cfg.predictor.socket.empty()) return Connection::connect_unix(cfg.predictor.socket);
  if (cfg.predictor.command.empty())
    throw UsageError("external predictor needs predictor.command or predictor.socket");
  return Connection::spawn(cfg.predictor.command);
}

// ---------------------------------------------------------------- gen-synthetic

struct GenArgs {
  std::string kind = "grid";
  int size = 512;
  std::uint64_t seed = 0;
  int rows = 3, cols = 3, spokes = 0, nodes = 12, max_degree = 4;
  std::size_t suite = 0;
  fs::path out;
};

int cmd_gen(const GenArgs &a) {
  fs::create_directories(a.out);
  std::vector<SyntheticCase> cases;
  if (a.suite > 0) {
    cases = synthetic_suite(a.suite, a.seed == 0 ? 1 : a.seed);
  } else {
    SyntheticSpec s;
    s.kind = synthetic_kind_from(a.kind);
    s.width = s.height = a.size;
    s.seed = a.seed;
    s.rows = a.rows;
    s.cols = a.cols;
    s.spokes = a.spokes;
    s.nodes = a.nodes;
    s.max_degree = a.max_degree;
    cases.push_back({std::string(to_string(s.kind)), s, make_synthetic(s)});
  }
  json tiles = json::array();
  for (const auto &c : cases) {
    const json prov{{"generator", "gen-synthetic"}, {"kind", to_string(c.spec.kind)}, {"seed", c.spec.seed}};
    save_graph(c.graph, a.out / (c.name + ".json"), prov.dump());
    write_png(synthetic_aerial(c.graph, c.spec.width, c.spec.height, c.spec.seed), a.out / (c.name + ".png"));
    write_png(intersection_label(c.graph, c.spec.width, c.spec.height, 3.0), a.out / (c.name + "_keypoints.png"));
    tiles.push_back({{"name", c.name},
                     {"graph", c.name + ".json"},
                     {"aerial", c.name + ".png"},
                     {"heatmap", c.name + "_keypoints.png"}});
    spdlog::info("{}: {} vertices, {} edges, max degree {}", c.name, c.graph.num_vertices(),
                 c.graph.num_edges(), c.graph.max_degree());
  }
  write_text(a.out / "dataset.json",
             json{{"format", "roadtrace-dataset-v1"}, {"tiles", std::move(tiles)}}.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  Common common;
  fs::path graph, aerial, dataset, out;
  std::string tile_id;
  int jobs = 1;
};

int cmd_sample(SampleArgs &a) {
  const RunConfig &cfg = a.common.cfg;
  std::vector<Tile> tiles;
  if (!a.dataset.empty()) {
    tiles = load_dataset(a.dataset);
  } else {
    if (a.graph.empty() || a.aerial.empty()) throw UsageError("sample needs --graph and --aerial, or --dataset");
    tiles.push_back({a.tile_id.empty() ? a.aerial.stem().string() : a.tile_id, a.graph, a.aerial, {}});
  }
  const bool nested = !a.dataset.empty();
  parallel_for(tiles.size(), a.jobs, [&](std::size_t i) {
    const Tile &t = tiles[i];
    if (t.graph.empty()) throw UsageError(t.name + ": dataset entry has no graph");
    const RoadGraph g = load_graph(t.graph);
    const GridMap aerial = read_png(t.aerial);
    const json extra{{"config", to_json(cfg)}, {"inputs", {{"graph", input_hash(t.graph)}, {"aerial", input_hash(t.aerial)}}}};
    const fs::path dir = nested ? a.out / t.name : a.out;
    const auto s = emit_samples(g, aerial, cfg.expert, dir, t.name, extra.dump());
    spdlog::info("{}: {} samples, coverage {:.4f}, {} degree violations", t.name, s.samples, s.coverage,
                 s.degree_violations);
  });
  return 0;
}

// ---------------------------------------------------------------- trace

struct TraceArgs {
  Common common;
  fs::path aerial, heatmap, truth, dataset, out;
  std::string predictor;
  int jobs = 1;
};

json report_json(const RunReport &r) {
  return {{"steps", r.steps},
          {"traces", r.traces},
          {"seeds", r.seeds},
          {"predictor_failures", r.predictor_failures},
          {"dropped_candidates", r.dropped_candidates},
          {"forced_termination", r.forced_termination},
          {"vertices", r.vertices},
          {"edges", r.edges}};
}

void trace_tile(const RunConfig &cfg, const Tile &t, const fs::path &heatmap_file, const fs::path &out) {
  const GridMap aerial = read_png(t.aerial);
  json inputs{{"aerial", input_hash(t.aerial)}};
  std::unique_ptr<Predictor> base;
  GridMap heatmap;
  if (cfg.predictor.kind == "oracle") {
    if (t.graph.empty()) throw UsageError(t.name + ": the oracle predictor needs a ground-truth graph");
    RoadGraph truth = load_graph(t.graph);
    if (truth.width == 0) truth.width = aerial.width();
    if (truth.height == 0) truth.height = aerial.height();
    inputs["truth"] = input_hash(t.graph);
    auto oracle = std::make_unique<OraclePredictor>(truth, cfg.oracle_options());
    heatmap = oracle->intersection_map();
    base = std::move(oracle);
  } else {
    base = std::make_unique<ExternalPredictor>(open_external(cfg), cfg.external_options());
  }
  Predictor *predictor = base.get();
  std::unique_ptr<NoisyPredictor> noisy;
  if (!cfg.noise.is_zero()) {
    noisy = std::make_unique<NoisyPredictor>(*base, cfg.noise);
    predictor = noisy.get();
  }
  if (!heatmap_file.empty()) {
    heatmap = read_png(heatmap_file);
    inputs["heatmap"] = input_hash(heatmap_file);
  } else if (heatmap.empty()) {
    heatmap = scan_heatmap(aerial, *predictor, cfg.engine);
  }
  if (heatmap.channels() != 1) throw UsageError("heatmap must be a grayscale image");

  const auto t0 = std::chrono::steady_clock::now();
  const RunResult result = run(aerial, heatmap, *predictor, cfg.engine);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out);
  const json prov{{"tile", t.name}, {"config", to_json(cfg)}, {"inputs", inputs}};
  save_graph(result.graph, out / "graph.json", prov.dump());
  json report = prov;
  report["run"] = report_json(result.report);
  report["seconds"] = seconds;
  write_text(out / "report.json", report.dump(2) + "\n");
  write_png(result.history, out / "history.png");
  std::ofstream log(out / "trace.jsonl");
  for (const StepRecord &r : result.trace) log << to_json_line(r) << '\n';
  spdlog::info("{}: {} steps, {} traces, {} vertices, {} edges, {} predictor failures ({:.2f} s)", t.name,
               result.report.steps, result.report.traces, result.report.vertices, result.report.edges,
               result.report.predictor_failures, seconds);
}

int cmd_trace(TraceArgs &a) {
  RunConfig &cfg = a.common.cfg;
  if (!a.predictor.empty()) cfg.predictor.kind = a.predictor;
  cfg.validate();
  if (!a.dataset.empty()) {
    if (!a.heatmap.empty()) throw UsageError("--heatmap cannot be combined with --dataset");
    const auto tiles = load_dataset(a.dataset);
    // Oracle runs seed from ground truth; other predictors use the listed
    // heatmap when there is one.
    parallel_for(tiles.size(), a.jobs, [&](std::size_t i) {
      const fs::path heat = cfg.predictor.kind == "oracle" ? fs::path() : tiles[i].heatmap;
      trace_tile(cfg, tiles[i], heat, a.out / tiles[i].name);
    });
    return 0;
  }
  if (a.aerial.empty()) throw UsageError("trace needs --aerial or --dataset");
  trace_tile(cfg, {a.aerial.stem().string(), a.truth, a.aerial, {}}, a.heatmap, a.out);
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  fs::path gt, pred, out, svg;
};

int cmd_eval(EvalArgs &a) {
  const RunConfig &cfg = a.common.cfg;
  const RoadGraph gt = load_graph(a.gt);
  const RoadGraph pred = load_graph(a.pred);
  const MetricReport m = evaluate(gt, pred, cfg.topo, cfg.apls);
  json report = json::parse(to_json(m));
  report["inputs"] = {{"gt", input_hash(a.gt)}, {"pred", input_hash(a.pred)}};
  report["config"] = to_json(cfg);
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  if (!a.svg.empty()) {
    const int w = gt.width ? gt.width : pred.width;
    const int h = gt.height ? gt.height : pred.height;
    if (w <= 0 || h <= 0) throw UsageError("graphs carry no tile size; cannot render");
    write_text(a.svg, render_svg(gt, pred, w, h));
  }
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  fs::path gt, pred, aerial, svg, png;
  int width = 0, height = 0;
};

int cmd_render(const RenderArgs &a) {
  if (a.gt.empty() && a.pred.empty()) throw UsageError("render needs --gt and/or --pred");
  if (a.svg.empty() && a.png.empty()) throw UsageError("render needs --svg and/or --png");
  const RoadGraph gt = a.gt.empty() ? RoadGraph() : load_graph(a.gt);
  const RoadGraph pred = a.pred.empty() ? RoadGraph() : load_graph(a.pred);
  GridMap base;
  if (!a.aerial.empty()) base = read_png(a.aerial);
  int w = a.width, h = a.height;
  if (w <= 0) w = !base.empty() ? base.width() : std::max(gt.width, pred.width);
  if (h <= 0) h = !base.empty() ? base.height() : std::max(gt.height, pred.height);
  if (w <= 0 || h <= 0) throw UsageError("cannot infer the canvas size; pass --width/--height");
  if (!a.svg.empty()) {
    RenderStyle style;
    if (!base.empty()) style.background_png = base64_encode(encode_png(base));
    write_text(a.svg, render_svg(gt, pred, w, h, style));
  }
  if (!a.png.empty()) {
    if (base.empty()) base = GridMap(w, h, 3, 32);
    write_png(render_overlay(base, gt, pred), a.png);
  }
  return 0;
}

// ---------------------------------------------------------------- score-predictor

struct ScoreArgs {
  Common common;
  fs::path manifest, truth, out;
  std::string predictor;
};

int cmd_score(ScoreArgs &a) {
  RunConfig &cfg = a.common.cfg;
  if (!a.predictor.empty()) cfg.predictor.kind = a.predictor;
  cfg.validate();
  const SampleSet set(a.manifest);
  if (set.roi_size() != cfg.engine.roi_size || set.n_queries() != cfg.engine.n_queries)
    throw UsageError("sample set was written with roi_size=" + std::to_string(set.roi_size()) +
                     " n_queries=" + std::to_string(set.n_queries()) + "; set them in the config");
  std::unique_ptr<Predictor> predictor;
  json inputs{{"manifest", input_hash(a.manifest)}};
  if (cfg.predictor.kind == "oracle") {
    if (a.truth.empty()) throw UsageError("the oracle predictor needs --truth");
    predictor = std::make_unique<OraclePredictor>(load_graph(a.truth), cfg.oracle_options());
    inputs["truth"] = input_hash(a.truth);
  } else {
    predictor = std::make_unique<ExternalPredictor>(open_external(cfg), cfg.external_options());
  }

  // Samples are replayed in trajectory order so a stateful oracle sees the
  // same history the expert did.
  json per_sample = json::array();
  LossBreakdown sum;
  std::size_t scored = 0, failures = 0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const TrainingSample s = set.load(k);
    const PredictorRequest req{k, s.center, s.rgb, s.history};
    try {
      const PredictorOutput out = predictor->predict(req);
      validate_output(out, cfg.engine.n_queries, cfg.engine.roi_size);
      const LossBreakdown b = losses(out, s, cfg.loss);
      json row = json::parse(to_json(b));
      row["k"] = k;
      per_sample.push_back(std::move(row));
      sum.seg += b.seg;
      sum.coord += b.coord;
      sum.prob += b.prob;
      sum.ins += b.ins;
      sum.total += b.total;
      ++scored;
    } catch (const PredictorError &e) {
      ++failures;
      per_sample.push_back({{"k", k}, {"error", e.what()}});
      spdlog::warn("sample {}: {}", k, e.what());
    }
  }
  const double n = scored ? static_cast<double>(scored) : 1.0;
  const json aggregate{{"seg", sum.seg / n},     {"coord", sum.coord / n}, {"prob", sum.prob / n},
                       {"ins", sum.ins / n},     {"total", sum.total / n}, {"samples", scored},
                       {"failures", failures}};
  const json report{{"aggregate", aggregate}, {"samples", per_sample}, {"config", to_json(cfg)}, {"inputs", inputs}};
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  return failures && !scored ? kExitRuntime : 0;
}

// ---------------------------------------------------------------- check-protocol / serve

struct CheckArgs {
  Common common;
  std::string command;
};

int cmd_check(CheckArgs &a) {
  const ConformanceReport r = check_protocol(a.command, a.common.cfg.external_options());
  std::cout << r.to_json() << '\n';
  return r.passed() ? 0 : kExitRuntime;
}

struct ServeArgs {
  Common common;
  fs::path truth;
};

int cmd_serve(ServeArgs &a) {
  const RunConfig &cfg = a.common.cfg;
  OraclePredictor oracle(load_graph(a.truth), cfg.oracle_options());
  Predictor *p = &oracle;
  std::unique_ptr<NoisyPredictor> noisy;
  if (!cfg.noise.is_zero()) {
    noisy = std::make_unique<NoisyPredictor>(oracle, cfg.noise);
    p = noisy.get();
  }
  const std::size_t n = serve(*p, STDIN_FILENO, STDOUT_FILENO, cfg.engine.n_queries, cfg.engine.roi_size);
  spdlog::info("served {} requests", n);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  // Standard output may carry protocol frames; logs always go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("roadtrace"));

  CLI::App app{"Road-network graph tracing toolkit"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  GenArgs gen;
  auto *c_gen = app.add_subcommand("gen-synthetic", "Generate synthetic tiles (graph + aerial image)");
  c_gen->add_option("--kind", gen.kind, "grid, ring or tree")->check(CLI::IsMember({"grid", "ring", "tree"}));
  c_gen->add_option("--size", gen.size, "Tile width and height in pixels");
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--rows", gen.rows);
  c_gen->add_option("--cols", gen.cols);
  c_gen->add_option("--spokes", gen.spokes, "Ring hub spokes (0, 3..6)");
  c_gen->add_option("--nodes", gen.nodes, "Tree vertex count");
  c_gen->add_option("--max-degree", gen.max_degree, "Tree degree cap (2..6)");
  c_gen->add_option("--suite", gen.suite, "Generate the standard mix of N tiles instead");
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  SampleArgs sample;
  auto *c_sample = app.add_subcommand("sample", "Write expert training samples");
  add_common(c_sample, sample.common);
  c_sample->add_option("--graph", sample.graph, "Ground-truth roadgraph-v1")->check(CLI::ExistingFile);
  c_sample->add_option("--aerial", sample.aerial, "Aerial tile PNG")->check(CLI::ExistingFile);
  c_sample->add_option("--dataset", sample.dataset, "Dataset manifest (one sub-directory per tile)")
      ->check(CLI::ExistingFile);
  c_sample->add_option("--tile-id", sample.tile_id);
  c_sample->add_option("--jobs", sample.jobs, "Tiles processed in parallel")->check(CLI::PositiveNumber);
  c_sample->add_option("--out", sample.out, "Output directory")->required();

  TraceArgs trace;
  auto *c_trace = app.add_subcommand("trace", "Trace a road graph from an aerial tile");
  add_common(c_trace, trace.common);
  c_trace->add_option("--aerial", trace.aerial, "Aerial tile PNG")->check(CLI::ExistingFile);
  c_trace->add_option("--truth", trace.truth, "Ground truth for the oracle predictor")->check(CLI::ExistingFile);
  c_trace->add_option("--heatmap", trace.heatmap, "Key-point heatmap PNG used for seeding")->check(CLI::ExistingFile);
  c_trace->add_option("--dataset", trace.dataset, "Dataset manifest")->check(CLI::ExistingFile);
  c_trace->add_option("--predictor", trace.predictor, "oracle or external")
      ->check(CLI::IsMember({"oracle", "external"}));
  c_trace->add_option("--jobs", trace.jobs, "Tiles processed in parallel")->check(CLI::PositiveNumber);
  c_trace->add_option("--out", trace.out, "Output directory")->required();

  EvalArgs ev;
  auto *c_eval = app.add_subcommand("eval", "TOPO and APLS of a predicted graph");
  add_common(c_eval, ev.common);
  c_eval->add_option("--gt", ev.gt)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Report file (default: stdout)");
  c_eval->add_option("--svg", ev.svg, "Also write a comparison SVG");

  RenderArgs rd;
  auto *c_render = app.add_subcommand("render", "Draw graphs as SVG or PNG overlay");
  c_render->add_option("--gt", rd.gt)->check(CLI::ExistingFile);
  c_render->add_option("--pred", rd.pred)->check(CLI::ExistingFile);
  c_render->add_option("--aerial", rd.aerial, "Background image")->check(CLI::ExistingFile);
  c_render->add_option("--svg", rd.svg);
  c_render->add_option("--png", rd.png);
  c_render->add_option("--width", rd.width);
  c_render->add_option("--height", rd.height);

  ScoreArgs score;
  auto *c_score = app.add_subcommand("score-predictor", "Loss of a predictor on a sample set");
  add_common(c_score, score.common);
  c_score->add_option("--manifest", score.manifest, "manifest.json written by 'sample'")
      ->required()
      ->check(CLI::ExistingFile);
  c_score->add_option("--predictor", score.predictor, "oracle or external")
      ->check(CLI::IsMember({"oracle", "external"}));
  c_score->add_option("--truth", score.truth, "Ground truth for the oracle predictor")->check(CLI::ExistingFile);
  c_score->add_option("--out", score.out, "Report file (default: stdout)");

  CheckArgs check;
  auto *c_check = app.add_subcommand("check-protocol", "Conformance test of an external predictor");
  add_common(c_check, check.common);
  c_check->add_option("command", check.command, "Shell command that starts the predictor")->required();

  ServeArgs srv;
  auto *c_serve = app.add_subcommand("serve", "Serve the (optionally corrupted) oracle on stdin/stdout");
  add_common(c_serve, srv.common);
  c_serve->add_option("--truth", srv.truth)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    for (Common *c : {&sample.common, &trace.common, &ev.common, &score.common, &check.common, &srv.common})
      c->cfg = load_config(c->config_file, c->overrides);
    if (c_gen->parsed()) return cmd_gen(gen);
    if (c_sample->parsed()) return cmd_sample(sample);
    if (c_trace->parsed()) return cmd_trace(trace);
    if (c_eval->parsed()) return cmd_eval(ev);
    if (c_render->parsed()) return cmd_render(rd);
    if (c_score->parsed()) return cmd_score(score);
    if (c_check->parsed()) return cmd_check(check);
    if (c_serve->parsed()) return cmd_serve(srv);
  } catch (const ConfigError &e) {
    spdlog::error("config: {}", e.what());
    return kExitValidation;
  } catch (const FormatError &e) {
    spdlog::error("input: {}", e.what());
    return kExitValidation;
  } catch (const UsageError &e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument &e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
