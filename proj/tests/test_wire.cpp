#include "doctest.h"
#include "support.hpp"

#include "roadtrace/codec.hpp"
#include "roadtrace/engine.hpp"
#include "roadtrace/wire.hpp"

#include "json.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <thread>

using namespace roadtrace;
using namespace std::chrono_literals;

namespace {

const std::string kFixture = std::string(ROADTRACE_PYTHON) + " " + ROADTRACE_FIXTURE_DIR "/dummy_predictor.py";

// Server thread answering on one pipe pair; the client gets the other ends.
struct Loopback {
  int to_server[2];
  int to_client[2];
  std::thread server;
  std::size_t served = 0;

  Loopback(Predictor &p, int n = 10, int roi = 128) {
    REQUIRE(pipe2(to_server, O_CLOEXEC) == 0);
    REQUIRE(pipe2(to_client, O_CLOEXEC) == 0);
    server = std::thread([this, &p, n, roi] {
      served = serve(p, to_server[0], to_client[1], n, roi);
      ::close(to_client[1]);
    });
  }
  std::unique_ptr<Connection> client() { return std::make_unique<Connection>(to_client[0], to_server[1]); }
  ~Loopback() {
    if (server.joinable()) server.join();
    ::close(to_server[0]);
  }
};

PredictorOutput fixed_output() {
  PredictorOutput out;
  out.candidates.resize(10);
  out.candidates[0] = {{20, 0}, 0.9, GridMap(128, 128)};
  out.candidates[1] = {{-3.25, 7.5}, 0.75, GridMap(128, 128)};
  for (std::size_t i = 2; i < 10; ++i) out.candidates[i].mask = GridMap(128, 128);
  out.candidates[0].mask->at(64, 64) = 255;
  return out;
}

}  // namespace

TEST_CASE("frames round trip through a pipe") {
  int fds[2];
  REQUIRE(pipe2(fds, O_CLOEXEC) == 0);
  Connection c(fds[0], fds[1]);
  c.write_frame("{\"a\":1}");
  c.write_frame("");
  CHECK(*c.read_frame(1000ms) == "{\"a\":1}");
  CHECK(*c.read_frame(1000ms) == "");
  CHECK_THROWS_AS(c.read_frame(50ms), WireError);
  CHECK_FALSE(c.alive());
}

TEST_CASE("frame header is big-endian") {
  int fds[2];
  REQUIRE(pipe2(fds, O_CLOEXEC) == 0);
  Connection writer(-1, fds[1]);
  writer.write_frame(std::string(258, 'x'));
  unsigned char head[4];
  REQUIRE(::read(fds[0], head, 4) == 4);
  CHECK(head[0] == 0);
  CHECK(head[1] == 0);
  CHECK(head[2] == 1);
  CHECK(head[3] == 2);
  ::close(fds[0]);
}

TEST_CASE("messages follow the documented schema") {
  const auto hs = nlohmann::json::parse(handshake_message(10, 128));
  CHECK(hs == nlohmann::json{{"proto", "rngpred-v1"}, {"n_queries", 10}, {"roi_size", 128}});

  PredictorRequest req{42, {12.5, 7.0}, GridMap(128, 128, 3), GridMap(128, 128)};
  const auto rq = nlohmann::json::parse(request_message(req));
  CHECK(rq["id"] == 42);
  CHECK(rq["center"] == nlohmann::json::array({12.5, 7.0}));
  const auto rgb = base64_decode(rq["rgb_png"].get<std::string>());
  CHECK(decode_png(rgb) == req.rgb);

  const auto rs = nlohmann::json::parse(response_message(42, fixed_output()));
  CHECK(rs["id"] == 42);
  CHECK(rs["candidates"].size() == 10);
  CHECK(rs["candidates"][1]["dx"] == -3.25);
  CHECK(rs["masks_png"].size() == 10);

  const PredictorOutput back = parse_response(response_message(42, fixed_output()), 42);
  CHECK(back.candidates[1].offset == Point2(-3.25, 7.5));
  CHECK(back.candidates[0].mask == fixed_output().candidates[0].mask);
  CHECK_THROWS_AS(parse_response(response_message(42, fixed_output()), 43), PredictorError);
  CHECK_THROWS_AS(parse_response("not json", 1), PredictorError);
  CHECK_THROWS_AS(parse_response(R"({"id":1,"error":"nope"})", 1), PredictorError);
  // Unknown fields are ignored.
  CHECK(parse_response(R"({"id":1,"candidates":[{"dx":1,"dy":2,"p":0.5,"extra":true}],"x":0})", 1)
            .candidates.size() == 1);
}

TEST_CASE("loopback: the engine consumes external candidates verbatim") {
  FixedPredictor fixed(fixed_output());
  Loopback lb(fixed);
  {
    ExternalPredictor ext(lb.client(), {});
    PredictorRequest req{7, {64, 64}, GridMap(128, 128, 3), GridMap(128, 128)};
    const PredictorOutput out = ext.predict(req);
    const PredictorOutput ref = fixed_output();
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(out.candidates[i].offset == ref.candidates[i].offset);
      CHECK(out.candidates[i].probability == ref.candidates[i].probability);
    }
    CHECK(ext.predict(req).candidates[0].mask == ref.candidates[0].mask);
  }
  lb.server.join();
  CHECK(lb.served == 2);
}

TEST_CASE("serve refuses a mismatched handshake") {
  FixedPredictor fixed(fixed_output());
  Loopback lb(fixed, 10, 128);
  ExternalOptions opt;
  opt.n_queries = 6;
  CHECK_THROWS_AS(ExternalPredictor(lb.client(), opt), PredictorError);
}

TEST_CASE("dummy external predictor drives a run") {
  auto conn = Connection::spawn(kFixture);
  ExternalPredictor ext(std::move(conn), {});
  CandidateBuffer seeds;
  seeds.push({20, 64});
  EngineConfig cfg;
  cfg.max_steps = 8;
  const GridMap canvas(256, 128, 3);
  TracingAgent agent(canvas, ext, cfg, std::move(seeds));
  while (agent.step()) {
  }
  CHECK(agent.report().predictor_failures == 0);
  CHECK(agent.report().forced_termination);
  CHECK(agent.builder().num_vertices() == 9);
  CHECK(*agent.position() == Point2(20 + 8 * 20, 64));
}

TEST_CASE("fault injection: server dies mid-run") {
  ExternalPredictor ext(Connection::spawn(kFixture + " --mode die-after --after 3"), {});
  CandidateBuffer seeds;
  for (int i = 0; i < 3; ++i) seeds.push({20.0 + 10 * i, 20.0 + 40 * i});
  const GridMap canvas(512, 256, 3);
  TracingAgent agent(canvas, ext, {}, std::move(seeds));
  while (agent.step()) {
  }
  CHECK(agent.report().predictor_failures >= 1);
  CHECK(agent.builder().edges().size() == 3);
  CHECK(agent.finished());
  CHECK_FALSE(ext.alive());
}

TEST_CASE("fault injection: malformed and slow servers") {
  PredictorRequest req{1, {64, 64}, GridMap(128, 128, 3), GridMap(128, 128)};
  for (const char *mode : {"garbage", "wrong-count", "bad-prob"}) {
    CAPTURE(mode);
    ExternalPredictor ext(Connection::spawn(kFixture + " --mode " + mode), {});
    CHECK_THROWS_AS(ext.predict(req), PredictorError);
  }
  ExternalOptions opt;
  opt.timeout = 300ms;
  ExternalPredictor slow(Connection::spawn(kFixture + " --mode slow --sleep 3"), opt);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(slow.predict(req), WireError);
  CHECK(std::chrono::steady_clock::now() - t0 < 2s);
  CHECK_THROWS_AS(slow.predict(req), PredictorError);
}

TEST_CASE("check_protocol passes a conforming server and fails broken ones") {
  ExternalOptions opt;
  opt.timeout = 3000ms;
  const ConformanceReport ok = check_protocol(kFixture, opt);
  CHECK(ok.passed());
  const auto j = nlohmann::json::parse(ok.to_json());
  CHECK(j["passed"] == true);
  for (const char *mode : {"garbage", "wrong-count", "bad-prob", "accept-any"}) {
    CAPTURE(mode);
    CHECK_FALSE(check_protocol(kFixture + " --mode " + mode, opt).passed());
  }
  CHECK_FALSE(check_protocol("/nonexistent/predictor", opt).passed());
}
