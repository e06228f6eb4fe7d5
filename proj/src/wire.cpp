#include "roadtrace/wire.hpp"

#include "roadtrace/codec.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

extern char **environ;

namespace roadtrace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

int remaining_ms(Clock::time_point deadline) {
  if (deadline == Clock::time_point::max()) return -1;
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return static_cast<int>(std::clamp<long long>(left, 0, 1 << 30));
}

Clock::time_point deadline_after(std::chrono::milliseconds timeout) {
  return timeout.count() <= 0 ? Clock::time_point::max() : Clock::now() + timeout;
}

std::string b64_png(const GridMap &m) { return base64_encode(encode_png(m)); }

GridMap png_field(const json &j, const char *key) {
  if (!j.contains(key) || !j[key].is_string()) throw PredictorError(std::string("missing string field '") + key + "'");
  try {
    return decode_png(base64_decode(j[key].get<std::string>()));
  } catch (const std::exception &e) {
    throw PredictorError(std::string(key) + ": " + e.what());
  }
}

GridMap gray_png(const std::string &b64, const std::string &what) {
  GridMap m;
  try {
    m = decode_png(base64_decode(b64));
  } catch (const std::exception &e) {
    throw PredictorError(what + ": " + e.what());
  }
  if (m.channels() != 1) throw PredictorError(what + ": expected a grayscale PNG");
  return m;
}

double finite_number(const json &j, const char *key, const std::string &where) {
  if (!j.contains(key) || !j[key].is_number()) throw PredictorError(where + ": missing number '" + key + "'");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw PredictorError(where + ": '" + key + "' is not finite");
  return v;
}

}  // namespace

Connection::Connection(int read_fd, int write_fd, pid_t child)
    : read_fd_(read_fd), write_fd_(write_fd), child_(child) {
  ignore_sigpipe();
}

Connection::~Connection() { close(); }

void Connection::close() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
  broken_ = true;
  if (child_ > 0) {
    // Closing stdin asks the server to exit; give it a moment, then insist.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (waitpid(child_, &status, WNOHANG) == child_) {
        child_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    kill(child_, SIGKILL);
    waitpid(child_, &status, 0);
    child_ = -1;
  }
}

std::unique_ptr<Connection> Connection::spawn(const std::string &command) {
  int to_child[2], from_child[2];
  if (pipe2(to_child, O_CLOEXEC) != 0) throw WireError(std::string("pipe: ") + std::strerror(errno));
  if (pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw WireError(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  const char *argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char *const *>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw WireError(std::string("cannot start predictor: ") + std::strerror(rc));
  }
  return std::make_unique<Connection>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Connection> Connection::connect_unix(const std::string &path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof(addr.sun_path)) throw WireError("socket path too long: " + path);
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw WireError(std::string("socket: ") + std::strerror(errno));
  if (connect(fd, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    throw WireError("cannot connect to " + path + ": " + std::strerror(err));
  }
  return std::make_unique<Connection>(fd, fd);
}

void Connection::write_frame(const std::string &payload) {
  if (broken_) throw WireError("connection is closed");
  if (payload.size() > kMaxFrameBytes) throw WireError("frame exceeds size limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string buf;
  buf.reserve(4 + payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) buf.push_back(static_cast<char>((n >> shift) & 0xff));
  buf += payload;
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t w = ::write(write_fd_, buf.data() + off, buf.size() - off);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) {
      broken_ = true;
      throw WireError(std::string("write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(w);
  }
}

bool Connection::read_exact(char *dst, std::size_t n, Clock::time_point deadline, bool at_start) {
  std::size_t got = 0;
  while (got < n) {
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) {
      broken_ = true;
      throw WireError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) {
      // A late answer would desynchronize the stream, so give up on it.
      broken_ = true;
      throw WireError("timed out waiting for predictor");
    }
    const ssize_t r = ::read(read_fd_, dst + got, n - got);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) {
      broken_ = true;
      throw WireError(std::string("read failed: ") + std::strerror(errno));
    }
    if (r == 0) {
      broken_ = true;
      if (at_start && got == 0) return false;
      throw WireError("stream ended inside a frame");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

std::optional<std::string> Connection::read_frame(std::chrono::milliseconds timeout) {
  if (broken_) throw WireError("connection is closed");
  const auto deadline = deadline_after(timeout);
  unsigned char head[4];
  if (!read_exact(reinterpret_cast<char *>(head), 4, deadline, true)) return std::nullopt;
  const std::uint32_t n = (std::uint32_t(head[0]) << 24) | (std::uint32_t(head[1]) << 16) |
                          (std::uint32_t(head[2]) << 8) | std::uint32_t(head[3]);
  if (n > kMaxFrameBytes) {
    broken_ = true;
    throw WireError("frame of " + std::to_string(n) + " bytes exceeds size limit");
  }
  std::string payload(n, '\0');
  read_exact(payload.data(), n, deadline, false);
  return payload;
}

std::string handshake_message(int n_queries, int roi_size) {
  return json{{"proto", kProtocolName}, {"n_queries", n_queries}, {"roi_size", roi_size}}.dump();
}

std::string request_message(const PredictorRequest &req) {
  return json{{"id", req.id},
              {"center", {req.center.x(), req.center.y()}},
              {"rgb_png", b64_png(req.rgb)},
              {"hist_png", b64_png(req.history)}}
      .dump();
}

std::string response_message(std::uint64_t id, const PredictorOutput &out) {
  json cands = json::array();
  for (const Candidate &c : out.candidates)
    cands.push_back({{"dx", c.offset.x()}, {"dy", c.offset.y()}, {"p", c.probability}});
  json j{{"id", id}, {"candidates", std::move(cands)}};
  const bool all_masks = !out.candidates.empty() &&
                         std::all_of(out.candidates.begin(), out.candidates.end(),
                                     [](const Candidate &c) { return c.mask.has_value(); });
  if (all_masks) {
    json masks = json::array();
    for (const Candidate &c : out.candidates) masks.push_back(b64_png(*c.mask));
    j["masks_png"] = std::move(masks);
  }
  if (out.segmentation) j["seg_png"] = b64_png(*out.segmentation);
  if (out.intersection) j["int_png"] = b64_png(*out.intersection);
  return j.dump();
}

PredictorOutput parse_response(const std::string &payload, std::uint64_t expected_id) {
  const json j = json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw PredictorError("response is not a JSON object");
  if (j.contains("error")) throw PredictorError("predictor reported: " + j["error"].dump());
  if (!j.contains("id") || !j["id"].is_number_unsigned() || j["id"].get<std::uint64_t>() != expected_id)
    throw PredictorError("response id does not match request " + std::to_string(expected_id));
  if (!j.contains("candidates") || !j["candidates"].is_array())
    throw PredictorError("response has no 'candidates' array");
  PredictorOutput out;
  const json &cands = j["candidates"];
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string where = "candidates[" + std::to_string(i) + "]";
    if (!cands[i].is_object()) throw PredictorError(where + ": not an object");
    Candidate c;
    c.offset = Point2(finite_number(cands[i], "dx", where), finite_number(cands[i], "dy", where));
    c.probability = finite_number(cands[i], "p", where);
    out.candidates.push_back(std::move(c));
  }
  if (j.contains("masks_png")) {
    const json &masks = j["masks_png"];
    if (!masks.is_array() || masks.size() != cands.size())
      throw PredictorError("'masks_png' must hold one mask per candidate");
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (!masks[i].is_string()) throw PredictorError("masks_png[" + std::to_string(i) + "]: not a string");
      out.candidates[i].mask = gray_png(masks[i].get<std::string>(), "masks_png[" + std::to_string(i) + "]");
    }
  }
  if (j.contains("seg_png")) out.segmentation = gray_png(j["seg_png"].get<std::string>(), "seg_png");
  if (j.contains("int_png")) out.intersection = gray_png(j["int_png"].get<std::string>(), "int_png");
  return out;
}

ExternalPredictor::ExternalPredictor(std::unique_ptr<Connection> conn, ExternalOptions opt)
    : conn_(std::move(conn)), opt_(opt) {
  conn_->write_frame(handshake_message(opt_.n_queries, opt_.roi_size));
  const auto ack = conn_->read_frame(opt_.timeout);
  if (!ack) throw PredictorError("predictor closed the stream during the handshake");
  const json j = json::parse(*ack, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw PredictorError("handshake reply is not a JSON object");
  if (j.value("proto", std::string()) != kProtocolName)
    throw PredictorError("predictor speaks " + j.value("proto", std::string("an unknown protocol")));
  if (!j.value("ok", false))
    throw PredictorError("handshake rejected: " + j.value("error", std::string("no reason given")));
}

PredictorOutput ExternalPredictor::predict(const PredictorRequest &request) {
  if (!alive()) throw WireError("predictor connection is closed");
  conn_->write_frame(request_message(request));
  const auto reply = conn_->read_frame(opt_.timeout);
  if (!reply) throw WireError("predictor closed the stream");
  PredictorOutput out = parse_response(*reply, request.id);
  validate_output(out, opt_.n_queries, opt_.roi_size);
  return out;
}

std::size_t serve(Predictor &predictor, int in_fd, int out_fd, int n_queries, int roi_size) {
  Connection conn(in_fd, out_fd);
  const auto hello = conn.read_frame(std::chrono::milliseconds(0));
  if (!hello) return 0;
  const json h = json::parse(*hello, nullptr, false);
  std::string problem;
  if (h.is_discarded() || !h.is_object())
    problem = "handshake is not a JSON object";
  else if (h.value("proto", std::string()) != kProtocolName)
    problem = "unsupported protocol " + h.value("proto", std::string("(none)"));
  else if (h.value("n_queries", -1) != n_queries || h.value("roi_size", -1) != roi_size)
    problem = "server is configured for n_queries=" + std::to_string(n_queries) +
              " roi_size=" + std::to_string(roi_size);
  if (!problem.empty()) {
    conn.write_frame(json{{"proto", kProtocolName}, {"ok", false}, {"error", problem}}.dump());
    spdlog::error("rejected handshake: {}", problem);
    return 0;
  }
  conn.write_frame(json{{"proto", kProtocolName}, {"ok", true}}.dump());

  std::size_t served = 0;
  while (auto frame = conn.read_frame(std::chrono::milliseconds(0))) {
    const json r = json::parse(*frame, nullptr, false);
    std::uint64_t id = 0;
    try {
      if (r.is_discarded() || !r.is_object()) throw PredictorError("request is not a JSON object");
      if (!r.contains("id") || !r["id"].is_number_unsigned()) throw PredictorError("request has no id");
      id = r["id"].get<std::uint64_t>();
      PredictorRequest req;
      req.id = id;
      if (!r.contains("center") || !r["center"].is_array() || r["center"].size() != 2)
        throw PredictorError("request has no center");
      req.center = Point2(r["center"][0].get<double>(), r["center"][1].get<double>());
      req.rgb = png_field(r, "rgb_png");
      req.history = png_field(r, "hist_png");
      conn.write_frame(response_message(id, predictor.predict(req)));
    } catch (const WireError &) {
      throw;
    } catch (const std::exception &e) {
      spdlog::warn("request {}: {}", id, e.what());
      conn.write_frame(json{{"id", id}, {"error", e.what()}}.dump());
    }
    ++served;
  }
  return served;
}

bool ConformanceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConformanceCheck &c) { return c.passed || !c.required; });
}

std::string ConformanceReport::to_json() const {
  json list = json::array();
  for (const auto &c : checks)
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"required", c.required}, {"detail", c.detail}});
  return json{{"protocol", kProtocolName}, {"passed", passed()}, {"checks", std::move(list)}}.dump(2);
}

namespace {

PredictorRequest probe_request(std::uint64_t id, int roi_size) {
  PredictorRequest req;
  req.id = id;
  req.center = Point2(roi_size / 2.0 + static_cast<double>(id % 7), roi_size / 2.0);
  req.rgb = GridMap(roi_size, roi_size, 3);
  for (int y = 0; y < roi_size; ++y)
    for (int x = 0; x < roi_size; ++x) {
      req.rgb.at(x, y, 0) = static_cast<std::uint8_t>(x * 255 / roi_size);
      req.rgb.at(x, y, 1) = static_cast<std::uint8_t>(y * 255 / roi_size);
      req.rgb.at(x, y, 2) = static_cast<std::uint8_t>(y == roi_size / 2 ? 200 : 60);
    }
  req.history = GridMap(roi_size, roi_size);
  return req;
}

}  // namespace

ConformanceReport check_protocol(const std::string &command, const ExternalOptions &opt) {
  ConformanceReport report;
  const auto add = [&](std::string name, bool ok, std::string detail, bool required = true) {
    report.checks.push_back({std::move(name), ok, required, std::move(detail)});
    return ok;
  };

  std::unique_ptr<Connection> conn;
  try {
    conn = Connection::spawn(command);
  } catch (const std::exception &e) {
    add("start", false, e.what());
    return report;
  }
  add("start", true, "pid " + std::to_string(conn->child()));

  std::unique_ptr<ExternalPredictor> client;
  try {
    client = std::make_unique<ExternalPredictor>(std::move(conn), opt);
    add("handshake", true, "acknowledged");
  } catch (const std::exception &e) {
    add("handshake", false, e.what());
    return report;
  }

  // One well-formed request, checked field by field.
  try {
    const auto t0 = Clock::now();
    const PredictorOutput out = client->predict(probe_request(1, opt.roi_size));
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    const bool masks = std::all_of(out.candidates.begin(), out.candidates.end(),
                                   [](const Candidate &c) { return c.mask.has_value(); });
    add("response_schema", true,
        std::to_string(out.candidates.size()) + " candidates" + (masks ? " with masks" : ", no masks") +
            ", " + std::to_string(ms) + " ms");
  } catch (const std::exception &e) {
    add("response_schema", false, e.what());
  }

  // Several requests in a row, each answered with its own id.
  try {
    for (std::uint64_t id : {100u, 101u, 7u}) client->predict(probe_request(id, opt.roi_size));
    add("sequential_ids", true, "3 requests answered in order");
  } catch (const std::exception &e) {
    add("sequential_ids", false, e.what());
  }

  // End of input should make the server exit on its own.
  {
    const auto t0 = Clock::now();
    client.reset();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    add("clean_shutdown", ms < 1000, "closed in " + std::to_string(ms) + " ms", false);
  }

  // A second process must refuse a handshake for another protocol version.
  try {
    auto probe = Connection::spawn(command);
    probe->write_frame(json{{"proto", "rngpred-v0"}, {"n_queries", opt.n_queries}, {"roi_size", opt.roi_size}}.dump());
    const auto reply = probe->read_frame(opt.timeout);
    if (!reply) {
      add("version_mismatch", true, "stream closed");
    } else {
      const json j = json::parse(*reply, nullptr, false);
      const bool refused = j.is_object() && !j.value("ok", false);
      add("version_mismatch", refused, refused ? "refused" : "accepted an unknown protocol version");
    }
  } catch (const WireError &e) {
    add("version_mismatch", true, std::string("connection dropped: ") + e.what());
  } catch (const std::exception &e) {
    add("version_mismatch", false, e.what());
  }
  return report;
}

}  // namespace roadtrace
