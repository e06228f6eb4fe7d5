#pragma once

#include "roadtrace/predictor.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace roadtrace {

inline constexpr const char *kProtocolName = "rngpred-v1";
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

// Transport failure: closed stream, timeout, oversized or truncated frame.
class WireError : public PredictorError {
 public:
  using PredictorError::PredictorError;
};

// Duplex byte stream carrying frames: a 4-byte big-endian payload length
// followed by that many bytes of UTF-8 JSON.
class Connection {
 public:
  Connection(int read_fd, int write_fd, pid_t child = -1);
  ~Connection();
  Connection(const Connection &) = delete;
  Connection &operator=(const Connection &) = delete;

  // Runs `command` through /bin/sh with its stdin/stdout connected to us.
  static std::unique_ptr<Connection> spawn(const std::string &command);
  static std::unique_ptr<Connection> connect_unix(const std::string &path);

  void write_frame(const std::string &payload);
  // nullopt on a clean end-of-stream before the first byte of a frame.
  std::optional<std::string> read_frame(std::chrono::milliseconds timeout);

  bool alive() const { return !broken_; }
  void close();
  pid_t child() const { return child_; }

 private:
  bool read_exact(char *dst, std::size_t n, std::chrono::steady_clock::time_point deadline, bool at_start);

  int read_fd_;
  int write_fd_;
  pid_t child_;
  bool broken_ = false;
};

// Message bodies. Unknown fields are ignored on both sides.
std::string handshake_message(int n_queries, int roi_size);
std::string request_message(const PredictorRequest &req);
std::string response_message(std::uint64_t id, const PredictorOutput &out);
// Throws PredictorError on schema violations; does not check counts.
PredictorOutput parse_response(const std::string &payload, std::uint64_t expected_id);

struct ExternalOptions {
  int n_queries = 10;
  int roi_size = 128;
  std::chrono::milliseconds timeout{30000};
};

// rngpred-v1 client. Once the connection fails every later call throws.
class ExternalPredictor : public Predictor {
 public:
  ExternalPredictor(std::unique_ptr<Connection> conn, ExternalOptions opt);
  PredictorOutput predict(const PredictorRequest &request) override;
  bool alive() const { return conn_ && conn_->alive(); }

 private:
  std::unique_ptr<Connection> conn_;
  ExternalOptions opt_;
};

// Server side: answers requests on (in_fd, out_fd) until end-of-stream.
// Returns the number of requests served.
std::size_t serve(Predictor &predictor, int in_fd, int out_fd, int n_queries, int roi_size);

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  bool required = true;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
  std::string to_json() const;
};

// Starts `command` (twice: once for a version-mismatch probe) and exercises
// the handshake and a few synthetic requests.
ConformanceReport check_protocol(const std::string &command, const ExternalOptions &opt);

}  // namespace roadtrace
