#pragma once

#include "roadtrace/engine.hpp"
#include "roadtrace/expert.hpp"
#include "roadtrace/losses.hpp"
#include "roadtrace/metrics.hpp"
#include "roadtrace/predictor.hpp"
#include "roadtrace/wire.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace roadtrace {

// Thrown for unknown keys, wrong types and out-of-range values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PredictorSettings {
  std::string kind = "oracle";  // oracle | external
  std::string command;          // external: started through /bin/sh
  std::string socket;           // external: unix socket path instead of command
  int timeout_ms = 30000;
  double mask_thickness = 3.0;
};

// Every tunable of the pipeline, loaded from one JSON file.
struct RunConfig {
  ExpertConfig expert;
  EngineConfig engine;
  PredictorSettings predictor;
  NoiseSpec noise;
  TopoParams topo;
  AplsParams apls;
  LossWeights loss;

  OraclePredictor::Options oracle_options() const;
  ExternalOptions external_options() const;
  void validate() const;
};

nlohmann::json to_json(const RunConfig &cfg);
RunConfig config_from_json(const nlohmann::json &j);

// Defaults, then the file (if any), then `key.path=value` overrides.
// Values are parsed as JSON when possible and as strings otherwise.
RunConfig load_config(const std::filesystem::path &file, const std::vector<std::string> &overrides);

}  // namespace roadtrace
