#include "roadtrace/config.hpp"

#include <fstream>
#include <sstream>

namespace roadtrace {

using json = nlohmann::json;

OraclePredictor::Options RunConfig::oracle_options() const {
  OraclePredictor::Options o;
  o.step_length = expert.step_length;
  o.n_queries = engine.n_queries;
  o.roi_size = engine.roi_size;
  o.mask_thickness = predictor.mask_thickness;
  o.seg_thickness = expert.seg_thickness;
  o.disc_radius = expert.disc_radius;
  o.walk = expert.walk;
  return o;
}

ExternalOptions RunConfig::external_options() const {
  return {engine.n_queries, engine.roi_size, std::chrono::milliseconds(predictor.timeout_ms)};
}

void RunConfig::validate() const {
  try {
    expert.validate();
    engine.validate();
    topo.validate();
    apls.validate();
    loss.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (predictor.kind != "oracle" && predictor.kind != "external")
    throw ConfigError("predictor.kind must be 'oracle' or 'external'");
  if (predictor.timeout_ms <= 0) throw ConfigError("predictor.timeout_ms must be positive");
  const auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!unit(noise.drop_probability) || !unit(noise.spurious_rate))
    throw ConfigError("noise probabilities must lie in [0, 1]");
  if (!(noise.jitter >= 0.0)) throw ConfigError("noise.jitter must be non-negative");
}

json to_json(const RunConfig &c) {
  return {
      {"roi_size", c.engine.roi_size},
      {"n_queries", c.engine.n_queries},
      {"expert",
       {{"step_length", c.expert.step_length},
        {"noise_amplitude", c.expert.noise_amplitude},
        {"seed", c.expert.rng_seed},
        {"seg_thickness", c.expert.seg_thickness},
        {"history_thickness", c.expert.history_thickness},
        {"disc_radius", c.expert.disc_radius},
        {"ends_as_keypoints", c.expert.ends_as_keypoints},
        {"min_unvisited", c.expert.walk.min_unvisited},
        {"junction_snap", c.expert.walk.junction_snap}}},
      {"engine",
       {{"prob_threshold", c.engine.prob_threshold},
        {"snap_radius", c.engine.snap_radius},
        {"max_step", c.engine.max_step},
        {"max_steps", c.engine.max_steps},
        {"peak_threshold", c.engine.peaks.threshold},
        {"nms_radius", c.engine.peaks.nms_radius},
        {"reseed_on_failure", c.engine.reseed_on_failure}}},
      {"predictor",
       {{"kind", c.predictor.kind},
        {"command", c.predictor.command},
        {"socket", c.predictor.socket},
        {"timeout_ms", c.predictor.timeout_ms},
        {"mask_thickness", c.predictor.mask_thickness}}},
      {"noise",
       {{"jitter", c.noise.jitter},
        {"drop", c.noise.drop_probability},
        {"spurious", c.noise.spurious_rate},
        {"spurious_distance", c.noise.spurious_distance},
        {"seed", c.noise.seed}}},
      {"topo",
       {{"seed_spacing", c.topo.seed_spacing},
        {"match_radius", c.topo.match_radius},
        {"propagation_radius", c.topo.propagation_radius},
        {"marble_spacing", c.topo.marble_spacing},
        {"seed", c.topo.rng_seed}}},
      {"apls",
       {{"pairs", c.apls.pairs},
        {"sample_spacing", c.apls.sample_spacing},
        {"snap_cutoff", c.apls.snap_cutoff},
        {"symmetric", c.apls.symmetric},
        {"seed", c.apls.rng_seed}}},
      {"loss",
       {{"alpha", c.loss.coord},
        {"beta", c.loss.prob},
        {"gamma", c.loss.ins},
        {"fg_weight", c.loss.fg_weight},
        {"lambda", c.loss.lambda},
        {"eps", c.loss.eps}}},
  };
}

namespace {

// Every key in `user` must exist in `defaults` with a compatible type.
void check_shape(const json &user, const json &defaults, const std::string &path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const json &d = defaults[it.key()];
    const json &u = it.value();
    if (d.is_object()) {
      if (!u.is_object()) throw ConfigError("'" + key + "' must be an object");
      check_shape(u, d, key);
    } else if (d.is_number() != u.is_number() || d.is_boolean() != u.is_boolean() ||
               d.is_string() != u.is_string()) {
      throw ConfigError("'" + key + "' has the wrong type (expected " + std::string(d.type_name()) + ")");
    } else if (d.is_number_unsigned() && !u.is_number_unsigned()) {
      throw ConfigError("'" + key + "' must be a non-negative integer");
    } else if (d.is_number_integer() && !u.is_number_integer()) {
      throw ConfigError("'" + key + "' must be an integer");
    }
  }
}

}  // namespace

RunConfig config_from_json(const json &user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json j = to_json(RunConfig{});
  check_shape(user, j, "");
  j.merge_patch(user);

  RunConfig c;
  c.engine.roi_size = c.expert.roi_size = j["roi_size"];
  c.engine.n_queries = c.expert.max_queries = j["n_queries"];
  const json &ex = j["expert"];
  c.expert.step_length = ex["step_length"];
  c.engine.expected_step = c.expert.step_length;
  c.expert.noise_amplitude = ex["noise_amplitude"];
  c.expert.rng_seed = ex["seed"];
  c.expert.seg_thickness = ex["seg_thickness"];
  c.expert.history_thickness = ex["history_thickness"];
  c.engine.history_thickness = c.expert.history_thickness;
  c.expert.disc_radius = ex["disc_radius"];
  c.expert.ends_as_keypoints = ex["ends_as_keypoints"];
  c.expert.walk.min_unvisited = ex["min_unvisited"];
  c.expert.walk.junction_snap = ex["junction_snap"];
  const json &en = j["engine"];
  c.engine.prob_threshold = en["prob_threshold"];
  c.engine.snap_radius = en["snap_radius"];
  c.engine.max_step = en["max_step"];
  c.engine.max_steps = en["max_steps"];
  c.engine.peaks.threshold = en["peak_threshold"];
  c.engine.peaks.nms_radius = en["nms_radius"];
  c.engine.reseed_on_failure = en["reseed_on_failure"];
  const json &pr = j["predictor"];
  c.predictor.kind = pr["kind"];
  c.predictor.command = pr["command"];
  c.predictor.socket = pr["socket"];
  c.predictor.timeout_ms = pr["timeout_ms"];
  c.predictor.mask_thickness = pr["mask_thickness"];
  const json &no = j["noise"];
  c.noise.jitter = no["jitter"];
  c.noise.drop_probability = no["drop"];
  c.noise.spurious_rate = no["spurious"];
  c.noise.spurious_distance = no["spurious_distance"];
  c.noise.seed = no["seed"];
  const json &tp = j["topo"];
  c.topo.seed_spacing = tp["seed_spacing"];
  c.topo.match_radius = tp["match_radius"];
  c.topo.propagation_radius = tp["propagation_radius"];
  c.topo.marble_spacing = tp["marble_spacing"];
  c.topo.rng_seed = tp["seed"];
  const json &ap = j["apls"];
  c.apls.pairs = ap["pairs"];
  c.apls.sample_spacing = ap["sample_spacing"];
  c.apls.snap_cutoff = ap["snap_cutoff"];
  c.apls.symmetric = ap["symmetric"];
  c.apls.rng_seed = ap["seed"];
  const json &lo = j["loss"];
  c.loss.coord = lo["alpha"];
  c.loss.prob = lo["beta"];
  c.loss.ins = lo["gamma"];
  c.loss.fg_weight = lo["fg_weight"];
  c.loss.lambda = lo["lambda"];
  c.loss.eps = lo["eps"];
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path &file, const std::vector<std::string> &overrides) {
  json user = json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config " + file.string());
    user = json::parse(in, nullptr, false);
    if (user.is_discarded()) throw ConfigError(file.string() + ": invalid JSON");
  }
  for (const std::string &o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    json value = json::parse(o.substr(eq + 1), nullptr, false);
    if (value.is_discarded()) value = o.substr(eq + 1);
    json *node = &user;
    std::stringstream keys(o.substr(0, eq));
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(keys, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
  }
  return config_from_json(user);
}

}  // namespace roadtrace
