#pragma once

#include "roadtrace/expert.hpp"
#include "roadtrace/grid_map.hpp"
#include "roadtrace/raster.hpp"
#include "roadtrace/road_graph.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace roadtrace {

// One next-step slot. `offset` is relative to the request center.
struct Candidate {
  Point2 offset = Point2::Zero();
  double probability = 0.0;
  std::optional<GridMap> mask;
};

struct PredictorOutput {
  std::vector<Candidate> candidates;
  // Road-segment and key-point probability maps for the ROI, when provided.
  std::optional<GridMap> segmentation;
  std::optional<GridMap> intersection;
};

struct PredictorRequest {
  std::uint64_t id = 0;
  Point2 center = Point2::Zero();  // agent position; ROIs are cropped at its rounding
  GridMap rgb;
  GridMap history;
};

// Raised by a predictor that could not produce a usable answer.
class PredictorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictorOutput predict(const PredictorRequest &request) = 0;
};

// Throws PredictorError unless the output has exactly `n_queries` candidates
// with finite offsets and probabilities in [0, 1], and every mask is a
// single-channel roi_size square.
void validate_output(const PredictorOutput &out, int n_queries, int roi_size);

// Perfect predictor backed by ground truth. Shares next_vertices_gt with the
// expert, so it keeps its own visited state across calls.
class OraclePredictor : public Predictor {
 public:
  struct Options {
    double step_length = 20.0;
    int n_queries = 10;
    int roi_size = 128;
    double mask_thickness = 3.0;
    double seg_thickness = 3.0;
    double disc_radius = 3.0;
    bool with_masks = true;
    bool with_maps = true;
    WalkParams walk;
  };

  OraclePredictor(const RoadGraph &ground_truth, Options options);
  PredictorOutput predict(const PredictorRequest &request) override;

  // Starts over with nothing visited.
  void reset();
  const VisitedState &visited() const { return visited_; }
  const RoadGraph &graph() const { return dense_; }
  // Full-tile key-point label, used to seed the engine.
  const GridMap &intersection_map() const { return int_full_; }

 private:
  RoadGraph truth_;
  RoadGraph dense_;
  Options opt_;
  VisitedState visited_;
  GridMap seg_full_;
  GridMap int_full_;
  std::mutex mutex_;
};

struct NoiseSpec {
  double jitter = 0.0;          // max displacement (px) of each valid candidate
  double drop_probability = 0.0;
  double spurious_rate = 0.0;   // chance per call of one extra candidate
  double spurious_distance = 20.0;
  std::uint64_t seed = 0;

  bool is_zero() const { return jitter == 0.0 && drop_probability == 0.0 && spurious_rate == 0.0; }
};

// Applies jitter, drops and spurious insertions. The noise drawn for a
// candidate depends only on (spec.seed, call_key, the candidate itself), so
// permuting the input permutes the output the same way.
PredictorOutput corrupt(const PredictorOutput &output, const NoiseSpec &spec,
                        std::uint64_t call_key = 0);

// Wraps another predictor and corrupts each answer.
class NoisyPredictor : public Predictor {
 public:
  NoisyPredictor(Predictor &inner, NoiseSpec spec) : inner_(inner), spec_(spec) {}
  PredictorOutput predict(const PredictorRequest &request) override {
    return corrupt(inner_.predict(request), spec_, request.id);
  }

 private:
  Predictor &inner_;
  NoiseSpec spec_;
};

// Returns a fixed answer to every request; used for loopback tests.
class FixedPredictor : public Predictor {
 public:
  explicit FixedPredictor(PredictorOutput out) : out_(std::move(out)) {}
  PredictorOutput predict(const PredictorRequest &) override { return out_; }

 private:
  PredictorOutput out_;
};

}  // namespace roadtrace
