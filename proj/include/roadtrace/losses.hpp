#pragma once

#include "roadtrace/predictor.hpp"
#include "roadtrace/samples.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace roadtrace {

struct LossWeights {
  double coord = 5.0;  // alpha
  double prob = 1.0;   // beta
  double ins = 1.0;    // gamma
  double fg_weight = 5.0;
  double lambda = 10.0;  // probability term of the matching cost
  double eps = 1e-7;

  void validate() const;
};

struct LossBreakdown {
  double seg = 0.0;
  double coord = 0.0;
  double prob = 0.0;
  double ins = 0.0;
  double total = 0.0;
  std::size_t matches = 0;
  // False when the predictor supplied no maps / no masks; the term is then 0.
  bool seg_available = false;
  bool ins_available = false;
  // Candidate index matched to each valid label, in label order.
  std::vector<long> assignment;
};

// L1 distance between offsets plus lambda * (1 - p).
double match_cost(const Candidate &pred, const Point2 &label_offset, double lambda = 10.0);

// N x N matrix: one row per candidate, one column per valid label, then
// constant-lambda columns standing in for "no road". Throws if there are more
// valid labels than candidates.
Eigen::MatrixXd build_cost_matrix(const PredictorOutput &preds, const std::vector<LabelVertex> &labels,
                                  double lambda = 10.0);

LossBreakdown losses(const PredictorOutput &preds, const TrainingSample &sample,
                     const LossWeights &weights = {});

// Foreground-weighted binary cross-entropy between an 8-bit probability map
// and an 8-bit label (foreground = value >= 128), normalized by total weight.
double weighted_bce(const GridMap &pred, const GridMap &label, double fg_weight, double eps);

std::string to_json(const LossBreakdown &b);

}  // namespace roadtrace
