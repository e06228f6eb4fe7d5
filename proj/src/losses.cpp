#include "roadtrace/losses.hpp"

#include "roadtrace/assignment.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roadtrace {

void LossWeights::validate() const {
  if (!(coord >= 0.0) || !(prob >= 0.0) || !(ins >= 0.0))
    throw std::invalid_argument("loss weights must be non-negative");
  if (!(fg_weight > 0.0)) throw std::invalid_argument("fg_weight must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 0.5)");
}

double match_cost(const Candidate &pred, const Point2 &label_offset, double lambda) {
  return (pred.offset - label_offset).lpNorm<1>() + lambda * (1.0 - pred.probability);
}

Eigen::MatrixXd build_cost_matrix(const PredictorOutput &preds, const std::vector<LabelVertex> &labels,
                                  double lambda) {
  std::vector<Point2> valid;
  for (const LabelVertex &l : labels)
    if (l.valid) valid.push_back(l.offset);
  const long n = static_cast<long>(preds.candidates.size());
  if (static_cast<long>(valid.size()) > n)
    throw std::invalid_argument("more valid labels than predicted candidates");
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, lambda);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < static_cast<long>(valid.size()); ++j)
      c(i, j) = match_cost(preds.candidates[static_cast<std::size_t>(i)], valid[static_cast<std::size_t>(j)],
                           lambda);
  return c;
}

double weighted_bce(const GridMap &pred, const GridMap &label, double fg_weight, double eps) {
  if (pred.width() != label.width() || pred.height() != label.height() || pred.channels() != 1 ||
      label.channels() != 1)
    throw std::invalid_argument("map dimensions differ from label");
  const auto p = pred.plane().cast<double>().array() / 255.0;
  const auto y = (label.plane().array() >= 128).cast<double>();
  const auto w = y * (fg_weight - 1.0) + 1.0;
  // log(max(q, eps)): an exact binary prediction costs exactly 0.
  const auto pos = -p.max(eps).log();
  const auto neg = -(1.0 - p).max(eps).log();
  const auto per_pixel = y * pos + (1.0 - y) * neg;
  return (w * per_pixel).sum() / w.sum();
}

LossBreakdown losses(const PredictorOutput &preds, const TrainingSample &sample, const LossWeights &weights) {
  weights.validate();
  LossBreakdown b;
  const std::size_t n = preds.candidates.size();
  if (n == 0) throw std::invalid_argument("prediction has no candidates");

  const Eigen::MatrixXd cost = build_cost_matrix(preds, sample.label_vertices, weights.lambda);
  const std::vector<long> col_of_row = hungarian(cost);
  const std::size_t m = sample.num_valid();
  std::vector<Point2> valid;
  for (const LabelVertex &l : sample.label_vertices)
    if (l.valid) valid.push_back(l.offset);
  b.assignment.assign(m, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (col_of_row[i] >= 0 && static_cast<std::size_t>(col_of_row[i]) < m)
      b.assignment[static_cast<std::size_t>(col_of_row[i])] = static_cast<long>(i);
  b.matches = m;

  // Coordinates: mean L1 over matched pairs.
  for (std::size_t j = 0; j < m; ++j)
    b.coord += (preds.candidates[static_cast<std::size_t>(b.assignment[j])].offset - valid[j]).lpNorm<1>();
  if (m > 0) b.coord /= static_cast<double>(m);

  // Validity: cross-entropy with matched -> 1, unmatched -> 0.
  std::vector<bool> target(n, false);
  for (long i : b.assignment) target[static_cast<std::size_t>(i)] = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(preds.candidates[i].probability, weights.eps, 1.0 - weights.eps);
    b.prob += target[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  b.prob /= static_cast<double>(n);

  if (preds.segmentation && preds.intersection) {
    b.seg_available = true;
    b.seg = weighted_bce(*preds.segmentation, sample.segmentation, weights.fg_weight, weights.eps) +
            weighted_bce(*preds.intersection, sample.intersection, weights.fg_weight, weights.eps);
  }

  // Instance masks: plain BCE over matched pairs.
  b.ins_available = m > 0;
  for (std::size_t j = 0; j < m && b.ins_available; ++j)
    if (!preds.candidates[static_cast<std::size_t>(b.assignment[j])].mask) b.ins_available = false;
  if (b.ins_available) {
    if (sample.instance_masks.size() != m)
      throw std::invalid_argument("sample has fewer instance masks than valid labels");
    for (std::size_t j = 0; j < m; ++j)
      b.ins += weighted_bce(*preds.candidates[static_cast<std::size_t>(b.assignment[j])].mask,
                            sample.instance_masks[j], 1.0, weights.eps);
    b.ins /= static_cast<double>(m);
  }

  b.total = b.seg + weights.coord * b.coord + weights.prob * b.prob + weights.ins * b.ins;
  return b;
}

std::string to_json(const LossBreakdown &b) {
  nlohmann::json j{{"seg", b.seg},
                   {"coord", b.coord},
                   {"prob", b.prob},
                   {"ins", b.ins},
                   {"total", b.total},
                   {"matches", b.matches},
                   {"seg_available", b.seg_available},
                   {"ins_available", b.ins_available},
                   {"assignment", b.assignment}};
  return j.dump();
}

}  // namespace roadtrace
