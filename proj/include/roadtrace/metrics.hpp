#pragma once

#include "roadtrace/road_graph.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace roadtrace {

struct TopoParams {
  double seed_spacing = 50.0;
  double match_radius = 8.0;
  double propagation_radius = 300.0;
  double marble_spacing = 5.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct AplsParams {
  std::size_t pairs = 500;
  double sample_spacing = 10.0;
  double snap_cutoff = 8.0;
  bool symmetric = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct TopoScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gt_seeds = 0;
  std::size_t matched_seeds = 0;
  std::size_t gt_marbles = 0;
  std::size_t pred_holes = 0;
  std::size_t matched_marbles = 0;
};

struct AplsScore {
  // nullopt when the reference graph has no connected pair.
  std::optional<double> score;
  std::optional<double> gt_to_pred;
  std::optional<double> pred_to_gt;
  std::size_t pairs = 0;
};

inline double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Sub-graph matching around seeds sampled along both graphs. Seeds on the
// reference are matched to their projection on the prediction; the reachable
// sub-graphs are sampled into evenly spaced points and matched one-to-one
// within match_radius. Prediction seeds that find no reference road within
// match_radius add their sub-graph to the precision denominator.
TopoScore topo(const RoadGraph &gt, const RoadGraph &pred, const TopoParams &params = {});

// 1 - mean relative path-length error over random pairs of reference
// points. Pairs whose projection misses the prediction by more than
// snap_cutoff, or whose projections are disconnected, cost 1.
AplsScore apls(const RoadGraph &gt, const RoadGraph &pred, const AplsParams &params = {});

// One direction of apls(); nullopt if `reference` has no connected pair.
std::optional<double> apls_one_way(const RoadGraph &reference, const RoadGraph &candidate,
                                   const AplsParams &params);

struct MetricReport {
  TopoScore topo;
  AplsScore apls;
  TopoParams topo_params;
  AplsParams apls_params;
};

MetricReport evaluate(const RoadGraph &gt, const RoadGraph &pred, const TopoParams &tp = {},
                      const AplsParams &ap = {});

std::string to_json(const MetricReport &r);

}  // namespace roadtrace
