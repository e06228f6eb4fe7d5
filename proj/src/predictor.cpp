#include "roadtrace/predictor.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace roadtrace {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t candidate_key(const Candidate &c) {
  std::uint64_t k = splitmix(std::bit_cast<std::uint64_t>(c.offset.x()));
  k = splitmix(k ^ std::bit_cast<std::uint64_t>(c.offset.y()));
  return splitmix(k ^ std::bit_cast<std::uint64_t>(c.probability));
}

Point2 sample_disc(std::mt19937_64 &rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Point2 p(u(rng), u(rng));
    if (p.squaredNorm() <= 1.0) return radius * p;
  }
}

}  // namespace

void validate_output(const PredictorOutput &out, int n_queries, int roi_size) {
  if (out.candidates.size() != static_cast<std::size_t>(n_queries))
    throw PredictorError("expected " + std::to_string(n_queries) + " candidates, got " +
                         std::to_string(out.candidates.size()));
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    const Candidate &c = out.candidates[i];
    if (!c.offset.allFinite()) throw PredictorError("candidate " + std::to_string(i) + ": non-finite offset");
    if (!(c.probability >= 0.0 && c.probability <= 1.0))
      throw PredictorError("candidate " + std::to_string(i) + ": probability outside [0, 1]");
    if (c.mask && (c.mask->width() != roi_size || c.mask->height() != roi_size || c.mask->channels() != 1))
      throw PredictorError("candidate " + std::to_string(i) + ": mask has the wrong shape");
  }
  for (const auto *m : {&out.segmentation, &out.intersection})
    if (*m && ((*m)->width() != roi_size || (*m)->height() != roi_size || (*m)->channels() != 1))
      throw PredictorError("segmentation map has the wrong shape");
}

OraclePredictor::OraclePredictor(const RoadGraph &ground_truth, Options options)
    : truth_(ground_truth), opt_(options) {
  if (truth_.num_edges() > 0) dense_ = densify(truth_, opt_.step_length);
  visited_ = VisitedState(dense_);
  if (opt_.with_maps) {
    int w = truth_.width, h = truth_.height;
    if (w <= 0 || h <= 0) {
      w = h = 1;
      for (const Point2 &p : truth_.vertices()) {
        w = std::max(w, static_cast<int>(std::ceil(p.x())) + 1);
        h = std::max(h, static_cast<int>(std::ceil(p.y())) + 1);
      }
    }
    seg_full_ = rasterize_graph(truth_, w, h, opt_.seg_thickness);
    int_full_ = intersection_label(truth_, w, h, opt_.disc_radius);
  }
}

void OraclePredictor::reset() {
  std::lock_guard lock(mutex_);
  visited_ = VisitedState(dense_);
}

PredictorOutput OraclePredictor::predict(const PredictorRequest &request) {
  std::lock_guard lock(mutex_);
  PredictorOutput out;
  out.candidates.resize(static_cast<std::size_t>(opt_.n_queries));
  const RoiWindow win = RoiWindow::centered_at(request.center, opt_.roi_size);
  if (opt_.with_maps) {
    out.segmentation = crop_roi(seg_full_, win);
    out.intersection = crop_roi(int_full_, win);
  }
  if (dense_.num_edges() == 0) return out;
  const GraphLocation loc = project_point(dense_, request.center);
  if ((loc.point - request.center).norm() > opt_.roi_size / 2.0) return out;

  auto next = next_vertices_gt(dense_, visited_, request.center, opt_.step_length, opt_.walk);
  if (next.size() > out.candidates.size()) {
    spdlog::warn("oracle: {} next vertices exceed {} queries", next.size(), out.candidates.size());
    next.resize(out.candidates.size());
  }
  for (std::size_t i = 0; i < next.size(); ++i) {
    Candidate &c = out.candidates[i];
    c.offset = next[i] - request.center;
    c.probability = 1.0;
    if (opt_.with_masks)
      c.mask = instance_mask_label(truth_, request.center, next[i], win, opt_.mask_thickness).mask;
  }
  if (opt_.with_masks)
    for (std::size_t i = next.size(); i < out.candidates.size(); ++i)
      out.candidates[i].mask = GridMap(opt_.roi_size, opt_.roi_size);
  return out;
}

PredictorOutput corrupt(const PredictorOutput &output, const NoiseSpec &spec,
                        std::uint64_t call_key) {
  PredictorOutput out = output;
  if (spec.is_zero()) return out;
  const std::uint64_t base = splitmix(spec.seed ^ splitmix(call_key));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Candidate &c : out.candidates) {
    if (c.probability <= 0.0) continue;
    std::mt19937_64 rng(splitmix(base ^ candidate_key(c)));
    const bool drop = unit(rng) < spec.drop_probability;
    const Point2 jitter = sample_disc(rng, spec.jitter);
    if (drop) {
      c.probability = 0.0;
      continue;
    }
    c.offset += jitter;
  }
  if (spec.spurious_rate > 0.0) {
    std::mt19937_64 rng(splitmix(base ^ 0x5bd1e995ULL));
    if (unit(rng) < spec.spurious_rate) {
      const double angle = 2.0 * M_PI * unit(rng);
      auto slot = std::min_element(out.candidates.begin(), out.candidates.end(),
                                   [](const Candidate &a, const Candidate &b) {
                                     return a.probability < b.probability;
                                   });
      if (slot != out.candidates.end()) {
        slot->offset = spec.spurious_distance * Point2(std::cos(angle), std::sin(angle));
        slot->probability = 1.0;
      }
    }
  }
  return out;
}

}  // namespace roadtrace
