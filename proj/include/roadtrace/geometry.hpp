#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace roadtrace {

// Pixel-space coordinate: x rightward, y downward, origin at the tile's
// top-left pixel center.
using Point2 = Eigen::Vector2d;

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

// Parameter in [0, 1] of the point on segment [a, b] closest to p.
template <typename Scalar>
inline Scalar closest_parameter(const Vec2<Scalar> &a, const Vec2<Scalar> &b,
                                const Vec2<Scalar> &p) {
  const Vec2<Scalar> d = b - a;
  const Scalar len2 = d.squaredNorm();
  if (len2 <= Scalar(0)) return Scalar(0);
  return std::clamp((p - a).dot(d) / len2, Scalar(0), Scalar(1));
}

template <typename Scalar>
inline Vec2<Scalar> lerp(const Vec2<Scalar> &a, const Vec2<Scalar> &b,
                         Scalar t) {
  return a + t * (b - a);
}

template <typename Scalar>
inline Scalar squared_distance_to_segment(const Vec2<Scalar> &a,
                                          const Vec2<Scalar> &b,
                                          const Vec2<Scalar> &p) {
  return (p - lerp(a, b, closest_parameter(a, b, p))).squaredNorm();
}

template <typename Scalar>
inline Scalar distance_to_segment(const Vec2<Scalar> &a, const Vec2<Scalar> &b,
                                  const Vec2<Scalar> &p) {
  return std::sqrt(squared_distance_to_segment(a, b, p));
}

// Rounds half away from zero; used for ROI centers and pixel snapping.
inline long round_to_pixel(double v) { return std::lround(v); }

}  // namespace roadtrace
