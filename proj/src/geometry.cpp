#include "leader/geometry.h"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace leader {

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  angle = std::fmod(angle, two_pi);
  if (angle <= -std::numbers::pi) angle += two_pi;
  if (angle > std::numbers::pi) angle -= two_pi;
  return angle;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() + (points_[i] - points_[i - 1]).norm());
  }
}

std::size_t Polyline::segment_at(double s) const {
  // Index i of the segment [i, i+1] containing s; zero-length segments are skipped.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  i = std::min(i, points_.size() - 2);
  while (i > 0 && cumulative_[i + 1] - cumulative_[i] <= 0.0) --i;
  return i;
}

Vec2 Polyline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_at(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  if (seg <= 0.0) return points_[i];
  const double t = (s - cumulative_[i]) / seg;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

double Polyline::heading_at(double s) const {
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_at(s);
  // Step past degenerate segments so the heading is always defined.
  while (i + 2 < points_.size() && cumulative_[i + 1] - cumulative_[i] <= 0.0) ++i;
  const Vec2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y, d.x);
}

Projection Polyline::project(Vec2 p) const {
  Projection best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2 a = points_[i];
    const Vec2 d = points_[i + 1] - a;
    const double len2 = d.squared_norm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    const Vec2 c = a + d * t;
    const double dist = (p - c).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.arc = cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
    }
  }
  return best;
}

}  // namespace leader
