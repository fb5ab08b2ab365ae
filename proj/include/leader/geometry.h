#pragma once

#include <cmath>
#include <vector>

namespace leader {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct Projection {
  double arc = 0.0;       // arc length of the closest point
  double distance = 0.0;  // Euclidean distance to it
};

/// Piecewise-linear curve parameterised by arc length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  /// Point at arc length `s`, clamped to [0, length()].
  Vec2 point_at(double s) const;
  /// Heading of the segment containing arc length `s`.
  double heading_at(double s) const;
  Projection project(Vec2 p) const;

  friend bool operator==(const Polyline& a, const Polyline& b) { return a.points_ == b.points_; }

 private:
  std::size_t segment_at(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace leader
