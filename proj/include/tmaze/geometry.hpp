#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace tmaze {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into [0, 2pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const { return norm(b - a); }
  bool horizontal() const { return a.y == b.y; }
  bool vertical() const { return a.x == b.x; }
};

/// Axis-aligned rectangle, x0 <= x1 and y0 <= y1.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  Rect shrunk(double d) const { return {x0 + d, y0 + d, x1 - d, y1 - d}; }
  bool valid() const { return x0 <= x1 && y0 <= y1; }

  /// True when the intersection has positive area (beyond `eps`).
  bool overlaps(const Rect& o, double eps = 1e-12) const {
    return std::min(x1, o.x1) - std::max(x0, o.x0) > eps &&
           std::min(y1, o.y1) - std::max(y0, o.y0) > eps;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Vec2 closest_point(const Segment& s, Vec2 p) {
  Vec2 d = s.b - s.a;
  double len2 = dot(d, d);
  if (len2 == 0.0) return s.a;
  double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return s.a + t * d;
}

inline double distance(const Segment& s, Vec2 p) { return norm(p - closest_point(s, p)); }

struct RayHit {
  double distance = 0.0;  // along the ray
  double along = 0.0;     // arc length from segment.a to the hit point
};

/// Intersection of the ray origin + t*dir (t >= 0, |dir| = 1) with a segment.
/// Parallel and collinear configurations report no hit.
inline std::optional<RayHit> intersect_ray(Vec2 origin, Vec2 dir, const Segment& s) {
  Vec2 e = s.b - s.a;
  double denom = cross(dir, e);
  if (denom == 0.0) return std::nullopt;
  Vec2 w = s.a - origin;
  double t = cross(w, e) / denom;
  double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return RayHit{t, u * norm(e)};
}

}  // namespace tmaze
