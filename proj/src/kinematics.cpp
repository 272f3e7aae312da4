#include "tmaze/kinematics.hpp"

#include <cmath>
#include <limits>

#include "tmaze/error.hpp"

namespace tmaze {

BodyTwist body_twist(WheelSpeeds wheels, const RobotBody& body) {
  double vl = wheels.left * body.wheel_radius;
  double vr = wheels.right * body.wheel_radius;
  return {0.5 * (vl + vr), (vr - vl) / body.axle_length};
}

Pose step_kinematics(const Pose& pose, WheelSpeeds wheels, const RobotBody& body, double dt) {
  BodyTwist tw = body_twist(wheels, body);
  const double th = pose.heading;
  if (tw.angular == 0.0) {
    return {pose.x + tw.linear * dt * std::cos(th), pose.y + tw.linear * dt * std::sin(th), pose.heading};
  }
  const double th1 = th + tw.angular * dt;
  const double radius = tw.linear / tw.angular;
  return {pose.x + radius * (std::sin(th1) - std::sin(th)), pose.y - radius * (std::cos(th1) - std::cos(th)),
          normalize_angle(th1)};
}

std::vector<Segment> obstacles(const MazeLayout& layout, const DoorStates& doors) {
  std::vector<Segment> out;
  out.reserve(layout.walls.size() + layout.doors.size());
  for (const auto& w : layout.walls) out.push_back(w.segment);
  for (std::size_t i = 0; i < layout.doors.size() && i < doors.size(); ++i)
    if (doors[i]) out.push_back(layout.doors[i].segment);
  return out;
}

namespace {

constexpr double kClearTol = 1e-9;

/// Smallest axis-aligned displacement that clears `p` from segment `s` by `r`.
Vec2 push_out(const Segment& s, Vec2 p, double r) {
  auto axis_push = [r](double along, double lo, double hi, double across, double at) -> Vec2 {
    // Segment lies on the line `across == at`, spanning [lo, hi] along the other axis.
    if (along >= lo && along <= hi) {
      double sign = across >= at ? 1.0 : -1.0;
      return {0.0, at + sign * r - across};
    }
    double end = along < lo ? lo : hi;
    double da = along - end;
    double dc = across - at;
    // Option 1: slide along the segment axis away from the endpoint.
    double need_a = std::sqrt(std::max(0.0, r * r - dc * dc));
    double move_a = (da < 0 ? -need_a : need_a) - da;
    // Option 2: move across the segment line.
    double need_c = std::sqrt(std::max(0.0, r * r - da * da));
    double move_c = (dc >= 0 ? need_c : -need_c) - dc;
    if (std::abs(move_a) < std::abs(move_c)) return {move_a, 0.0};
    return {0.0, move_c};
  };
  if (s.horizontal()) {
    double lo = std::min(s.a.x, s.b.x), hi = std::max(s.a.x, s.b.x);
    Vec2 m = axis_push(p.x, lo, hi, p.y, s.a.y);
    return {m.x, m.y};
  }
  if (s.vertical()) {
    double lo = std::min(s.a.y, s.b.y), hi = std::max(s.a.y, s.b.y);
    Vec2 m = axis_push(p.y, lo, hi, p.x, s.a.x);
    return {m.y, m.x};
  }
  Vec2 c = closest_point(s, p);
  Vec2 d = p - c;
  double len = norm(d);
  if (len == 0.0) return {0.0, r};
  return (r - len) / len * d;
}

bool is_clear(Vec2 p, double r, const std::vector<Segment>& obs) {
  for (const auto& s : obs)
    if (distance(s, p) < r - kClearTol) return false;
  return true;
}

}  // namespace

Pose resolve_collision(const Pose& pose, double r, const std::vector<Segment>& obs) {
  Vec2 p = pose.position();
  for (int pass = 0; pass < 16; ++pass) {
    const Segment* deepest = nullptr;
    double min_d = r - kClearTol;
    for (const auto& s : obs) {
      double d = distance(s, p);
      if (d < min_d) {
        min_d = d;
        deepest = &s;
      }
    }
    if (!deepest) return {p.x, p.y, pose.heading};
    p = p + push_out(*deepest, p, r);
  }

  // Pathological configuration: search the disc of one body radius for the
  // nearest clear position.
  const Vec2 origin = pose.position();
  const int n = 64;
  const double h = r / n;
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_p{};
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      Vec2 q{origin.x + i * h, origin.y + j * h};
      double d = std::hypot(i * h, j * h);
      if (d > r || d >= best) continue;
      if (is_clear(q, r, obs)) {
        best = d;
        best_p = q;
      }
    }
  }
  if (!std::isfinite(best))
    throw Error(ErrorCode::kUnresolvable, "no clear pose within one body radius of (" + std::to_string(origin.x) +
                                              ", " + std::to_string(origin.y) + ")");
  return {best_p.x, best_p.y, pose.heading};
}

Pose resolve_collision(const Pose& pose, const RobotBody& body, const MazeLayout& layout, const DoorStates& doors) {
  return resolve_collision(pose, body.body_radius, obstacles(layout, doors));
}

}  // namespace tmaze
