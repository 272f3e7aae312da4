#include "tmaze/sensors.hpp"

#include <algorithm>
#include <cmath>

namespace tmaze {

std::optional<SceneHit> cast_ray(Vec2 origin, Vec2 dir, const MazeLayout& layout, const DoorStates& doors,
                                 double max_distance) {
  std::optional<SceneHit> best;
  auto consider = [&](const Segment& s, Texture tex) {
    auto hit = intersect_ray(origin, dir, s);
    if (!hit || hit->distance > max_distance) return;
    if (!best || hit->distance < best->distance) best = SceneHit{hit->distance, tex, hit->along, s.length()};
  };
  for (const auto& w : layout.walls) consider(w.segment, w.texture);
  for (std::size_t i = 0; i < layout.doors.size() && i < doors.size(); ++i)
    if (doors[i]) consider(layout.doors[i].segment, kDoorTexture);
  return best;
}

double proximity_response(double distance, double range) {
  return std::clamp(1.0 - distance / range, 0.0, 1.0);
}

std::array<double, kProximityCount> read_proximity(const Pose& pose, const MazeLayout& layout,
                                                   const DoorStates& doors, double body_radius,
                                                   const SensorConfig& cfg) {
  std::array<double, kProximityCount> out{};
  for (int k = 0; k < kProximityCount; ++k) {
    Vec2 dir = unit_vector(pose.heading + kProximityBearings[static_cast<std::size_t>(k)]);
    Vec2 rim = pose.position() + body_radius * dir;
    auto hit = cast_ray(rim, dir, layout, doors, cfg.proximity_range);
    out[static_cast<std::size_t>(k)] = hit ? proximity_response(hit->distance, cfg.proximity_range) : 0.0;
  }
  return out;
}

std::array<double, kAccelCount> read_accelerometer(Vec2 prev_velocity, Vec2 velocity, double heading, double dt,
                                                   const SensorConfig& cfg) {
  Vec2 a = (1.0 / dt) * (velocity - prev_velocity);
  Vec2 fwd = unit_vector(heading);
  Vec2 left{-fwd.y, fwd.x};
  return {dot(a, fwd) / cfg.accel_norm, dot(a, left) / cfg.accel_norm, cfg.gravity / cfg.accel_norm};
}

double camera_column_bearing(int col, const SensorConfig& cfg) {
  double fov = cfg.camera_fov_deg * std::numbers::pi / 180.0;
  return 0.5 * fov - (col + 0.5) * fov / kCameraCols;
}

std::array<double, kCameraCols> camera_columns(const Pose& pose, const MazeLayout& layout, const DoorStates& doors,
                                               double body_radius, const SensorConfig& cfg) {
  std::array<double, kCameraCols> out{};
  Vec2 eye = pose.position() + body_radius * unit_vector(pose.heading);
  for (int c = 0; c < kCameraCols; ++c) {
    Vec2 dir = unit_vector(pose.heading + camera_column_bearing(c, cfg));
    auto hit = cast_ray(eye, dir, layout, doors, cfg.camera_range);
    double v = 0.0;
    if (hit) {
      double shade = texture_shade(hit->texture, hit->along, hit->length);
      v = shade * std::max(0.0, 1.0 - hit->distance / cfg.camera_range);
    }
    out[static_cast<std::size_t>(c)] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

std::array<double, kPixelCount> render_camera(const Pose& pose, const MazeLayout& layout, const DoorStates& doors,
                                              double body_radius, const SensorConfig& cfg) {
  auto cols = camera_columns(pose, layout, doors, body_radius, cfg);
  std::array<double, kPixelCount> px{};
  for (int r = 0; r < kCameraRows; ++r)
    for (int c = 0; c < kCameraCols; ++c)
      px[static_cast<std::size_t>(r * kCameraCols + c)] = cols[static_cast<std::size_t>(c)];
  return px;
}

SensorFrame sense(const Pose& pose, Vec2 prev_velocity, Vec2 velocity, const MazeLayout& layout,
                  const DoorStates& doors, double body_radius, double dt, const SensorConfig& cfg) {
  SensorFrame f;
  auto prox = read_proximity(pose, layout, doors, body_radius, cfg);
  std::copy(prox.begin(), prox.end(), f.proximity().begin());
  auto acc = read_accelerometer(prev_velocity, velocity, pose.heading, dt, cfg);
  std::copy(acc.begin(), acc.end(), f.accel().begin());
  auto px = render_camera(pose, layout, doors, body_radius, cfg);
  std::copy(px.begin(), px.end(), f.pixels().begin());
  return f;
}

}  // namespace tmaze
