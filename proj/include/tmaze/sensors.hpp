#pragma once

#include <array>
#include <span>

#include "tmaze/maze.hpp"

namespace tmaze {

inline constexpr int kProximityCount = 8;
inline constexpr int kAccelCount = 3;
inline constexpr int kCameraCols = 10;
inline constexpr int kCameraRows = 8;
inline constexpr int kPixelCount = kCameraCols * kCameraRows;
inline constexpr int kInputCount = kProximityCount + kAccelCount + kPixelCount;  // 91

/// Body-relative bearings (radians, counter-clockwise from the heading) of the
/// e-puck IR sensors ps0..ps7. Indices 0-3 sit on the right flank, 4-7 on the left;
/// 0 and 7 form the front pair.
inline constexpr std::array<double, kProximityCount> kProximityBearings = {
    -17.0 * std::numbers::pi / 180.0,  -47.0 * std::numbers::pi / 180.0,  -90.0 * std::numbers::pi / 180.0,
    -151.0 * std::numbers::pi / 180.0, 151.0 * std::numbers::pi / 180.0,  90.0 * std::numbers::pi / 180.0,
    47.0 * std::numbers::pi / 180.0,   17.0 * std::numbers::pi / 180.0,
};

struct SensorConfig {
  double proximity_range = 0.06;  // m
  double accel_norm = 10.0;       // m/s^2
  double gravity = 9.81;          // m/s^2
  double camera_range = 0.8;      // m, distance at which shading reaches zero
  double camera_fov_deg = 60.0;
};

/// The 91 controller inputs, flattened as [proximity(8) | accel(3) | pixels(80)].
/// Pixels are row-major over 8 rows of 10 columns.
struct SensorFrame {
  std::array<double, kInputCount> values{};

  std::span<double, kProximityCount> proximity() { return std::span(values).subspan<0, kProximityCount>(); }
  std::span<const double, kProximityCount> proximity() const {
    return std::span(values).subspan<0, kProximityCount>();
  }
  std::span<double, kAccelCount> accel() { return std::span(values).subspan<kProximityCount, kAccelCount>(); }
  std::span<const double, kAccelCount> accel() const {
    return std::span(values).subspan<kProximityCount, kAccelCount>();
  }
  std::span<double, kPixelCount> pixels() {
    return std::span(values).subspan<kProximityCount + kAccelCount, kPixelCount>();
  }
  std::span<const double, kPixelCount> pixels() const {
    return std::span(values).subspan<kProximityCount + kAccelCount, kPixelCount>();
  }
};

/// Nearest hit of a ray against the walls and closed doors.
struct SceneHit {
  double distance = 0.0;
  Texture texture = Texture::kUniformDark;
  double along = 0.0;
  double length = 0.0;
};
std::optional<SceneHit> cast_ray(Vec2 origin, Vec2 dir, const MazeLayout& layout, const DoorStates& doors,
                                 double max_distance);

/// Linear response 1 - d / range, clamped to [0, 1].
double proximity_response(double distance, double range);

std::array<double, kProximityCount> read_proximity(const Pose& pose, const MazeLayout& layout,
                                                   const DoorStates& doors, double body_radius,
                                                   const SensorConfig& cfg);

/// Body-frame acceleration from two consecutive world-frame velocities:
/// [forward, lateral (left positive), gravity], each divided by accel_norm.
std::array<double, kAccelCount> read_accelerometer(Vec2 prev_velocity, Vec2 velocity, double heading, double dt,
                                                   const SensorConfig& cfg);

/// Per-column shades (left to right) before replication over rows.
std::array<double, kCameraCols> camera_columns(const Pose& pose, const MazeLayout& layout, const DoorStates& doors,
                                               double body_radius, const SensorConfig& cfg);
std::array<double, kPixelCount> render_camera(const Pose& pose, const MazeLayout& layout, const DoorStates& doors,
                                              double body_radius, const SensorConfig& cfg);
/// Bearing of camera column `col` relative to the heading (positive = left).
double camera_column_bearing(int col, const SensorConfig& cfg);

SensorFrame sense(const Pose& pose, Vec2 prev_velocity, Vec2 velocity, const MazeLayout& layout,
                  const DoorStates& doors, double body_radius, double dt, const SensorConfig& cfg);

}  // namespace tmaze
