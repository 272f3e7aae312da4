#pragma once

#include <vector>

#include "tmaze/maze.hpp"

namespace tmaze {

/// Exact differential-drive arc over `dt` (instantaneous centre of curvature).
/// Wheel speeds are expected to be clamped already.
Pose step_kinematics(const Pose& pose, WheelSpeeds wheels, const RobotBody& body, double dt);

/// Linear velocity (m/s) and yaw rate (rad/s) produced by the wheel speeds.
struct BodyTwist {
  double linear = 0.0;
  double angular = 0.0;
};
BodyTwist body_twist(WheelSpeeds wheels, const RobotBody& body);

/// Segments the body collides with: all walls plus the closed doors.
std::vector<Segment> obstacles(const MazeLayout& layout, const DoorStates& doors);

/// Pushes the body out of walls and closed doors with axis-aligned moves so that
/// its centre ends at least `body_radius` from every obstacle. Throws
/// Error(kUnresolvable) when no clear pose lies within one body radius.
Pose resolve_collision(const Pose& pose, const RobotBody& body, const MazeLayout& layout,
                       const DoorStates& doors);
Pose resolve_collision(const Pose& pose, double body_radius, const std::vector<Segment>& obstacles);

}  // namespace tmaze
