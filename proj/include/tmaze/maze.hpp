#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tmaze/geometry.hpp"

namespace tmaze {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in [0, 2pi)

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// e-puck style differential-drive body.
struct RobotBody {
  double body_radius = 0.037;
  double wheel_radius = 0.0205;
  double axle_length = 0.052;
  double min_wheel_speed = -3.14;
  double max_wheel_speed = 6.28;
  double control_dt = 0.064;
};

struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
  friend bool operator==(const WheelSpeeds&, const WheelSpeeds&) = default;
};

/// Landmark patterns painted on wall faces; sampled by the camera.
enum class Texture : int {
  kUniformDark = 0,
  kUniformLight = 1,
  kStripesWide = 2,
  kStripesNarrow = 3,
  kGradientUp = 4,
  kGradientDown = 5,
};
inline constexpr int kTextureCount = 6;

/// Grayscale shade in [0, 1] of `texture` at arc length `along` on a wall of `length`.
double texture_shade(Texture texture, double along, double length);

struct Wall {
  Segment segment;
  Texture texture = Texture::kUniformLight;
};

enum class DoorKind { kBacktrackBlocker, kReturnPathEnforcer };

/// Edge of a trigger rectangle through which the robot must leave for the door to close.
enum class ExitSide { kPosX, kNegX, kPosY, kNegY };

struct Door {
  int id = 0;
  DoorKind kind = DoorKind::kBacktrackBlocker;
  Segment segment;
  Rect trigger;
  ExitSide exit = ExitSide::kPosY;
};

/// Closed doors render with this texture.
inline constexpr Texture kDoorTexture = Texture::kUniformDark;

struct RewardSite {
  int path = 0;  // 1-based path id
  Vec2 position;
  double radius = 0.06;
};

struct NamedRect {
  std::string name;
  Rect rect;
};

/// Open/closed flag per door, indexed like MazeLayout::doors.
using DoorStates = std::vector<std::uint8_t>;

struct MazeLayout {
  std::string name;
  double width = 1.6;
  double height = 1.25;
  Pose home;
  std::vector<Wall> walls;
  std::vector<Rect> corridors;
  std::vector<Door> doors;
  std::vector<RewardSite> rewards;
  std::vector<NamedRect> junctions;
  std::vector<NamedRect> segments;

  /// Region whose entry arms reward crediting for the next path visit.
  const Rect& start_segment() const;
  const NamedRect* find_segment(std::string_view name) const;
  DoorStates all_open() const { return DoorStates(doors.size(), 0); }
};

/// Canonical triple T-maze: 4 reward arms, 7 T-intersections, 5 analysis segments.
MazeLayout canonical_triple_t();
/// Reduced two-tier variant with 2 reward arms (maximum fitness 3), for desk-scale runs.
MazeLayout double_t_variant();
/// Reflection about the vertical centre line x = width / 2.
MazeLayout mirrored(const MazeLayout& layout);
Pose mirrored(const Pose& pose, double width);

/// Builds wall segments as the boundary of the union of corridor rectangles.
/// Rectangles must have coordinates on a `resolution` lattice.
std::vector<Segment> corridor_boundary(const std::vector<Rect>& corridors, double width,
                                       double height, double resolution = 0.01);

std::string serialize_layout(const MazeLayout& layout);
MazeLayout parse_layout(std::string_view text, std::string_view source = "<layout>");
/// `spec` is "canonical", "double_t", or a file path.
MazeLayout load_layout(const std::string& spec);

struct LayoutReport {
  bool ok = true;
  int corridor_bins = 0;
  std::vector<std::string> problems;
  std::vector<std::string> notes;
};

/// Structural checks: corridor width, containment, reachability of every reward
/// from home, bin mask coverage of the free space. A layout named "triple_t"
/// additionally must have exactly 110 corridor bins, 4 rewards, 7 junctions and
/// the 5 analysis segments.
LayoutReport validate_layout(const MazeLayout& layout, const RobotBody& body, double bin_width = 0.08,
                             double bin_height = 0.10);

}  // namespace tmaze
