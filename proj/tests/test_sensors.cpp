#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tmaze/bins.hpp"
#include "tmaze/kinematics.hpp"
#include "tmaze/sensors.hpp"

using namespace tmaze;

namespace {

constexpr double kR = 0.037;

MazeLayout box_with_wall(Segment wall, Texture tex) {
  MazeLayout m;
  m.name = "box";
  m.width = 4.0;
  m.height = 4.0;
  m.walls.push_back({wall, tex});
  return m;
}

double min_distance(const MazeLayout& m, Vec2 p) {
  double d = 1e9;
  for (const auto& w : m.walls) d = std::min(d, distance(w.segment, p));
  return d;
}

// First t along the ray where it touches a wall, by sphere tracing: the
// distance to the nearest wall is always a safe step.
double march(const MazeLayout& m, Vec2 o, Vec2 dir, double max_t) {
  double t = 0.0;
  for (int i = 0; i < 1000000 && t <= max_t; ++i) {
    double d = min_distance(m, o + t * dir);
    if (d < 1e-11) return t;
    t += d;
  }
  return max_t + 1.0;
}

Pose random_clear_pose(const MazeLayout& m, Rng& rng) {
  for (;;) {
    const Rect& c = m.corridors[rng.index(m.corridors.size())];
    Vec2 p{rng.uniform(c.x0, c.x1), rng.uniform(c.y0, c.y1)};
    if (min_distance(m, p) >= kR) return {p.x, p.y, rng.uniform(0, kTwoPi)};
  }
}

}  // namespace

TEST_CASE("input layout constants") {
  CHECK(kInputCount == 91);
  CHECK(kPixelCount == 80);
  SensorFrame f;
  CHECK(f.values.size() == 91);
  CHECK(f.accel().data() == f.values.data() + 8);
  CHECK(f.pixels().data() == f.values.data() + 11);
  // Left/right sensor pairs are mirror images.
  for (int k = 0; k < 8; ++k) CHECK(kProximityBearings[k] == -kProximityBearings[7 - k]);
}

TEST_CASE("proximity response") {
  CHECK(proximity_response(0.0, 0.06) == 1.0);
  CHECK(proximity_response(0.03, 0.06) == doctest::Approx(0.5));
  CHECK(proximity_response(0.06, 0.06) == 0.0);
  CHECK(proximity_response(0.5, 0.06) == 0.0);
  double prev = 2.0;
  for (double d = 0; d < 0.07; d += 0.001) {
    double v = proximity_response(d, 0.06);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("proximity out of range is zero") {
  MazeLayout m = box_with_wall({{0, 0}, {4, 0}}, Texture::kUniformLight);
  auto p = read_proximity({2.0, 2.0, 0.3}, m, {}, kR, SensorConfig{});
  for (double v : p) CHECK(v == 0.0);
}

TEST_CASE("front sensor at contact and at 3 cm") {
  // Turn the body so that ps0 points straight at a vertical wall.
  MazeLayout m = box_with_wall({{1.0, 0}, {1.0, 4}}, Texture::kUniformLight);
  const double heading = -kProximityBearings[0];
  SensorConfig cfg;
  for (double gap : {0.0, 0.03, 0.0125, 0.059}) {
    Pose pose{1.0 - gap - kR, 2.0, heading};  // rim point lies `gap` from the wall
    auto p = read_proximity(pose, m, {}, kR, cfg);
    Vec2 dir = unit_vector(heading + kProximityBearings[0]);
    Vec2 rim = pose.position() + kR * dir;
    double t = march(m, rim, dir, 0.1);
    CHECK(t == doctest::Approx(gap).epsilon(1e-5));
    CHECK(p[0] == doctest::Approx(proximity_response(t, cfg.proximity_range)).epsilon(1e-4));
    CHECK(p[0] == doctest::Approx(proximity_response(gap, cfg.proximity_range)).epsilon(1e-12));
  }
}

TEST_CASE("proximity matches ray marching at random poses") {
  MazeLayout m = canonical_triple_t();
  Rng rng(17);
  SensorConfig cfg;
  for (int i = 0; i < 150; ++i) {
    Pose pose = random_clear_pose(m, rng);
    auto p = read_proximity(pose, m, m.all_open(), kR, cfg);
    for (int k = 0; k < 8; ++k) {
      Vec2 dir = unit_vector(pose.heading + kProximityBearings[k]);
      double t = march(m, pose.position() + kR * dir, dir, cfg.proximity_range);
      REQUIRE(p[k] == doctest::Approx(proximity_response(t, cfg.proximity_range)).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("proximity mirror symmetry") {
  MazeLayout m = canonical_triple_t();
  MazeLayout r = mirrored(m);
  Rng rng(23);
  SensorConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    Pose pose = random_clear_pose(m, rng);
    auto a = read_proximity(pose, m, m.all_open(), kR, cfg);
    auto b = read_proximity(mirrored(pose, m.width), r, r.all_open(), kR, cfg);
    for (int k = 0; k < 8; ++k) REQUIRE(a[k] == doctest::Approx(b[7 - k]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("closed doors are seen") {
  MazeLayout m = canonical_triple_t();
  DoorStates doors = m.all_open();
  const Door& d = m.doors[0];  // vertical, at the left edge of the first junction
  Pose pose{d.segment.a.x + kR + 0.01, 0.35, std::numbers::pi - kProximityBearings[0]};
  auto open = read_proximity(pose, m, doors, kR, SensorConfig{});
  doors[0] = 1;
  auto closed = read_proximity(pose, m, doors, kR, SensorConfig{});
  CHECK(open[0] == 0.0);
  CHECK(closed[0] == doctest::Approx(proximity_response(0.01, 0.06)));
}

TEST_CASE("accelerometer") {
  SensorConfig cfg;
  const double dt = 0.064;
  auto still = read_accelerometer({0.1, 0.0}, {0.1, 0.0}, 0.0, dt, cfg);
  CHECK(still[0] == 0.0);
  CHECK(still[1] == 0.0);
  CHECK(still[2] == doctest::Approx(9.81 / 10.0));

  const double v = 0.12;
  auto stop = read_accelerometer(v * unit_vector(1.1), {0, 0}, 1.1, dt, cfg);
  CHECK(stop[0] == doctest::Approx(-v / (dt * cfg.accel_norm)).epsilon(1e-12));
  CHECK(std::fabs(stop[1]) < 1e-12);

  // Constant wheel speeds trace a circle; the lateral channel is centripetal.
  RobotBody body;
  WheelSpeeds w{2.0, 4.0};
  BodyTwist tw = body_twist(w, body);
  const double radius = tw.linear / tw.angular;
  const double analytic = tw.angular * tw.angular * radius / cfg.accel_norm;
  Pose p0{0.5, 0.5, 0.2};
  Pose p1 = step_kinematics(p0, w, body, dt);
  Pose p2 = step_kinematics(p1, w, body, dt);
  Vec2 v1 = (1.0 / dt) * (p1.position() - p0.position());
  Vec2 v2 = (1.0 / dt) * (p2.position() - p1.position());
  auto arc = read_accelerometer(v1, v2, p2.heading, dt, cfg);
  CHECK(arc[1] > 0.0);
  CHECK(std::fabs(arc[1] - analytic) <= 0.05 * analytic);
}

TEST_CASE("camera column bearings span the field of view") {
  SensorConfig cfg;
  CHECK(camera_column_bearing(0, cfg) == doctest::Approx(27.0 * std::numbers::pi / 180.0));
  CHECK(camera_column_bearing(9, cfg) == doctest::Approx(-27.0 * std::numbers::pi / 180.0));
  for (int c = 1; c < kCameraCols; ++c) CHECK(camera_column_bearing(c, cfg) < camera_column_bearing(c - 1, cfg));
}

TEST_CASE("camera: white wall close up") {
  MazeLayout m = box_with_wall({{1.0, 0}, {1.0, 4}}, Texture::kUniformLight);
  Pose pose{1.0 - kR - 0.002, 2.0, 0.0};
  auto px = render_camera(pose, m, {}, kR, SensorConfig{});
  for (double v : px) CHECK(v > 0.99);
}

TEST_CASE("camera: long corridor fades out in the centre") {
  MazeLayout m = canonical_triple_t();
  Pose pose{0.05, 0.12, std::numbers::pi / 2};
  auto cols = camera_columns(pose, m, m.all_open(), kR, SensorConfig{});
  CHECK(cols[4] < 1e-12);
  CHECK(cols[5] < 1e-12);
  CHECK(cols[0] > 0.0);
}

TEST_CASE("camera: stripes at 45 degrees match a geometric oracle") {
  const double wall_y = 1.0;
  MazeLayout m = box_with_wall({{0.0, wall_y}, {2.0, wall_y}}, Texture::kStripesWide);
  SensorConfig cfg;
  Pose pose{0.5013, 0.6507, std::numbers::pi / 4};
  auto cols = camera_columns(pose, m, {}, kR, cfg);
  Vec2 eye = pose.position() + kR * unit_vector(pose.heading);
  double fov = cfg.camera_fov_deg * std::numbers::pi / 180.0;
  int distinct_shades = 0;
  double last = -1.0;
  for (int c = 0; c < kCameraCols; ++c) {
    double theta = pose.heading + fov / 2 - (c + 0.5) * fov / kCameraCols;
    double t = (wall_y - eye.y) / std::sin(theta);
    double x = eye.x + t * std::cos(theta);
    double stripe = std::fmod(std::floor(x / 0.05), 2.0) == 0.0 ? 1.0 : 0.15;
    double expected = t <= cfg.camera_range ? stripe * (1.0 - t / cfg.camera_range) : 0.0;
    CHECK(cols[c] == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    if (std::fabs(stripe - last) > 0.5) ++distinct_shades;
    last = stripe;
  }
  CHECK(distinct_shades >= 3);
}

TEST_CASE("camera rows replicate columns and doors render dark") {
  MazeLayout m = canonical_triple_t();
  Pose pose{0.8, 0.2, std::numbers::pi / 2};
  DoorStates doors = m.all_open();
  auto px = render_camera(pose, m, doors, kR, SensorConfig{});
  for (int r = 1; r < kCameraRows; ++r)
    for (int c = 0; c < kCameraCols; ++c) CHECK(px[r * kCameraCols + c] == px[c]);
  CHECK(render_camera(pose, m, doors, kR, SensorConfig{}) == px);
}

TEST_CASE("all sensor outputs stay in range over 10^6 random poses") {
  MazeLayout m = canonical_triple_t();
  Rng rng(99);
  SensorConfig cfg;
  DoorStates doors = m.all_open();
  const int n = 1000000;
  int bad = 0;
  for (int i = 0; i < n; ++i) {
    if (i % 1000 == 0)
      for (auto& d : doors) d = rng.bernoulli(0.3);
    Pose pose = random_clear_pose(m, rng);
    Vec2 v0{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    Vec2 v1{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    SensorFrame f = sense(pose, v0, v1, m, doors, kR, 0.064, cfg);
    for (double v : f.proximity()) bad += !(v >= 0.0 && v <= 1.0);
    for (double v : f.pixels()) bad += !(v >= 0.0 && v <= 1.0);
    for (double v : f.accel()) bad += !std::isfinite(v);
  }
  CHECK(bad == 0);
}
