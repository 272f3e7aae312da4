#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "tmaze/geometry.hpp"
#include "tmaze/random.hpp"
#include "tmaze/rnn.hpp"
#include "tmaze/trial.hpp"

namespace tmaze::testing {

inline Genotype random_genotype(Rng& rng, double sd = 0.3) {
  Genotype g = Genotype::zeros();
  for (double& v : g.genes) v = rng.normal(0.0, sd);
  return g;
}

inline double wrap_pi(double a) {
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - std::numbers::pi;
}

/// Drives through a list of waypoints using the true pose: turn on the spot
/// until roughly aligned, then drive with proportional steering. Stops after
/// the last waypoint.
class WaypointController : public Controller {
 public:
  explicit WaypointController(std::vector<Vec2> waypoints, double tolerance = 0.012)
      : waypoints_(std::move(waypoints)), tolerance_(tolerance) {}

  void reset(std::uint64_t) override { next_ = 0; }

  WheelSpeeds act(const SensorFrame&, const Pose& pose) override {
    while (next_ < waypoints_.size() && norm(waypoints_[next_] - pose.position()) < tolerance_) ++next_;
    if (next_ >= waypoints_.size()) return {};
    Vec2 d = waypoints_[next_] - pose.position();
    double err = wrap_pi(std::atan2(d.y, d.x) - pose.heading);
    if (std::fabs(err) > 0.25) return err > 0 ? WheelSpeeds{-2.0, 2.0} : WheelSpeeds{2.0, -2.0};
    double fwd = std::min(5.0, 4.0 + 60.0 * norm(d));
    double turn = 4.0 * err;
    return {fwd - turn, fwd + turn};
  }

  bool finished() const { return next_ >= waypoints_.size(); }

 private:
  std::vector<Vec2> waypoints_;
  double tolerance_;
  std::size_t next_ = 0;
};

/// Outbound and return legs through the canonical maze for each path.
inline std::vector<Vec2> canonical_route(int path) {
  const Vec2 home{0.8, 0.05};
  const Vec2 t1{0.8, 0.35};
  std::vector<Vec2> r = {{0.8, 0.12}, t1};
  switch (path) {
    case 1: r.insert(r.end(), {{0.36, 0.35}, {0.36, 0.65}, {0.20, 0.65}, {0.20, 1.15}, {0.05, 1.15}, {0.05, 0.05}}); break;
    case 2: r.insert(r.end(), {{0.36, 0.35}, {0.36, 0.65}, {0.68, 0.65}, {0.68, 1.15}, {0.05, 1.15}, {0.05, 0.05}}); break;
    case 3: r.insert(r.end(), {{1.24, 0.35}, {1.24, 0.65}, {0.92, 0.65}, {0.92, 1.15}, {1.55, 1.15}, {1.55, 0.05}}); break;
    case 4: r.insert(r.end(), {{1.24, 0.35}, {1.24, 0.65}, {1.40, 0.65}, {1.40, 1.15}, {1.55, 1.15}, {1.55, 0.05}}); break;
    default: break;
  }
  r.push_back(home);
  return r;
}

inline std::vector<Vec2> canonical_tour(std::initializer_list<int> paths) {
  std::vector<Vec2> all;
  for (int p : paths) {
    auto r = canonical_route(p);
    all.insert(all.end(), r.begin(), r.end());
  }
  return all;
}

inline Environment canonical_env(int timeout = 5000) {
  Environment env;
  env.layout = canonical_triple_t();
  env.trial.timeout_steps = timeout;
  return env;
}

}  // namespace tmaze::testing
