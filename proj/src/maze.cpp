#include "tmaze/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "tmaze/bins.hpp"
#include "tmaze/error.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

double texture_shade(Texture texture, double along, double length) {
  constexpr double kDark = 0.15;
  constexpr double kLight = 1.0;
  switch (texture) {
    case Texture::kUniformDark: return kDark;
    case Texture::kUniformLight: return kLight;
    case Texture::kStripesWide:
      return static_cast<long long>(std::floor(along / 0.05)) % 2 == 0 ? kLight : kDark;
    case Texture::kStripesNarrow:
      return static_cast<long long>(std::floor(along / 0.02)) % 2 == 0 ? kLight : kDark;
    case Texture::kGradientUp:
    case Texture::kGradientDown: {
      double t = length > 0.0 ? std::clamp(along / length, 0.0, 1.0) : 0.0;
      if (texture == Texture::kGradientDown) t = 1.0 - t;
      return kDark + (kLight - kDark) * t;
    }
  }
  return kDark;
}

const Rect& MazeLayout::start_segment() const {
  const NamedRect* s = find_segment("seg1");
  if (!s) throw Error(ErrorCode::kLayout, "layout '" + name + "' has no seg1 segment");
  return s->rect;
}

const NamedRect* MazeLayout::find_segment(std::string_view segment_name) const {
  for (const auto& s : segments)
    if (s.name == segment_name) return &s;
  return nullptr;
}

std::vector<Segment> corridor_boundary(const std::vector<Rect>& corridors, double width,
                                       double height, double resolution) {
  const double inv = std::round(1.0 / resolution);
  const int nx = static_cast<int>(std::lround(width * inv));
  const int ny = static_cast<int>(std::lround(height * inv));
  std::vector<std::uint8_t> filled(static_cast<std::size_t>(nx * ny), 0);
  for (const auto& r : corridors) {
    int i0 = static_cast<int>(std::lround(r.x0 * inv)), i1 = static_cast<int>(std::lround(r.x1 * inv));
    int j0 = static_cast<int>(std::lround(r.y0 * inv)), j1 = static_cast<int>(std::lround(r.y1 * inv));
    for (int j = std::max(j0, 0); j < std::min(j1, ny); ++j)
      for (int i = std::max(i0, 0); i < std::min(i1, nx); ++i) filled[static_cast<std::size_t>(j * nx + i)] = 1;
  }
  auto at = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return 0;
    return filled[static_cast<std::size_t>(j * nx + i)];
  };

  std::vector<Segment> out;
  // Horizontal lattice lines; orientation +1 when the filled side is above.
  for (int j = 0; j <= ny; ++j) {
    int run_start = -1, run_side = 0;
    for (int i = 0; i <= nx; ++i) {
      int side = (i < nx) ? at(i, j) - at(i, j - 1) : 0;
      if (side != run_side) {
        if (run_side != 0) out.push_back({{run_start / inv, j / inv}, {i / inv, j / inv}});
        run_start = i;
        run_side = side;
      }
    }
  }
  for (int i = 0; i <= nx; ++i) {
    int run_start = -1, run_side = 0;
    for (int j = 0; j <= ny; ++j) {
      int side = (j < ny) ? at(i, j) - at(i - 1, j) : 0;
      if (side != run_side) {
        if (run_side != 0) out.push_back({{i / inv, run_start / inv}, {i / inv, j / inv}});
        run_start = j;
        run_side = side;
      }
    }
  }
  return out;
}

namespace {

constexpr double kTriggerDepth = 0.074;  // one body diameter past the junction

Rect cm(int x0, int y0, int x1, int y1) { return {x0 / 100.0, y0 / 100.0, x1 / 100.0, y1 / 100.0}; }

void add_branch_door(MazeLayout& m, const Rect& j, ExitSide side) {
  Door d;
  d.id = static_cast<int>(m.doors.size());
  d.kind = DoorKind::kBacktrackBlocker;
  d.exit = side;
  if (side == ExitSide::kNegX) {
    d.segment = {{j.x0, j.y0}, {j.x0, j.y1}};
    d.trigger = {j.x0 - kTriggerDepth, j.y0, j.x0, j.y1};
  } else {
    d.segment = {{j.x1, j.y0}, {j.x1, j.y1}};
    d.trigger = {j.x1, j.y0, j.x1 + kTriggerDepth, j.y1};
  }
  m.doors.push_back(d);
}

/// The junction sits on top of a reward arm; leaving the arm closes the branch
/// leading to the farther return corridor.
void add_enforcer_door(MazeLayout& m, const Rect& j) {
  Door d;
  d.id = static_cast<int>(m.doors.size());
  d.kind = DoorKind::kReturnPathEnforcer;
  d.exit = ExitSide::kPosY;
  d.trigger = {j.x0, j.y0 - kTriggerDepth, j.x1, j.y0};
  bool left_half = j.center().x < 0.5 * m.width;
  double x = left_half ? j.x1 : j.x0;
  d.segment = {{x, j.y0}, {x, j.y1}};
  m.doors.push_back(d);
}

Texture zone_texture(const MazeLayout& m, const Segment& s) {
  Vec2 mid = 0.5 * (s.a + s.b);
  double w = m.width;
  if (mid.y < 0.12) return Texture::kUniformLight;
  if (std::abs(mid.x - 0.5 * w) < 0.06 && mid.y < 0.42) return Texture::kUniformDark;
  if (mid.x < 0.175 * w) return Texture::kStripesWide;
  if (mid.x < 0.5 * w) return Texture::kGradientUp;
  if (mid.x < 0.825 * w) return Texture::kGradientDown;
  return Texture::kStripesNarrow;
}

void build_walls(MazeLayout& m) {
  m.walls.clear();
  for (const auto& s : corridor_boundary(m.corridors, m.width, m.height))
    m.walls.push_back({s, zone_texture(m, s)});
}

}  // namespace

MazeLayout canonical_triple_t() {
  MazeLayout m;
  m.name = "triple_t";
  m.width = 1.6;
  m.height = 1.25;
  m.home = {0.8, 0.05, std::numbers::pi / 2};
  // Corridors are 0.10 m wide and centred on bin centres (vertical) or bin rows
  // (horizontal) so the occupiable area maps onto exactly 110 bins.
  m.corridors = {
      cm(0, 0, 160, 10),     // bottom return to home
      cm(0, 0, 10, 120),     // left outer return (seg8-1)
      cm(150, 0, 160, 120),  // right outer return (seg8-2)
      cm(0, 110, 160, 120),  // top corridor joining the arm tops
      cm(75, 0, 85, 40),     // home stem (seg1)
      cm(31, 30, 129, 40),   // first tier
      cm(31, 30, 41, 70),    // seg3-1
      cm(119, 30, 129, 70),  // seg3-2
      cm(15, 60, 73, 70),    // second tier, left
      cm(87, 60, 145, 70),   // second tier, right
      cm(15, 60, 25, 120),   // arm 1
      cm(63, 60, 73, 120),   // arm 2
      cm(87, 60, 97, 120),   // arm 3
      cm(135, 60, 145, 120), // arm 4
  };
  build_walls(m);

  m.junctions = {
      {"T1", cm(75, 30, 85, 40)},   {"T2", cm(31, 60, 41, 70)},   {"T3", cm(119, 60, 129, 70)},
      {"T4", cm(15, 110, 25, 120)}, {"T5", cm(63, 110, 73, 120)}, {"T6", cm(87, 110, 97, 120)},
      {"T7", cm(135, 110, 145, 120)},
  };
  for (const auto& j : m.junctions) {
    add_branch_door(m, j.rect, ExitSide::kNegX);
    add_branch_door(m, j.rect, ExitSide::kPosX);
  }
  for (std::size_t k = 3; k < m.junctions.size(); ++k) add_enforcer_door(m, m.junctions[k].rect);

  m.rewards = {
      {1, {0.20, 0.85}, 0.06},
      {2, {0.68, 0.85}, 0.06},
      {3, {0.92, 0.85}, 0.06},
      {4, {1.40, 0.85}, 0.06},
  };
  m.segments = {
      {"seg1", cm(75, 10, 85, 30)},   {"seg3-1", cm(31, 40, 41, 60)}, {"seg3-2", cm(119, 40, 129, 60)},
      {"seg8-1", cm(0, 10, 10, 110)}, {"seg8-2", cm(150, 10, 160, 110)},
  };
  return m;
}

MazeLayout double_t_variant() {
  MazeLayout m;
  m.name = "double_t";
  m.width = 1.6;
  m.height = 1.25;
  m.home = {0.8, 0.05, std::numbers::pi / 2};
  m.corridors = {
      cm(0, 0, 160, 10),    cm(0, 0, 10, 100),    cm(150, 0, 160, 100), cm(0, 90, 160, 100),
      cm(75, 0, 85, 40),    cm(31, 30, 129, 40),  cm(31, 30, 41, 100),  cm(119, 30, 129, 100),
  };
  build_walls(m);
  m.junctions = {
      {"T1", cm(75, 30, 85, 40)},
      {"T2", cm(31, 90, 41, 100)},
      {"T3", cm(119, 90, 129, 100)},
  };
  for (const auto& j : m.junctions) {
    add_branch_door(m, j.rect, ExitSide::kNegX);
    add_branch_door(m, j.rect, ExitSide::kPosX);
  }
  add_enforcer_door(m, m.junctions[1].rect);
  add_enforcer_door(m, m.junctions[2].rect);
  m.rewards = {
      {1, {0.36, 0.70}, 0.06},
      {2, {1.24, 0.70}, 0.06},
  };
  m.segments = {
      {"seg1", cm(75, 10, 85, 30)},
      {"seg8-1", cm(0, 10, 10, 90)},
      {"seg8-2", cm(150, 10, 160, 90)},
  };
  return m;
}

Pose mirrored(const Pose& pose, double width) {
  return {width - pose.x, pose.y, normalize_angle(std::numbers::pi - pose.heading)};
}

MazeLayout mirrored(const MazeLayout& layout) {
  const double w = layout.width;
  auto mp = [w](Vec2 p) { return Vec2{w - p.x, p.y}; };
  auto mr = [w](const Rect& r) { return Rect{w - r.x1, r.y0, w - r.x0, r.y1}; };
  MazeLayout m = layout;
  m.name = layout.name + "_mirrored";
  m.home = mirrored(layout.home, w);
  for (auto& wall : m.walls) wall.segment = {mp(wall.segment.a), mp(wall.segment.b)};
  for (auto& c : m.corridors) c = mr(c);
  for (auto& d : m.doors) {
    d.segment = {mp(d.segment.a), mp(d.segment.b)};
    d.trigger = mr(d.trigger);
    if (d.exit == ExitSide::kPosX) d.exit = ExitSide::kNegX;
    else if (d.exit == ExitSide::kNegX) d.exit = ExitSide::kPosX;
  }
  for (auto& r : m.rewards) r.position = mp(r.position);
  for (auto& j : m.junctions) j.rect = mr(j.rect);
  for (auto& s : m.segments) s.rect = mr(s.rect);
  return m;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

const char* exit_name(ExitSide e) {
  switch (e) {
    case ExitSide::kPosX: return "+x";
    case ExitSide::kNegX: return "-x";
    case ExitSide::kPosY: return "+y";
    case ExitSide::kNegY: return "-y";
  }
  return "+y";
}

std::string join_doubles(std::initializer_list<double> vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ' ';
    out += format_double(v);
  }
  return out;
}

}  // namespace

std::string serialize_layout(const MazeLayout& m) {
  std::ostringstream o;
  o << "tmaze-layout v1\n";
  o << "name " << m.name << "\n";
  o << "bounds " << join_doubles({m.width, m.height}) << "\n";
  o << "home " << join_doubles({m.home.x, m.home.y, m.home.heading}) << "\n";
  for (const auto& c : m.corridors) o << "corridor " << join_doubles({c.x0, c.y0, c.x1, c.y1}) << "\n";
  for (const auto& w : m.walls)
    o << "wall " << join_doubles({w.segment.a.x, w.segment.a.y, w.segment.b.x, w.segment.b.y}) << " "
      << static_cast<int>(w.texture) << "\n";
  for (const auto& d : m.doors)
    o << "door " << d.id << " " << (d.kind == DoorKind::kBacktrackBlocker ? "backtrack" : "enforcer") << " "
      << join_doubles({d.segment.a.x, d.segment.a.y, d.segment.b.x, d.segment.b.y}) << " "
      << join_doubles({d.trigger.x0, d.trigger.y0, d.trigger.x1, d.trigger.y1}) << " " << exit_name(d.exit)
      << "\n";
  for (const auto& r : m.rewards)
    o << "reward " << r.path << " " << join_doubles({r.position.x, r.position.y, r.radius}) << "\n";
  for (const auto& j : m.junctions)
    o << "junction " << j.name << " " << join_doubles({j.rect.x0, j.rect.y0, j.rect.x1, j.rect.y1}) << "\n";
  for (const auto& s : m.segments)
    o << "segment " << s.name << " " << join_doubles({s.rect.x0, s.rect.y0, s.rect.x1, s.rect.y1}) << "\n";
  return o.str();
}

MazeLayout parse_layout(std::string_view text, std::string_view source) {
  MazeLayout m;
  m.name.clear();
  m.walls.clear();
  bool have_header = false, have_bounds = false, have_home = false;
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    std::string where = std::string(source) + ":" + std::to_string(line_no);
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    auto need = [&](std::size_t n) {
      if (tok.size() != n)
        throw Error(ErrorCode::kParse, where + ": '" + std::string(tok[0]) + "' expects " +
                                           std::to_string(n - 1) + " fields, got " + std::to_string(tok.size() - 1));
    };
    auto num = [&](std::size_t i) { return parse_double(tok[i], where); };
    auto rect_at = [&](std::size_t i) {
      Rect r{num(i), num(i + 1), num(i + 2), num(i + 3)};
      if (!r.valid()) throw Error(ErrorCode::kParse, where + ": rectangle has x0 > x1 or y0 > y1");
      return r;
    };
    if (!have_header) {
      if (tok.size() != 2 || tok[0] != "tmaze-layout" || tok[1] != "v1")
        throw Error(ErrorCode::kParse, where + ": expected header 'tmaze-layout v1'");
      have_header = true;
      continue;
    }
    const auto& key = tok[0];
    if (key == "name") {
      need(2);
      m.name = std::string(tok[1]);
    } else if (key == "bounds") {
      need(3);
      m.width = num(1);
      m.height = num(2);
      have_bounds = true;
    } else if (key == "home") {
      need(4);
      m.home = {num(1), num(2), normalize_angle(num(3))};
      have_home = true;
    } else if (key == "corridor") {
      need(5);
      m.corridors.push_back(rect_at(1));
    } else if (key == "wall") {
      need(6);
      long long t = parse_int(tok[5], where);
      if (t < 0 || t >= kTextureCount)
        throw Error(ErrorCode::kParse, where + ": texture id must be in [0, " + std::to_string(kTextureCount) + ")");
      m.walls.push_back({{{num(1), num(2)}, {num(3), num(4)}}, static_cast<Texture>(t)});
    } else if (key == "door") {
      need(12);
      Door d;
      d.id = static_cast<int>(parse_int(tok[1], where));
      if (d.id != static_cast<int>(m.doors.size()))
        throw Error(ErrorCode::kParse, where + ": door ids must be consecutive from 0");
      if (tok[2] == "backtrack") d.kind = DoorKind::kBacktrackBlocker;
      else if (tok[2] == "enforcer") d.kind = DoorKind::kReturnPathEnforcer;
      else throw Error(ErrorCode::kParse, where + ": door kind must be 'backtrack' or 'enforcer'");
      d.segment = {{num(3), num(4)}, {num(5), num(6)}};
      d.trigger = rect_at(7);
      if (tok[11] == "+x") d.exit = ExitSide::kPosX;
      else if (tok[11] == "-x") d.exit = ExitSide::kNegX;
      else if (tok[11] == "+y") d.exit = ExitSide::kPosY;
      else if (tok[11] == "-y") d.exit = ExitSide::kNegY;
      else throw Error(ErrorCode::kParse, where + ": door exit must be one of +x -x +y -y");
      m.doors.push_back(d);
    } else if (key == "reward") {
      need(5);
      RewardSite r;
      r.path = static_cast<int>(parse_int(tok[1], where));
      r.position = {num(2), num(3)};
      r.radius = num(4);
      if (r.path != static_cast<int>(m.rewards.size()) + 1)
        throw Error(ErrorCode::kParse, where + ": reward paths must be numbered 1, 2, ... in order");
      m.rewards.push_back(r);
    } else if (key == "junction" || key == "segment") {
      need(6);
      NamedRect nr{std::string(tok[1]), rect_at(2)};
      (key == "junction" ? m.junctions : m.segments).push_back(nr);
    } else {
      throw Error(ErrorCode::kParse, where + ": unknown record '" + std::string(key) + "'");
    }
  }
  if (!have_header) throw Error(ErrorCode::kParse, std::string(source) + ": empty layout");
  if (!have_bounds || !have_home)
    throw Error(ErrorCode::kParse, std::string(source) + ": layout needs 'bounds' and 'home' records");
  return m;
}

MazeLayout load_layout(const std::string& spec) {
  if (spec == "canonical" || spec == "triple_t") return canonical_triple_t();
  if (spec == "double_t") return double_t_variant();
  return parse_layout(read_file(spec), spec);
}

// ---------------------------------------------------------------------------
// Validation

LayoutReport validate_layout(const MazeLayout& m, const RobotBody& body, double bin_width,
                             double bin_height) {
  LayoutReport rep;
  auto problem = [&](std::string s) {
    rep.ok = false;
    rep.problems.push_back(std::move(s));
  };
  const double r = body.body_radius;
  const Rect bounds{0.0, 0.0, m.width, m.height};
  auto inside_bounds = [&](Vec2 p) { return bounds.shrunk(-1e-9).contains(p); };

  if (m.width <= 0 || m.height <= 0) {
    problem("bounds must be positive");
    return rep;
  }
  if (m.corridors.empty()) problem("no corridors");
  for (std::size_t i = 0; i < m.corridors.size(); ++i) {
    const auto& c = m.corridors[i];
    if (!inside_bounds({c.x0, c.y0}) || !inside_bounds({c.x1, c.y1}))
      problem("corridor " + std::to_string(i) + " leaves the maze bounds");
    if (std::min(c.width(), c.height()) < 2 * r - 1e-12)
      problem("corridor " + std::to_string(i) + " narrower than the robot body");
  }
  for (std::size_t i = 0; i < m.walls.size(); ++i) {
    const auto& w = m.walls[i].segment;
    if (!inside_bounds(w.a) || !inside_bounds(w.b)) problem("wall " + std::to_string(i) + " leaves the maze bounds");
    if (!w.horizontal() && !w.vertical()) problem("wall " + std::to_string(i) + " is not axis-aligned");
  }
  for (const auto& d : m.doors) {
    if (!d.segment.horizontal() && !d.segment.vertical())
      problem("door " + std::to_string(d.id) + " is not axis-aligned");
    bool in_corridor = false;
    for (const auto& c : m.corridors) in_corridor |= c.overlaps(d.trigger);
    if (!in_corridor) problem("door " + std::to_string(d.id) + " trigger lies outside every corridor");
  }
  if (!m.find_segment("seg1")) problem("missing seg1 (the start segment that arms reward crediting)");

  // Free-space lattice: points inside a corridor with full body clearance.
  const double step = 0.0025;
  const int nx = static_cast<int>(std::floor(m.width / step)) + 1;
  const int ny = static_cast<int>(std::floor(m.height / step)) + 1;
  std::vector<std::uint8_t> free(static_cast<std::size_t>(nx * ny), 0);
  auto clear = [&](Vec2 p) {
    bool in_corridor = false;
    for (const auto& c : m.corridors) {
      if (c.contains(p)) {
        in_corridor = true;
        break;
      }
    }
    if (!in_corridor) return false;
    for (const auto& w : m.walls)
      if (distance(w.segment, p) < r - 1e-9) return false;
    return true;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) free[static_cast<std::size_t>(j * nx + i)] = clear({i * step, j * step});

  if (!clear(m.home.position())) {
    problem("home pose is not clear of the walls");
    return rep;
  }
  std::vector<std::uint8_t> seen(free.size(), 0);
  std::deque<std::pair<int, int>> queue;
  {
    int hi = static_cast<int>(std::lround(m.home.x / step)), hj = static_cast<int>(std::lround(m.home.y / step));
    // The home pose may sit between lattice points; start from the nearest free one.
    int best = -1;
    double best_d = 1e9;
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di) {
        int i = hi + di, j = hj + dj;
        if (i < 0 || j < 0 || i >= nx || j >= ny || !free[static_cast<std::size_t>(j * nx + i)]) continue;
        double d = std::hypot(i * step - m.home.x, j * step - m.home.y);
        if (d < best_d) best_d = d, best = j * nx + i;
      }
    if (best < 0) {
      problem("home pose has no free lattice neighbour");
      return rep;
    }
    seen[static_cast<std::size_t>(best)] = 1;
    queue.emplace_back(best % nx, best / nx);
  }
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int a = i + di[k], b = j + dj[k];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      auto idx = static_cast<std::size_t>(b * nx + a);
      if (free[idx] && !seen[idx]) {
        seen[idx] = 1;
        queue.emplace_back(a, b);
      }
    }
  }

  for (const auto& rw : m.rewards) {
    bool reachable = false;
    for (int j = 0; j < ny && !reachable; ++j)
      for (int i = 0; i < nx && !reachable; ++i)
        if (seen[static_cast<std::size_t>(j * nx + i)] &&
            std::hypot(i * step - rw.position.x, j * step - rw.position.y) < rw.radius)
          reachable = true;
    if (!reachable) problem("reward " + std::to_string(rw.path) + " is not reachable from home");
  }

  BinGrid grid(m, r, bin_width, bin_height);
  rep.corridor_bins = grid.size();
  int unmapped = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (seen[static_cast<std::size_t>(j * nx + i)] && !grid.bin_of(Vec2{i * step, j * step})) ++unmapped;
  if (unmapped > 0) problem(std::to_string(unmapped) + " reachable positions fall outside the corridor bin mask");

  rep.notes.push_back("corridor bins: " + std::to_string(grid.size()));
  rep.notes.push_back("rewards: " + std::to_string(m.rewards.size()));
  rep.notes.push_back("T-intersections: " + std::to_string(m.junctions.size()));
  rep.notes.push_back("segments: " + std::to_string(m.segments.size()));
  rep.notes.push_back("doors: " + std::to_string(m.doors.size()));

  if (m.name == "triple_t") {
    if (grid.size() != 110) problem("triple_t layout must have exactly 110 corridor bins, has " + std::to_string(grid.size()));
    if (m.rewards.size() != 4) problem("triple_t layout must have exactly 4 rewards");
    if (m.junctions.size() != 7) problem("triple_t layout must have exactly 7 T-intersections");
    for (const char* s : {"seg1", "seg3-1", "seg3-2", "seg8-1", "seg8-2"})
      if (!m.find_segment(s)) problem(std::string("triple_t layout is missing segment ") + s);
    if (m.segments.size() != 5) problem("triple_t layout must have exactly 5 analysis segments");
  }
  return rep;
}

}  // namespace tmaze
