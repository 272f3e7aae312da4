#include "tmaze/bins.hpp"

#include <algorithm>
#include <cmath>

#include "tmaze/error.hpp"

namespace tmaze {

BinGrid::BinGrid(const MazeLayout& layout, double body_radius, double bin_width, double bin_height)
    : width_(layout.width), height_(layout.height), bin_width_(bin_width), bin_height_(bin_height) {
  if (bin_width <= 0 || bin_height <= 0) throw Error(ErrorCode::kConfig, "bin sizes must be positive");
  cols_ = static_cast<int>(std::ceil(width_ / bin_width_ - 1e-9));
  rows_ = static_cast<int>(std::ceil(height_ / bin_height_ - 1e-9));
  index_.assign(static_cast<std::size_t>(cols_ * rows_), -1);

  std::vector<Rect> occupiable;
  for (const auto& c : layout.corridors) {
    Rect s = c.shrunk(body_radius);
    if (s.valid()) occupiable.push_back(s);
  }
  for (int row = 0; row < rows_; ++row) {
    for (int col = 0; col < cols_; ++col) {
      Rect cr = cell_rect({col, row});
      bool hit = std::any_of(occupiable.begin(), occupiable.end(), [&](const Rect& o) { return o.overlaps(cr); });
      if (hit) {
        index_[static_cast<std::size_t>(row * cols_ + col)] = static_cast<int>(cells_.size());
        cells_.push_back({col, row});
      }
    }
  }
}

GridCell BinGrid::cell_of(Vec2 p) const {
  int col = std::clamp(static_cast<int>(std::floor(p.x / bin_width_)), 0, cols_ - 1);
  int row = std::clamp(static_cast<int>(std::floor(p.y / bin_height_)), 0, rows_ - 1);
  return {col, row};
}

std::optional<int> BinGrid::bin_of(GridCell c) const {
  if (c.col < 0 || c.row < 0 || c.col >= cols_ || c.row >= rows_) return std::nullopt;
  int v = index_[static_cast<std::size_t>(c.row * cols_ + c.col)];
  if (v < 0) return std::nullopt;
  return v;
}

std::optional<int> BinGrid::bin_of(Vec2 p) const { return bin_of(cell_of(p)); }

int BinGrid::locate(Vec2 p) const {
  if (auto b = bin_of(p)) return *b;
  if (cells_.empty()) throw Error(ErrorCode::kLayout, "bin grid has no corridor bins");
  int best = 0;
  double best_d = norm(center(0) - p);
  for (int b = 1; b < size(); ++b) {
    double d = norm(center(b) - p);
    if (d < best_d) {
      best = b;
      best_d = d;
    }
  }
  return best;
}

Rect BinGrid::cell_rect(GridCell c) const {
  return {c.col * bin_width_, c.row * bin_height_, std::min((c.col + 1) * bin_width_, width_),
          std::min((c.row + 1) * bin_height_, height_)};
}

Vec2 BinGrid::center(int bin) const { return cell_rect(cell(bin)).center(); }

double BinGrid::bin_distance(int a, int b) const {
  Vec2 d = center(a) - center(b);
  return std::hypot(d.x / bin_width_, d.y / bin_height_);
}

}  // namespace tmaze
