#pragma once

#include <optional>
#include <vector>

#include "tmaze/geometry.hpp"
#include "tmaze/maze.hpp"

namespace tmaze {

struct GridCell {
  int col = 0;
  int row = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Spatial bins over the maze bounds. Columns are `bin_width` wide; rows are
/// `bin_height` tall except the last, which absorbs the remainder (1.25 m / 0.10 m
/// leaves a half-height top row). Only bins the robot centre can occupy are
/// corridor bins; they are numbered in (row, col) order.
class BinGrid {
 public:
  BinGrid(const MazeLayout& layout, double body_radius, double bin_width = 0.08,
          double bin_height = 0.10);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double bin_width() const { return bin_width_; }
  double bin_height() const { return bin_height_; }
  int size() const { return static_cast<int>(cells_.size()); }

  GridCell cell_of(Vec2 p) const;
  /// Corridor-bin index of the cell containing `p`, or nullopt outside the mask.
  std::optional<int> bin_of(Vec2 p) const;
  std::optional<int> bin_of(GridCell c) const;
  /// bin_of(p), falling back to the corridor bin with the nearest centre.
  int locate(Vec2 p) const;
  const GridCell& cell(int bin) const { return cells_[static_cast<std::size_t>(bin)]; }
  Rect cell_rect(GridCell c) const;
  Vec2 center(int bin) const;

  /// Euclidean distance between two bins' grid coordinates, in bin units.
  double bin_distance(int a, int b) const;

 private:
  int cols_ = 0;
  int rows_ = 0;
  double width_ = 0.0;
  double height_ = 0.0;
  double bin_width_ = 0.0;
  double bin_height_ = 0.0;
  std::vector<GridCell> cells_;
  std::vector<int> index_;  // cols_ * rows_, -1 outside the mask
};

}  // namespace tmaze
