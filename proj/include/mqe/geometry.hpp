#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mqe/errors.hpp"

namespace mqe {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double sq_dist(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double dist(const Vec2& a, const Vec2& b) { return std::sqrt(sq_dist(a, b)); }

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(const Vec2& p, double eps = 0.0) const {
    return p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps;
  }
  // Centered sub-rectangle with side lengths scaled by f in [0, 1].
  Rect scaled(double f) const {
    const Vec2 c = center();
    const double hw = 0.5 * f * width(), hh = 0.5 * f * height();
    return {c.x - hw, c.y - hh, c.x + hw, c.y + hh};
  }
};

// Planning grid over a rectangular workspace. Each visited cell is imaged as
// a pixels_per_cell_side x pixels_per_cell_side block of sub-pixel
// measurements; the union of all blocks forms the measurement lattice.
struct GridSpec {
  int cells_x = 25;
  int cells_y = 25;
  double width_m = 80.0;
  double height_m = 60.0;
  int pixels_per_cell_side = 5;

  void validate() const {
    if (cells_x < 1 || cells_y < 1)
      throw ValidationError("GridSpec: cell counts must be >= 1");
    if (!(width_m > 0.0) || !(height_m > 0.0))
      throw ValidationError("GridSpec: workspace dimensions must be positive");
    if (pixels_per_cell_side < 1)
      throw ValidationError("GridSpec: pixels_per_cell_side must be >= 1");
  }

  double cell_w() const { return width_m / cells_x; }
  double cell_h() const { return height_m / cells_y; }
  int lattice_nx() const { return cells_x * pixels_per_cell_side; }
  int lattice_ny() const { return cells_y * pixels_per_cell_side; }
  double pixel_w() const { return width_m / lattice_nx(); }
  double pixel_h() const { return height_m / lattice_ny(); }
  int n_cells() const { return cells_x * cells_y; }
  int n_lattice() const { return lattice_nx() * lattice_ny(); }
  int footprint_size() const { return pixels_per_cell_side * pixels_per_cell_side; }

  Rect workspace() const { return {0.0, 0.0, width_m, height_m}; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < cells_x && c.y >= 0 && c.y < cells_y; }
  int cell_index(Cell c) const { return c.y * cells_x + c.x; }
  Cell cell_at(int index) const { return {index % cells_x, index / cells_x}; }

  Vec2 cell_center(Cell c) const {
    return {(c.x + 0.5) * cell_w(), (c.y + 0.5) * cell_h()};
  }
  Rect cell_rect(Cell c) const {
    return {c.x * cell_w(), c.y * cell_h(), (c.x + 1) * cell_w(), (c.y + 1) * cell_h()};
  }
  Cell cell_containing(const Vec2& p) const {
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    return {clampi(static_cast<int>(p.x / cell_w()), cells_x - 1),
            clampi(static_cast<int>(p.y / cell_h()), cells_y - 1)};
  }

  Vec2 lattice_point(int ix, int iy) const {
    return {(ix + 0.5) * pixel_w(), (iy + 0.5) * pixel_h()};
  }
  // Nearest measurement-lattice node indices for a point in the workspace.
  std::pair<int, int> nearest_lattice(const Vec2& p) const {
    auto snap = [](double v, double step, int n) {
      int i = static_cast<int>(std::lround(v / step - 0.5));
      return i < 0 ? 0 : (i >= n ? n - 1 : i);
    };
    return {snap(p.x, pixel_w(), lattice_nx()), snap(p.y, pixel_h(), lattice_ny())};
  }
};

// Sub-pixel centers of one cell's image, row-major over the cell's block.
// These coincide exactly with measurement-lattice nodes.
inline std::vector<Vec2> footprint(Cell c, const GridSpec& grid) {
  if (!grid.in_bounds(c))
    throw ValidationError("footprint: cell (" + std::to_string(c.x) + "," +
                          std::to_string(c.y) + ") outside grid");
  const int px = grid.pixels_per_cell_side;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(px) * px);
  for (int sy = 0; sy < px; ++sy)
    for (int sx = 0; sx < px; ++sx)
      pts.push_back(grid.lattice_point(c.x * px + sx, c.y * px + sy));
  return pts;
}

// Assignment of every grid cell to a region (one per robot).
struct Partition {
  std::vector<int> owner;  // indexed by GridSpec::cell_index
  int n_regions = 0;

  int owner_at(const GridSpec& grid, Cell c) const { return owner[grid.cell_index(c)]; }
  bool allows(const GridSpec& grid, Cell c, int region) const {
    return owner_at(grid, c) == region;
  }
};

}  // namespace mqe
