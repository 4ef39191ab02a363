#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/field.hpp"
#include "mqe/stats.hpp"
#include "mqe/team.hpp"

namespace mqe {

namespace svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

class Writer {
 public:
  Writer(double width, double height) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"" << (extra.empty() ? "" : " ")
        << extra << "/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0) {
    os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << num(stroke_width) << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double stroke_width = 1.5) {
    os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
        << num(stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) os_ << ' ';
      os_ << num(pts[i].first) << ',' << num(pts[i].second);
    }
    os_ << "\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill) {
    os_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
        << "\" fill=\"" << fill << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "middle") {
    os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }

  void save(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << os_.str() << "</svg>\n";
    if (!out) throw IoError("write failed for " + path);
  }

 private:
  std::ostringstream os_;
};

inline const std::array<const char*, 8>& palette() {
  static const std::array<const char*, 8> p = {"#e6194b", "#3cb44b", "#4363d8", "#f58231",
                                               "#911eb4", "#46f0f0", "#f032e6", "#bcf60c"};
  return p;
}

}  // namespace svg

inline constexpr double kRenderScale = 8.0;   // SVG px per meter
inline constexpr double kRenderMargin = 10.0; // px

// World meters -> SVG pixels, y flipped so the minimum-y edge is at the
// bottom of the image.
inline std::pair<double, double> svg_map(const Vec2& p, const GridSpec& grid) {
  return {kRenderMargin + p.x * kRenderScale,
          kRenderMargin + (grid.height_m - p.y) * kRenderScale};
}

// Grayscale field background, per-robot paths as connected crosses, black
// start markers, white partition boundaries when present.
inline void render_paths(const TrialResult& result, const Field& field,
                         const std::string& out_path) {
  const GridSpec& grid = field.grid();
  svg::Writer w(2 * kRenderMargin + grid.width_m * kRenderScale,
                2 * kRenderMargin + grid.height_m * kRenderScale);

  const double pw = grid.pixel_w() * kRenderScale, ph = grid.pixel_h() * kRenderScale;
  for (int iy = 0; iy < grid.lattice_ny(); ++iy)
    for (int ix = 0; ix < grid.lattice_nx(); ++ix) {
      const int g = static_cast<int>(std::lround(field.at(ix, iy) * 255.0));
      char fill[8];
      std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", g, g, g);
      const auto [x, y] = svg_map(grid.lattice_point(ix, iy), grid);
      w.rect(x - 0.5 * pw, y - 0.5 * ph, pw, ph, fill);
    }

  if (result.partition) {
    const auto& owner = result.partition->owner;
    const double cw = grid.cell_w(), ch = grid.cell_h();
    for (int cy = 0; cy < grid.cells_y; ++cy)
      for (int cx = 0; cx < grid.cells_x; ++cx) {
        const int here = owner[static_cast<std::size_t>(grid.cell_index({cx, cy}))];
        if (cx + 1 < grid.cells_x &&
            owner[static_cast<std::size_t>(grid.cell_index({cx + 1, cy}))] != here) {
          const auto [x1, y1] = svg_map({(cx + 1) * cw, cy * ch}, grid);
          const auto [x2, y2] = svg_map({(cx + 1) * cw, (cy + 1) * ch}, grid);
          w.line(x1, y1, x2, y2, "white", 1.5);
        }
        if (cy + 1 < grid.cells_y &&
            owner[static_cast<std::size_t>(grid.cell_index({cx, cy + 1}))] != here) {
          const auto [x1, y1] = svg_map({cx * cw, (cy + 1) * ch}, grid);
          const auto [x2, y2] = svg_map({(cx + 1) * cw, (cy + 1) * ch}, grid);
          w.line(x1, y1, x2, y2, "white", 1.5);
        }
      }
  }

  const double cross = 3.0;
  for (std::size_t k = 0; k < result.paths.size(); ++k) {
    const char* color = svg::palette()[k % svg::palette().size()];
    const auto& path = result.paths[k];
    if (path.size() > 1) {
      std::vector<std::pair<double, double>> pts;
      for (Cell c : path) pts.push_back(svg_map(grid.cell_center(c), grid));
      w.polyline(pts, color);
    }
    for (Cell c : path) {
      const auto [x, y] = svg_map(grid.cell_center(c), grid);
      w.line(x - cross, y, x + cross, y, color, 1.2);
      w.line(x, y - cross, x, y + cross, color, 1.2);
    }
    const auto [sx, sy] = svg_map(grid.cell_center(path.front()), grid);
    w.circle(sx, sy, 3.5, "black");
  }

  w.save(out_path);
}

struct BoxplotGroup {
  std::string label;
  Summary5 stats;
};
struct BoxplotBracket {
  std::size_t a = 0, b = 0;  // group indices
  std::string band;
};

inline void render_boxplot(const std::vector<BoxplotGroup>& groups,
                           const std::vector<BoxplotBracket>& brackets,
                           const std::string& y_label, const std::string& out_path) {
  if (groups.empty()) throw ValidationError("render_boxplot: no groups");
  const double box_w = 46.0, gap = 28.0, left = 64.0, bottom = 40.0, top = 24.0;
  const double plot_h = 260.0;
  const double width = left + groups.size() * (box_w + gap) + gap;
  const double bracket_h = 18.0;
  const double height = top + brackets.size() * bracket_h + plot_h + bottom;

  double lo = groups[0].stats.min, hi = groups[0].stats.max;
  for (const auto& g : groups) {
    lo = std::min(lo, g.stats.min);
    hi = std::max(hi, g.stats.max);
  }
  if (hi <= lo) hi = lo + 1e-9;
  const double pad = 0.06 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double y0 = top + brackets.size() * bracket_h;
  auto ymap = [&](double v) { return y0 + plot_h * (1.0 - (v - lo) / (hi - lo)); };
  auto xmid = [&](std::size_t i) { return left + gap + i * (box_w + gap) + 0.5 * box_w; };

  svg::Writer w(width, height);
  w.line(left, y0, left, y0 + plot_h, "black");
  w.line(left, y0 + plot_h, width - gap * 0.5, y0 + plot_h, "black");
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    w.line(left - 4, ymap(v), left, ymap(v), "black");
    w.text(left - 8, ymap(v) + 4, buf, 10, "end");
  }
  w.text(14, y0 + plot_h / 2, y_label, 11);

  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& s = groups[i].stats;
    const double xm = xmid(i), xl = xm - 0.5 * box_w, xr = xm + 0.5 * box_w;
    w.line(xm, ymap(s.min), xm, ymap(s.q1), "black");
    w.line(xm, ymap(s.q3), xm, ymap(s.max), "black");
    w.line(xm - 10, ymap(s.min), xm + 10, ymap(s.min), "black");
    w.line(xm - 10, ymap(s.max), xm + 10, ymap(s.max), "black");
    w.rect(xl, ymap(s.q3), box_w, ymap(s.q1) - ymap(s.q3), "#9ecae1", "stroke=\"black\"");
    w.line(xl, ymap(s.median), xr, ymap(s.median), "black", 2.0);
    w.text(xm, y0 + plot_h + 16, groups[i].label, 11);
  }

  for (std::size_t bi = 0; bi < brackets.size(); ++bi) {
    const auto& br = brackets[bi];
    const double y = top + bi * bracket_h + 8;
    const double xa = xmid(br.a), xb = xmid(br.b);
    w.line(xa, y, xb, y, "black");
    w.line(xa, y, xa, y + 4, "black");
    w.line(xb, y, xb, y + 4, "black");
    w.text(0.5 * (xa + xb), y - 2, br.band, 10);
  }

  w.save(out_path);
}

}  // namespace mqe
