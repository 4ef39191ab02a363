#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/geometry.hpp"
#include "mqe/rng.hpp"

namespace mqe {

// One noisy point measurement taken by a robot.
struct Measurement {
  Vec2 location;
  double value = 0.0;
  int robot_id = -1;
  int step = -1;
};

// Ground-truth scalar raster over the workspace, one value per
// measurement-lattice node, normalized to [0,1]. Immutable after
// construction; safe for concurrent reads.
class Field {
 public:
  Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (static_cast<int>(values_.size()) != grid_.n_lattice())
      throw ValidationError("Field: value count does not match measurement lattice");
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("Field: value outside [0,1]");
  }

  static Field constant(GridSpec grid, double v) {
    return Field(grid, std::vector<double>(static_cast<std::size_t>(grid.n_lattice()), v));
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  double at(int ix, int iy) const {
    return values_[static_cast<std::size_t>(iy) * grid_.lattice_nx() + ix];
  }

  // Ground truth at a continuous point = value of the nearest lattice node.
  // Footprints land exactly on lattice nodes, so this is exact in normal use.
  double value_near(const Vec2& p) const {
    auto [ix, iy] = grid_.nearest_lattice(p);
    return at(ix, iy);
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

enum class FieldFormat { csv, pgm };

enum class SynthKind { blobs, gradient, checker };

inline SynthKind parse_synth_kind(const std::string& s) {
  if (s == "blobs") return SynthKind::blobs;
  if (s == "gradient") return SynthKind::gradient;
  if (s == "checker") return SynthKind::checker;
  throw ValidationError("unknown synthetic field kind: " + s);
}

namespace detail {

inline std::vector<std::vector<double>> read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      const std::string tok = line.substr(pos, next - pos);
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() && tok.find_first_not_of(" \t", used) != std::string::npos)
          throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ValidationError("CSV: bad numeric token '" + tok + "' in " + path);
      }
      pos = next + 1;
      if (next == line.size()) break;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError("CSV: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("CSV: no data in " + path);
  return rows;
}

// PGM header token reader that skips whitespace and # comments.
inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw ValidationError("PGM: truncated header");
  return tok;
}

inline std::vector<std::vector<double>> read_pgm_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw ValidationError("PGM: expected P2 or P5, got " + magic);
  const int w = std::stoi(pgm_token(in));
  const int h = std::stoi(pgm_token(in));
  const long maxval = std::stol(pgm_token(in));
  if (w <= 0 || h <= 0) throw ValidationError("PGM: bad dimensions");
  if (maxval <= 0 || maxval > 65535) throw ValidationError("PGM: maxval out of range");

  std::vector<std::vector<double>> rows(h, std::vector<double>(w));
  if (magic == "P2") {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        long v = std::stol(pgm_token(in));
        if (v < 0 || v > maxval) throw ValidationError("PGM: pixel value outside [0, maxval]");
        rows[y][x] = static_cast<double>(v) / static_cast<double>(maxval);
      }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        unsigned char buf[2] = {0, 0};
        in.read(reinterpret_cast<char*>(buf), bytes);
        if (!in) throw ValidationError("PGM: truncated pixel data");
        long v = bytes == 2 ? (static_cast<long>(buf[0]) << 8) | buf[1] : buf[0];
        if (v > maxval) throw ValidationError("PGM: pixel value outside [0, maxval]");
        rows[y][x] = static_cast<double>(v) / static_cast<double>(maxval);
      }
  }
  return rows;
}

}  // namespace detail

// Loads a raster and wraps it as a Field. CSV values must already be in
// [0,1]; PGM pixels are scaled by maxval. Raster dimensions must divide
// evenly into planning cells. Row 0 of the file is the minimum-y edge.
inline Field load_field(const std::string& path, FieldFormat format,
                        int pixels_per_cell_side = 5, double width_m = 80.0,
                        double height_m = 60.0) {
  auto rows = format == FieldFormat::csv ? detail::read_csv_matrix(path)
                                         : detail::read_pgm_matrix(path);
  const int ny = static_cast<int>(rows.size());
  const int nx = static_cast<int>(rows.front().size());
  if (nx % pixels_per_cell_side != 0 || ny % pixels_per_cell_side != 0)
    throw ValidationError("load_field: raster " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " is not a multiple of " + std::to_string(pixels_per_cell_side) +
                          " pixels per cell side");
  GridSpec grid;
  grid.cells_x = nx / pixels_per_cell_side;
  grid.cells_y = ny / pixels_per_cell_side;
  grid.width_m = width_m;
  grid.height_m = height_m;
  grid.pixels_per_cell_side = pixels_per_cell_side;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(nx) * ny);
  for (const auto& row : rows)
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("load_field: value outside [0,1] after scaling");
      values.push_back(v);
    }
  return Field(grid, std::move(values));
}

// Writes the raster so that load_field(save(...)) reproduces values exactly.
inline void save_field_csv(const Field& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const int nx = field.grid().lattice_nx(), ny = field.grid().lattice_ny();
  out.precision(17);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (x) out << ',';
      out << field.at(x, y);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

// Deterministic synthetic ground truth for desk-scale experiments.
inline Field synth_field(SynthKind kind, const GridSpec& grid, std::uint64_t seed) {
  grid.validate();
  const int nx = grid.lattice_nx(), ny = grid.lattice_ny();
  std::vector<double> values(static_cast<std::size_t>(nx) * ny, 0.0);

  switch (kind) {
    case SynthKind::gradient: {
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
          values[static_cast<std::size_t>(iy) * nx + ix] =
              nx > 1 ? static_cast<double>(ix) / (nx - 1) : 0.0;
      break;
    }
    case SynthKind::checker: {
      const int px = grid.pixels_per_cell_side;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
          values[static_cast<std::size_t>(iy) * nx + ix] = ((ix / px + iy / px) % 2) ? 1.0 : 0.0;
      break;
    }
    case SynthKind::blobs: {
      RngStream rng(derive_seed(seed, StreamTag::field_synth));
      const int n_blobs = 8;
      struct Blob {
        Vec2 c;
        double sigma, amp;
      };
      std::vector<Blob> blobs;
      const double smin = 0.08 * std::min(grid.width_m, grid.height_m);
      const double smax = 0.30 * std::min(grid.width_m, grid.height_m);
      for (int i = 0; i < n_blobs; ++i) {
        Blob b;
        b.c = {rng.uniform(0.0, grid.width_m), rng.uniform(0.0, grid.height_m)};
        b.sigma = rng.uniform(smin, smax);
        b.amp = rng.uniform(0.4, 1.0) * (rng.uniform() < 0.35 ? -1.0 : 1.0);
        blobs.push_back(b);
      }
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const Vec2 p = grid.lattice_point(ix, iy);
          double v = 0.0;
          for (const Blob& b : blobs) v += b.amp * std::exp(-sq_dist(p, b.c) / (2 * b.sigma * b.sigma));
          values[static_cast<std::size_t>(iy) * nx + ix] = v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      if (hi > lo)
        for (double& v : values) v = (v - lo) / (hi - lo);
      else
        std::fill(values.begin(), values.end(), 0.5);
      break;
    }
  }
  return Field(grid, std::move(values));
}

// Noisy point measurements: nearest-lattice ground truth plus independent
// Gaussian noise. Values are deliberately not clamped to [0,1]; the belief
// model assumes additive Gaussian noise.
inline std::vector<Measurement> sample(const Field& field, std::span<const Vec2> points,
                                       double noise_sd, RngStream& rng, int robot_id = -1,
                                       int step = -1) {
  std::vector<Measurement> out;
  out.reserve(points.size());
  const Rect ws = field.grid().workspace();
  for (const Vec2& p : points) {
    if (!ws.contains(p))
      throw ValidationError("sample: point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") outside workspace");
    Measurement m;
    m.location = p;
    m.value = field.value_near(p) + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
    m.robot_id = robot_id;
    m.step = step;
    out.push_back(m);
  }
  return out;
}

}  // namespace mqe
