#include "agentvln/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "agentvln/errors.hpp"
#include "agentvln/image.hpp"

namespace agentvln {

OccupancyGrid::OccupancyGrid(Point2 center, MapConfig config)
    : config_(config) {
  if (!(config_.resolution > 0.0)) {
    throw InvalidArgument("grid resolution must be positive");
  }
  if (config_.half_extent < 1) throw InvalidArgument("grid extent too small");
  const auto cx = static_cast<long long>(std::floor(center.x / config_.resolution));
  const auto cy = static_cast<long long>(std::floor(center.y / config_.resolution));
  col0_ = cx - config_.half_extent;
  row0_ = cy - config_.half_extent;
  cols_ = rows_ = 2 * config_.half_extent + 1;
  cells_.assign(static_cast<std::size_t>(cols_) * rows_,
                static_cast<std::uint8_t>(CellState::Unknown));
}

WorldPoint OccupancyGrid::origin() const {
  return {static_cast<double>(col0_) * config_.resolution,
          static_cast<double>(row0_) * config_.resolution, 0.0};
}

bool OccupancyGrid::cell_of(Point2 p, int& c, int& r) const {
  c = static_cast<int>(
      static_cast<long long>(std::floor(p.x / config_.resolution)) - col0_);
  r = static_cast<int>(
      static_cast<long long>(std::floor(p.y / config_.resolution)) - row0_);
  return in_bounds(c, r);
}

Point2 OccupancyGrid::center(int c, int r) const {
  return {(static_cast<double>(col0_ + c) + 0.5) * config_.resolution,
          (static_cast<double>(row0_ + r) + 0.5) * config_.resolution};
}

void OccupancyGrid::mark_free(int c, int r) {
  if (!in_bounds(c, r)) return;
  auto& cell = cells_[index(c, r)];
  if (cell != static_cast<std::uint8_t>(CellState::Unknown)) return;
  cell = static_cast<std::uint8_t>(CellState::Free);
  ++observed_;
  min_c_ = std::min(min_c_, c);
  min_r_ = std::min(min_r_, r);
  max_c_ = std::max(max_c_, c);
  max_r_ = std::max(max_r_, r);
}

void OccupancyGrid::mark_occupied(int c, int r) {
  if (!in_bounds(c, r)) return;
  auto& cell = cells_[index(c, r)];
  if (cell == static_cast<std::uint8_t>(CellState::Occupied)) return;
  if (cell == static_cast<std::uint8_t>(CellState::Unknown)) ++observed_;
  cell = static_cast<std::uint8_t>(CellState::Occupied);
  min_c_ = std::min(min_c_, c);
  min_r_ = std::min(min_r_, r);
  max_c_ = std::max(max_c_, c);
  max_r_ = std::max(max_r_, r);
}

std::int64_t OccupancyGrid::count(CellState s) const {
  return std::count(cells_.begin(), cells_.end(), static_cast<std::uint8_t>(s));
}

bool OccupancyGrid::known_box(int& c0, int& r0, int& c1, int& r1) const {
  if (max_c_ < 0) return false;
  c0 = min_c_;
  r0 = min_r_;
  c1 = max_c_;
  r1 = max_r_;
  return true;
}

void traverse_cells(const OccupancyGrid& grid, Point2 a, Point2 b,
                    const std::function<void(int, int, double)>& visit) {
  const double res = grid.resolution();
  const double gx0 = a.x / res, gy0 = a.y / res;
  const double dx = b.x / res - gx0, dy = b.y / res - gy0;
  int c = 0, r = 0, c_end = 0, r_end = 0;
  grid.cell_of(a, c, r);
  grid.cell_of(b, c_end, r_end);
  const double ix = std::floor(gx0), iy = std::floor(gy0);
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double t_max_x = step_x > 0 ? (ix + 1.0 - gx0) / dx
                   : step_x < 0 ? (gx0 - ix) / -dx
                                : kInf;
  double t_max_y = step_y > 0 ? (iy + 1.0 - gy0) / dy
                   : step_y < 0 ? (gy0 - iy) / -dy
                                : kInf;
  const double t_dx = step_x != 0 ? 1.0 / std::abs(dx) : kInf;
  const double t_dy = step_y != 0 ? 1.0 / std::abs(dy) : kInf;
  const int limit = std::abs(c_end - c) + std::abs(r_end - r) + 2;
  for (int i = 0; i < limit; ++i) {
    const bool last = c == c_end && r == r_end;
    const double t_exit = last ? 1.0 : std::min({t_max_x, t_max_y, 1.0});
    visit(c, r, t_exit);
    if (last || t_exit >= 1.0) return;
    if (t_max_x < t_max_y) {
      c += step_x;
      t_max_x += t_dx;
    } else if (t_max_y < t_max_x) {
      r += step_y;
      t_max_y += t_dy;
    } else {
      c += step_x;
      r += step_y;
      t_max_x += t_dx;
      t_max_y += t_dy;
    }
  }
}

IntegrationStats integrate(OccupancyGrid& grid, const Observation& obs,
                           const CameraIntrinsics& K) {
  IntegrationStats stats;
  const auto before = grid.observed_count();
  const MapConfig& cfg = grid.config();
  const Mat3& R = obs.pose.rotation;
  const Vec3& t = obs.pose.translation;
  const Point2 o{t.x(), t.y()};
  const double h = t.z();
  int cam_c = 0, cam_r = 0;
  grid.cell_of(o, cam_c, cam_r);
  const int stride = std::max(1, cfg.pixel_stride);

  for (int v = 0; v < obs.depth.height(); v += stride) {
    for (int u = 0; u < obs.depth.width(); u += stride) {
      if (!obs.depth.valid(u, v)) continue;
      const double d = obs.depth.at(u, v);
      const Vec3 cam((u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d);
      const Vec3 P = R * cam + t;
      ++stats.rays;
      if (P.z() > cfg.z_obstacle_max) continue;
      const bool obstacle = P.z() >= cfg.z_obstacle_min;
      const Point2 p{P.x(), P.y()};
      const double len = std::hypot(p.x - o.x, p.y - o.y);
      int hit_c = 0, hit_r = 0;
      if (obstacle) {
        // Nudge across the surface so a face hit lands in the obstacle cell.
        const double k = len > 0.0 ? 1e-4 / len : 0.0;
        grid.cell_of({p.x + k * (p.x - o.x), p.y + k * (p.y - o.y)}, hit_c,
                     hit_r);
        grid.mark_occupied(hit_c, hit_r);
        ++stats.obstacle_hits;
      }

      double s0 = 0.0;
      const double gate = cfg.free_height_gate;
      if (h > gate) {
        if (P.z() >= gate) continue;
        s0 = (h - gate) / (h - P.z());
      }
      const Point2 a{o.x + s0 * (p.x - o.x), o.y + s0 * (p.y - o.y)};
      traverse_cells(grid, a, p, [&](int c, int r, double) {
        if (s0 == 0.0 && c == cam_c && r == cam_r) return;
        if (obstacle && c == hit_c && r == hit_r) return;
        grid.mark_free(c, r);
      });
    }
  }
  stats.newly_known = grid.observed_count() - before;
  return stats;
}

void mark_disc_free(OccupancyGrid& grid, Point2 p, double radius) {
  const int reach = static_cast<int>(std::ceil(radius / grid.resolution())) + 1;
  int pc = 0, pr = 0;
  grid.cell_of(p, pc, pr);
  for (int r = pr - reach; r <= pr + reach; ++r) {
    for (int c = pc - reach; c <= pc + reach; ++c) {
      if (!grid.in_bounds(c, r)) continue;
      const Point2 q = grid.center(c, r);
      if (std::hypot(q.x - p.x, q.y - p.y) <= radius) grid.mark_free(c, r);
    }
  }
}

void mark_contact(OccupancyGrid& grid, Point2 p) {
  int c = 0, r = 0;
  if (grid.cell_of(p, c, r)) grid.mark_occupied(c, r);
}

std::vector<Frontier> frontiers(const OccupancyGrid& grid, int min_size) {
  std::vector<Frontier> out;
  int c0 = 0, r0 = 0, c1 = 0, r1 = 0;
  if (!grid.known_box(c0, r0, c1, r1)) return out;
  const auto unknown = [&](int c, int r) {
    return grid.in_bounds(c, r) && grid.at(c, r) == CellState::Unknown;
  };
  const int w = c1 - c0 + 1;
  const int h = r1 - r0 + 1;
  std::vector<std::uint8_t> is_frontier(static_cast<std::size_t>(w) * h, 0);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (grid.at(c, r) != CellState::Free) continue;
      if (unknown(c + 1, r) || unknown(c - 1, r) || unknown(c, r + 1) ||
          unknown(c, r - 1)) {
        is_frontier[static_cast<std::size_t>(r - r0) * w + (c - c0)] = 1;
      }
    }
  }
  std::vector<int> stack;
  std::vector<int> members;
  for (int start = 0; start < w * h; ++start) {
    if (is_frontier[static_cast<std::size_t>(start)] != 1) continue;
    members.clear();
    stack.push_back(start);
    is_frontier[static_cast<std::size_t>(start)] = 2;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      members.push_back(idx);
      const int c = idx % w, r = idx / w;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int nc = c + dc, nr = r + dr;
          if (nc < 0 || nr < 0 || nc >= w || nr >= h) continue;
          auto& f = is_frontier[static_cast<std::size_t>(nr) * w + nc];
          if (f == 1) {
            f = 2;
            stack.push_back(nr * w + nc);
          }
        }
      }
    }
    if (static_cast<int>(members.size()) < min_size) continue;
    double sx = 0.0, sy = 0.0;
    for (int idx : members) {
      const Point2 q = grid.center(c0 + idx % w, r0 + idx / w);
      sx += q.x;
      sy += q.y;
    }
    sx /= static_cast<double>(members.size());
    sy /= static_cast<double>(members.size());
    double best = std::numeric_limits<double>::infinity();
    Point2 snapped{sx, sy};
    std::vector<Point2> cells;
    cells.reserve(members.size());
    for (int idx : members) {
      const Point2 q = grid.center(c0 + idx % w, r0 + idx / w);
      cells.push_back(q);
      const double d = std::hypot(q.x - sx, q.y - sy);
      if (d < best) {
        best = d;
        snapped = q;
      }
    }
    out.push_back({{snapped.x, snapped.y, 0.0}, static_cast<int>(members.size()),
                   std::move(cells)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
    return a.size > b.size;
  });
  return out;
}

void export_pgm(const OccupancyGrid& grid, const std::filesystem::path& pgm) {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(grid.cols()) *
                                   grid.rows());
  for (int r = 0; r < grid.rows(); ++r) {
    const int row = grid.rows() - 1 - r;
    for (int c = 0; c < grid.cols(); ++c) {
      std::uint8_t g = 128;
      if (grid.at(c, r) == CellState::Free) g = 255;
      if (grid.at(c, r) == CellState::Occupied) g = 0;
      pixels[static_cast<std::size_t>(row) * grid.cols() + c] = g;
    }
  }
  write_pgm(pgm, grid.cols(), grid.rows(), pixels);
  const WorldPoint o = grid.origin();
  nlohmann::json meta = {{"origin", {o.x, o.y}},
                         {"resolution", grid.resolution()},
                         {"width", grid.cols()},
                         {"height", grid.rows()},
                         {"first_row", "max_y"},
                         {"values", {{"unknown", 128}, {"free", 255}, {"occupied", 0}}}};
  auto sidecar = pgm;
  sidecar.replace_extension(".json");
  std::ofstream f(sidecar);
  if (!f) throw FormatError("cannot open " + sidecar.string());
  f << meta.dump(2) << "\n";
}

}  // namespace agentvln
