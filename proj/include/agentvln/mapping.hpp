#pragma once

// Incremental 2D occupancy grid built from back-projected depth, and frontier
// extraction over it.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "agentvln/geometry.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct MapConfig {
  double resolution = 0.1;
  double z_obstacle_min = 0.15;
  double z_obstacle_max = 1.8;
  int pixel_stride = 4;
  // A traversed cell becomes Free only where the ray passes it at or below
  // this height. Anything higher may be passing over a low obstacle. Set to
  // infinity to clear every cell the ground projection crosses.
  double free_height_gate = 0.15;
  int half_extent = 250;  // cells on each side of the center
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  // The grid is centered on the cell containing `center`, with cell edges on
  // multiples of the resolution.
  explicit OccupancyGrid(Point2 center, MapConfig config = {});

  const MapConfig& config() const { return config_; }
  double resolution() const { return config_.resolution; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }
  // World coordinates of the lower-left corner of cell (0, 0).
  WorldPoint origin() const;

  bool in_bounds(int c, int r) const {
    return c >= 0 && r >= 0 && c < cols_ && r < rows_;
  }
  CellState at(int c, int r) const {
    return static_cast<CellState>(cells_[index(c, r)]);
  }
  bool cell_of(Point2 p, int& c, int& r) const;
  Point2 center(int c, int r) const;

  // Monotone updates: Occupied is never downgraded.
  void mark_free(int c, int r);
  void mark_occupied(int c, int r);

  std::int64_t observed_count() const { return observed_; }
  std::int64_t count(CellState s) const;

  // Inclusive bounding box of known cells; false while nothing is known.
  bool known_box(int& c0, int& r0, int& c1, int& r1) const;

  const std::vector<std::uint8_t>& cells() const { return cells_; }

 private:
  std::size_t index(int c, int r) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  MapConfig config_;
  long long col0_ = 0;  // lattice index of column 0
  long long row0_ = 0;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::uint8_t> cells_;
  std::int64_t observed_ = 0;
  int min_c_ = std::numeric_limits<int>::max();
  int min_r_ = std::numeric_limits<int>::max();
  int max_c_ = -1;
  int max_r_ = -1;
};

// Cells crossed by the segment a->b in order, with the segment parameter in
// (0, 1] at which the segment leaves each cell. Both endpoint cells included.
void traverse_cells(const OccupancyGrid& grid, Point2 a, Point2 b,
                    const std::function<void(int, int, double)>& visit);

struct IntegrationStats {
  int rays = 0;
  int obstacle_hits = 0;
  std::int64_t newly_known = 0;
};

IntegrationStats integrate(OccupancyGrid& grid, const Observation& obs,
                           const CameraIntrinsics& K);

// Marks the cells whose centers lie within radius of p as Free. Used for the
// footprint the agent itself occupies.
void mark_disc_free(OccupancyGrid& grid, Point2 p, double radius);

struct Frontier {
  WorldPoint centroid;  // snapped to the nearest member cell center, z = 0
  int size = 0;
  std::vector<Point2> members;  // cell centers
};

// Records an obstacle point found by contact rather than by the camera.
void mark_contact(OccupancyGrid& grid, Point2 p);

// Clusters (8-connected) of Free cells 4-adjacent to Unknown, largest first.
std::vector<Frontier> frontiers(const OccupancyGrid& grid, int min_size = 1);

// Unknown = 128, Free = 255, Occupied = 0; first row is the max-y row. The
// sidecar JSON records origin, resolution and size.
void export_pgm(const OccupancyGrid& grid, const std::filesystem::path& pgm);

}  // namespace agentvln
