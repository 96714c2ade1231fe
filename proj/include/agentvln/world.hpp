#pragma once

// Procedural 2.5D scenes, the raycast sensor, the agent embodiment and the
// episode definitions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentvln/geometry.hpp"

namespace agentvln {

inline constexpr double kForwardStep = 0.25;
inline constexpr double kTurnAngle = 0.2617993877991494;  // 15 degrees
inline constexpr double kAgentRadius = 0.18;
inline constexpr double kMaxRange = 10.0;
inline constexpr double kWallHeight = 2.5;
inline constexpr double kGeodesicResolution = 0.1;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};
using Polygon = std::vector<Point2>;

struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  Polygon polygon() const;
};

bool point_in_polygon(const Polygon& poly, Point2 p);
double distance_to_polygon(const Polygon& poly, Point2 p);
// Minimum distance between a segment and a polygon (0 if they intersect).
double segment_polygon_distance(const Polygon& poly, Point2 a, Point2 b);
bool segment_intersects_polygon(const Polygon& poly, Point2 a, Point2 b);

enum class Difficulty { Rooms, Corridor, OcclusionStress };
std::string_view to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view s);

struct SceneObject {
  std::string label;
  Polygon footprint;
  // Top-center of the object: (x, y) is the footprint center, z its height.
  WorldPoint anchor;

  double height() const { return anchor.z; }
};

struct Scene {
  // Walls and structural blocks, extruded from the floor to kWallHeight.
  std::vector<Polygon> footprint;
  std::vector<SceneObject> objects;
  Rect bounds;
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::Rooms;

  // Obstacle polygons: walls first, then object footprints.
  std::vector<Polygon> obstacles() const;
  bool point_free(Point2 p) const;
  bool disc_free(Point2 c, double radius) const;
  std::vector<std::string> labels() const;
};

// Semantic codes written into Observation::semantic.
inline constexpr std::uint16_t kCodeSky = 0;
inline constexpr std::uint16_t kCodeFloor = 1;
inline constexpr std::uint16_t kCodeWall = 2;
inline constexpr std::uint16_t kCodeObjectBase = 3;

inline std::uint16_t object_code(std::size_t index) {
  return static_cast<std::uint16_t>(kCodeObjectBase + index);
}

struct Observation {
  int width = 0;
  int height = 0;
  // Per-pixel code: sky, floor, wall, or kCodeObjectBase + object index.
  std::vector<std::uint16_t> semantic;
  DepthMap depth;
  Pose pose;
  int timestep = 0;
  // Object index -> label, copied from the scene.
  std::vector<std::string> labels;

  std::uint16_t code_at(int u, int v) const {
    return semantic[static_cast<std::size_t>(v) * width + u];
  }
  // Empty string for non-object codes.
  const std::string& label_of(std::uint16_t code) const;
  std::size_t count_label(std::string_view label) const;
};

struct RayHit {
  double depth = 0.0;  // camera-frame z
  std::uint16_t code = kCodeSky;
  bool valid = false;
};

// First hit along the ray through a continuous pixel coordinate.
RayHit cast_pixel(const Scene& scene, const Pose& pose,
                  const CameraIntrinsics& K, const PixelPoint& pixel);

// Throws PoseInCollision when the camera center lies inside an obstacle.
Observation render(const Scene& scene, const Pose& pose,
                   const CameraIntrinsics& K, int timestep = 0);

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose pose(double camera_height = kDefaultCameraHeight) const {
    return heading_pose(x, y, theta, camera_height);
  }
  Point2 position() const { return {x, y}; }
};

enum class FineAction { Forward, Left, Right };
std::string_view to_string(FineAction a);
FineAction fine_action_from_string(std::string_view s);

struct StepResult {
  PlanarPose pose;
  bool collided = false;
  // Obstacle point touched by the blocked move (a bump sensor reading).
  std::optional<Point2> contact;
};

StepResult step(const Scene& scene, const PlanarPose& pose, FineAction action);

// Free-space raster of a scene, inflated by the agent radius.
class NavRaster {
 public:
  explicit NavRaster(const Scene& scene,
                     double resolution = kGeodesicResolution,
                     double inflation = kAgentRadius);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double resolution() const { return resolution_; }
  bool traversable(int c, int r) const {
    return c >= 0 && r >= 0 && c < cols_ && r < rows_ &&
           cells_[static_cast<std::size_t>(r) * cols_ + c] != 0;
  }
  bool cell_of(Point2 p, int& c, int& r) const;
  Point2 center(int c, int r) const;
  // Nearest traversable cell within max_dist of p (p's own cell first).
  bool snap(Point2 p, double max_dist, int& c, int& r) const;
  bool line_of_sight(Point2 a, Point2 b) const;

 private:
  double resolution_;
  double origin_x_;
  double origin_y_;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<unsigned char> cells_;
};

// Dijkstra distance field (8-connected, diagonal cost sqrt(2)*res, no corner
// cutting) from one source over a NavRaster.
class GeodesicField {
 public:
  GeodesicField(const NavRaster& raster, WorldPoint source);

  bool source_valid() const { return source_valid_; }
  // Grid distance from the source to p (snapped), nullopt if unreachable.
  std::optional<double> distance_to(WorldPoint p) const;
  // Cell-center polyline from p back to the source; empty if unreachable.
  std::vector<Point2> path_from(WorldPoint p) const;

 private:
  const NavRaster* raster_;
  bool source_valid_ = false;
  std::vector<double> dist_;
  std::vector<int> parent_;
};

inline constexpr double kSnapDistance = 1.0;

// Any-angle shortest-path length: 8-connected grid search, then the path is
// pulled taut by line-of-sight shortcuts. Endpoints in blocked cells snap to
// the nearest traversable cell within kSnapDistance.
std::optional<double> geodesic_distance(const Scene& scene, WorldPoint a,
                                        WorldPoint b);
std::optional<double> geodesic_distance(const NavRaster& raster, WorldPoint a,
                                        WorldPoint b);
// Taut path from a to b, endpoints included; empty if unreachable.
std::vector<Point2> geodesic_path(const NavRaster& raster, WorldPoint a,
                                  WorldPoint b);

Scene generate_scene(std::uint64_t seed, Difficulty difficulty);

struct SubGoal {
  std::string relation;
  std::string object_label;
};

struct Instruction {
  std::string text;
  std::vector<SubGoal> program;
};

struct Episode {
  std::string id;
  std::uint64_t scene_seed = 0;
  Difficulty difficulty = Difficulty::Rooms;
  PlanarPose start;
  Instruction instruction;
  WorldPoint goal;
  int goal_object = -1;
  double success_radius = 3.0;
  int max_steps = 500;

  const SubGoal& target() const { return instruction.program.back(); }
};

Episode generate_episode(std::uint64_t seed, Difficulty difficulty);
// Scene with exactly two same-label objects ahead of a fixed camera pose.
struct TwoInstanceFixture {
  Scene scene;
  PlanarPose pose;
  std::string label;
  int near_object = -1;
  int far_object = -1;
};
TwoInstanceFixture generate_two_instance_scene(std::uint64_t seed);

// Deterministic 64-bit generator with platform-independent sampling helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive
  double gaussian();

 private:
  std::uint64_t state_;
};

void to_json(nlohmann::json& j, const Point2& p);
void from_json(const nlohmann::json& j, Point2& p);
void to_json(nlohmann::json& j, const WorldPoint& p);
void from_json(const nlohmann::json& j, WorldPoint& p);
void to_json(nlohmann::json& j, const PlanarPose& p);
void from_json(const nlohmann::json& j, PlanarPose& p);
void to_json(nlohmann::json& j, const Scene& s);
void from_json(const nlohmann::json& j, Scene& s);
void to_json(nlohmann::json& j, const Episode& e);
void from_json(const nlohmann::json& j, Episode& e);

}  // namespace agentvln
