#pragma once

// Skill library: perception skills answer questions about the current frame
// without moving the agent; planning skills drive the embodiment until they
// arrive, get blocked, or run out of budget.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "agentvln/geometry.hpp"
#include "agentvln/mapping.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

struct UpdateMap {};
struct ProjectWaypoints {};
struct DistanceAtPixel {
  PixelPoint pixel;
};
struct ObjectDistance {
  std::string label;
};
struct VisibleObjects {};

using PerceptionQuery = std::variant<UpdateMap, ProjectWaypoints,
                                     DistanceAtPixel, ObjectDistance,
                                     VisibleObjects>;

struct WaypointCandidate {
  int id = 0;
  WorldPoint world;  // z = 0
  PixelPoint pixel;
  double depth_scale = 0.0;
};

struct MapSummary {
  std::int64_t free = 0;
  std::int64_t occupied = 0;
  std::int64_t observed = 0;
};
struct Meters {
  double value = 0.0;
};
struct LabelList {
  std::vector<std::string> labels;
};
struct CandidateList {
  std::vector<WaypointCandidate> candidates;
};

using PerceptionPayload = std::variant<MapSummary, CandidateList, Meters,
                                       LabelList>;

struct PerceptionResult {
  std::string summary;
  PerceptionPayload payload;
};

struct NavigateToWaypoint {
  int candidate_id = 0;
};
struct NavigateToWorld {
  WorldPoint target;
};
struct Dock {
  WorldPoint target;
};
using PlanGoal = std::variant<NavigateToWaypoint, NavigateToWorld, Dock>;

using SkillCall = std::variant<PerceptionQuery, PlanGoal>;

enum class TerminalReason { Arrived, Blocked, Budget };
std::string_view to_string(TerminalReason r);

struct SkillOutcome {
  int steps_taken = 0;
  TerminalReason terminal_reason = TerminalReason::Arrived;
  int collided_count = 0;
};

struct PlanResult {
  PlanarPose pose;
  SkillOutcome outcome;
  std::vector<PlanarPose> path;  // pose after every fine step
  std::vector<Point2> contacts;  // bump readings from blocked steps
};

struct SkillConfig {
  double waypoint_spacing = 1.0;
  int max_candidates = 8;
  double occlusion_eps = 0.05;
  double arrival_tol = 0.2;
  int step_budget = 120;
  double lookahead = 0.5;
  double wall_penalty_radius = 0.3;
  double wall_penalty = 10.0;
  // Closer than this to an Occupied cell the body would touch it.
  double inflation_radius = 0.25;
  double inflation_penalty = 100.0;
  int frontier_min_size = 4;
  int frontier_paths = 6;
  double dedupe_radius = 0.5;
  int search_margin = 20;  // cells around the known area
};

// Two-decimal rendering used by distance answers, e.g. "2.37 meters".
std::string format_meters(double m);

// Pure with respect to the agent pose. UpdateMap integrates obs into grid.
PerceptionResult run_perception(const PerceptionQuery& query,
                                const Observation& obs, OccupancyGrid& grid,
                                const CameraIntrinsics& K,
                                const SkillConfig& config = {});

// Cost grid over the occupancy map: Occupied cells are impassable, cells near
// them cost more, Unknown is optimistic free space.
class PlanSearch {
 public:
  PlanSearch(const OccupancyGrid& grid, Point2 from,
             std::optional<Point2> include = std::nullopt,
             const SkillConfig& config = {});

  bool reachable(Point2 p) const;
  // Cell-center polyline from the start to p (p's cell), empty if unreachable.
  std::vector<Point2> path_to(Point2 p) const;
  double cost_to(Point2 p) const;
  bool occupied(Point2 p) const;
  bool penalized(Point2 p) const;
  // Nearest reachable observed-Free, unpenalized cell to p (any reachable
  // non-Occupied cell if none qualifies).
  std::optional<Point2> standoff(Point2 p) const;

 private:
  bool local(Point2 p, int& i) const;

  const OccupancyGrid* grid_;
  int c0_ = 0, r0_ = 0, w_ = 0, h_ = 0;
  std::vector<std::uint8_t> blocked_;
  std::vector<std::uint8_t> penalty_;
  std::vector<double> cost_;
  std::vector<int> parent_;
};

std::vector<WaypointCandidate> propose_waypoints(
    const OccupancyGrid& grid, const Pose& pose, const CameraIntrinsics& K,
    const Observation& obs, std::optional<WorldPoint> goal_hint,
    const SkillConfig& config = {});

// True when a ground point passes the candidate tests for this frame.
bool candidate_visible(const WorldPoint& world, const Pose& pose,
                       const CameraIntrinsics& K, const Observation& obs,
                       double occlusion_eps, PixelPoint* pixel = nullptr,
                       double* depth_scale = nullptr);

// Throws NoPath when planning fails and InvalidArgument for an unknown
// candidate id.
PlanResult run_plan(const PlanGoal& goal, const Scene& scene,
                    const PlanarPose& pose, const OccupancyGrid& grid,
                    const std::vector<WaypointCandidate>& candidates,
                    const SkillConfig& config = {});

// Machine-readable tool catalog: perception skills, planning skills and the
// decision tools the brain may call.
struct ToolSpec {
  std::string name;
  std::string kind;  // "perception", "planning" or "decision"
  std::string description;
  nlohmann::json parameters;  // JSON-schema object
  nlohmann::json result;
};
const std::vector<ToolSpec>& skill_catalog();
nlohmann::json tool_schema();

nlohmann::json query_to_json(const PerceptionQuery& q);
PerceptionQuery perception_query_from_json(const nlohmann::json& j);
nlohmann::json result_to_json(const PerceptionResult& r);
PerceptionResult perception_result_from_json(const nlohmann::json& j);
nlohmann::json candidate_to_json(const WaypointCandidate& c);
WaypointCandidate waypoint_candidate_from_json(const nlohmann::json& j);

}  // namespace agentvln
