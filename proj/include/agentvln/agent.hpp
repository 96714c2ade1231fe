#pragma once

// The decision loop: observe, map, route between stages, ask the brain and
// dispatch skills until the brain stops or a budget runs out.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentvln/decision.hpp"
#include "agentvln/image.hpp"
#include "agentvln/mapping.hpp"
#include "agentvln/skills.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

struct Ablations {
  bool disable_fallback = false;
  bool disable_qdpcot = false;
  bool disable_waypoint_prompts = false;
};

struct AgentConfig {
  CameraIntrinsics K = default_camera();
  double camera_height = kDefaultCameraHeight;
  std::size_t context_capacity = 8;
  int decision_limit = 40;
  int step_limit = 500;
  double d_vis = 5.0;
  int min_vis_pixels = 50;
  int vis_loss_patience = 2;
  double clear_min = 0.5;
  Ablations ablations;
  SkillConfig skills;
  MapConfig map;
};

bool visibility_predicate(const Observation& obs, const Episode& episode,
                          const CameraIntrinsics& K, double d_vis = 5.0,
                          int min_pixels = 50);

// Smallest forward distance to an obstacle return inside the agent's swept
// corridor; kMaxRange when nothing is there.
double forward_clearance(const Observation& obs, const CameraIntrinsics& K,
                         double z_min = 0.15, double z_max = 1.8);

// Scan-and-advance: Forward when the corridor ahead is clear, otherwise keep
// rotating in the scan direction (chosen toward the side with more free depth
// when a scan starts).
FineAction fallback_policy(const FallbackScan& scan, const Observation& obs,
                           const CameraIntrinsics& K, double clear_min = 0.5);

// Waypoint prompts for the current view, steered toward any sighting of the
// goal label.
std::vector<WaypointCandidate> prompt_candidates(const OccupancyGrid& grid,
                                                const Observation& obs,
                                                const Episode& episode,
                                                const AgentConfig& config);

// False-color semantic frame with the candidate prompts drawn on it: filled
// green discs of radius 6 px with white ids, the chosen one ringed in red.
RgbImage annotate_frame(const Observation& obs,
                        const std::vector<WaypointCandidate>& candidates,
                        std::optional<int> chosen = std::nullopt);

enum class StopReason { BrainStop, StepLimit, DecisionLimit };
std::string_view to_string(StopReason r);
StopReason stop_reason_from_string(std::string_view s);

inline constexpr const char* kTrajectoryFormat = "agentvln-trajectory";
inline constexpr int kTrajectoryVersion = 1;

// Line-delimited JSON: a header, one record per decision, a final result.
class TrajectoryLog {
 public:
  void add(nlohmann::json record) { records_.push_back(std::move(record)); }
  const std::vector<nlohmann::json>& records() const { return records_; }
  std::string to_jsonl() const;
  static TrajectoryLog from_jsonl(const std::string& text);
  static TrajectoryLog load(const std::string& path);
  void save(const std::string& path) const;

  // Every pose the embodiment occupied, start first.
  std::vector<PlanarPose> poses() const;
  std::vector<nlohmann::json> decisions() const;
  bool stopped() const;

 private:
  std::vector<nlohmann::json> records_;
};

struct EpisodeResult {
  TrajectoryLog trajectory;
  StopReason stop_reason = StopReason::DecisionLimit;
  bool success = false;
  double navigation_error = 0.0;
  int decisions = 0;
  int steps = 0;
  int incidents = 0;
  int violations = 0;
};

// State visible to a hook right before the brain is asked.
struct DecisionPoint {
  const Scene& scene;
  const Episode& episode;
  PlanarPose pose;
  const Observation& obs;
  const OccupancyGrid& grid;
  const BrainRequest& request;
  const AgentConfig& config;
};
using DecisionHook = std::function<void(const DecisionPoint&)>;

EpisodeResult run_episode(const Episode& episode, const Scene& scene,
                          Brain& brain, const AgentConfig& config = {},
                          const DecisionHook& hook = {});
// Regenerates the scene from the episode's seed.
EpisodeResult run_episode(const Episode& episode, Brain& brain,
                          const AgentConfig& config = {});

nlohmann::json pose_to_json(const PlanarPose& p);

}  // namespace agentvln
