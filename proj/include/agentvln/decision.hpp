#pragma once

// What the brain sees and what it may answer.

#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "agentvln/image.hpp"
#include "agentvln/qdpcot.hpp"
#include "agentvln/skills.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

enum class Stage { GlobalNavigation, LocalLocalization };
std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct SelectWaypoint {
  int id = 0;
};
struct FineStep {
  FineAction action = FineAction::Left;
};
struct AskPerception {
  PerceptionQuery query;
};
struct TargetPixel {
  PixelPoint pixel;
};
struct Stop {};

using Decision =
    std::variant<SelectWaypoint, FineStep, AskPerception, TargetPixel, Stop>;

// Wire form: {"tool": name, ...arguments}. Perception asks use the perception
// tool names.
nlohmann::json decision_to_json(const Decision& d);
// Validates against the tool schema; throws SchemaViolation.
Decision decision_from_json(const nlohmann::json& j);
// One-line human-readable form used in history digests.
std::string summarize(const Decision& d);

// Rotation bookkeeping for the scan-and-advance fallback.
struct FallbackScan {
  double accumulated = 0.0;  // radians rotated since candidates were last seen
  int direction = 0;         // +1 left, -1 right, 0 not chosen yet
  bool last_forward_collided = false;
};
FallbackScan advance_scan(FallbackScan scan, FineAction action);

struct HistoryEntry {
  int decision_index = 0;
  int timestep = 0;
  std::string frame_ref;
  std::string summary;
};

class HistoryContext {
 public:
  explicit HistoryContext(std::size_t capacity = 8);

  void push(HistoryEntry entry);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<HistoryEntry>& entries() const { return entries_; }
  std::vector<std::string> digest() const;

 private:
  std::size_t capacity_;
  std::deque<HistoryEntry> entries_;
};

struct BrainRequest {
  std::string episode_id;
  Instruction instruction;
  Stage stage = Stage::GlobalNavigation;
  int decision_index = 0;
  int timestep = 0;
  std::string frame_ref;
  const RgbImage* annotated_frame = nullptr;  // only set for brains that look
  std::vector<WaypointCandidate> candidates;
  std::vector<std::string> history_digest;
  std::vector<TranscriptEntry> transcript;
  FallbackScan fallback_scan;
  bool perception_allowed = true;
  bool last_dock_arrived = false;
};

struct BrainResponse {
  Decision decision;
  std::string rationale;
  std::optional<std::string> incident;  // degraded answer, e.g. a timeout
};

// Simulator ground truth, available to the oracle only.
struct EpisodeTruth {
  const Scene* scene = nullptr;
  const Episode* episode = nullptr;
  const Observation* obs = nullptr;
  PlanarPose pose;
  CameraIntrinsics K;
};

class Brain {
 public:
  virtual ~Brain() = default;
  virtual BrainResponse decide(const BrainRequest& request,
                               const EpisodeTruth& truth) = 0;
  // Whether requests need the rendered, annotated frame.
  virtual bool wants_frames() const { return false; }
};

nlohmann::json request_to_json(const BrainRequest& r);
BrainRequest request_from_json(const nlohmann::json& j);

}  // namespace agentvln
