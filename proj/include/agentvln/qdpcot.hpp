#pragma once

// Query-driven target localization: when several instances of the goal label
// are in view, or the instruction states a distance, the agent measures each
// candidate before committing to a pixel.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agentvln/skills.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

inline constexpr double kRelationTolerance = 0.5;
inline constexpr int kQdMaxRounds = 3;

enum class RelationKind { Nearest, Farthest, LeftOfView, RightOfView, ApproxMeters };

struct Relation {
  RelationKind kind = RelationKind::Nearest;
  double meters = 0.0;  // ApproxMeters only

  bool metric() const { return kind == RelationKind::ApproxMeters; }
};

// Accepts the canonical names ("farthest", "approx_meters(2.5)", ...) and
// loose phrasing ("the farther chair", "about two meters away"). Anything
// unrecognized means Nearest.
Relation parse_relation(std::string_view text);
std::string to_string(const Relation& r);

struct InstanceCluster {
  std::uint16_t code = 0;
  int pixel_count = 0;
  PixelPoint centroid;
  // Member pixel closest to the centroid; always carries valid depth.
  PixelPoint representative;
};

// One cluster per object instance with the label, largest first.
std::vector<InstanceCluster> label_clusters(const Observation& obs,
                                            std::string_view label);

struct Unambiguous {
  PixelPoint pixel;
};
struct AmbiguitySignal {
  std::vector<PixelPoint> candidate_pixels;
  double depth_spread = 0.0;
};
using AmbiguityResult = std::variant<Unambiguous, AmbiguitySignal>;

// At most kQdMaxRounds candidates (the largest clusters). Throws
// LabelNotVisible when no pixel carries the label.
AmbiguityResult detect_ambiguity(const Observation& obs,
                                 std::string_view goal_label,
                                 std::string_view relation);

struct TranscriptEntry {
  PerceptionQuery query;
  PerceptionResult answer;
};

struct CoTState {
  int round = 0;
  std::vector<TranscriptEntry> transcript;
  bool resolved = false;
  std::optional<PixelPoint> target;
};

using PerceptionInvoker =
    std::function<PerceptionResult(const PerceptionQuery&)>;

// Measured depth of a pixel according to the transcript, if it was asked.
std::optional<double> transcript_depth(const std::vector<TranscriptEntry>& t,
                                       const PixelPoint& pixel);

// Picks the candidate that best satisfies the relation given measured depths.
// Throws Undecidable for a metric relation no candidate meets within
// kRelationTolerance.
std::size_t select_candidate(const std::vector<PixelPoint>& pixels,
                             const std::vector<double>& depths,
                             const Relation& relation);

// Asks DistanceAtPixel once per candidate (one round each), then selects.
// Throws Undecidable like select_candidate; the state keeps the transcript.
PixelPoint resolve(const AmbiguitySignal& signal, std::string_view relation,
                   const PerceptionInvoker& perception, CoTState& state);

nlohmann::json transcript_to_json(const std::vector<TranscriptEntry>& t);
std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& j);

}  // namespace agentvln
