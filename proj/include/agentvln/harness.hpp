#pragma once

// Suite runner, top-down renders and the instruct-corpus generator.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentvln/agent.hpp"
#include "agentvln/decision.hpp"
#include "agentvln/image.hpp"
#include "agentvln/metrics.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

enum class BrainKind { Oracle, Scripted, Remote };
std::string_view to_string(BrainKind k);
BrainKind brain_kind_from_string(std::string_view s);

// Only place the remote endpoint may come from besides the config itself.
inline constexpr const char* kRemoteEndpointEnv = "AGENTVLN_REMOTE_ENDPOINT";

struct SuiteConfig {
  // Seeds first_seed .. first_seed + episodes - 1; seed i gets
  // mix[(i - first_seed) % mix.size()].
  std::uint64_t first_seed = 0;
  int episodes = 100;
  std::vector<Difficulty> mix{Difficulty::Rooms, Difficulty::Corridor,
                              Difficulty::OcclusionStress};
  BrainKind brain = BrainKind::Oracle;
  std::string script_dir;  // scripted: output_dir of the run to replay
  std::string endpoint;    // remote
  int remote_timeout_ms = 10000;
  Ablations ablations;
  std::size_t context_capacity = 8;
  std::string output_dir;  // empty keeps everything in memory
  int parallelism = 1;
  bool renders = true;

  // Throws InvalidArgument.
  void validate() const;
  Episode episode(int index) const;
};

nlohmann::json config_to_json(const SuiteConfig& c);
// Missing keys keep their defaults; unknown keys are an error.
SuiteConfig config_from_json(const nlohmann::json& j);
SuiteConfig load_suite_config(const std::filesystem::path& path);

struct EpisodeRecord {
  Episode episode;
  std::optional<EpisodeResult> result;  // empty when the episode raised
  std::string error;
  MetricReport metrics;
};

struct SuiteResult {
  std::vector<EpisodeRecord> episodes;  // in seed order
  MetricReport aggregate;
  int failures = 0;
  int incidents = 0;
  int violations = 0;

  // Deterministic report: no timings, no paths.
  nlohmann::json summary(const SuiteConfig& config) const;
};

// Writes, under output_dir when set:
//   episodes/<id>.jsonl   trajectory logs
//   renders/<id>.png      top-down view, with a <id>.json sidecar
//   metrics.csv           one row per episode, then the mean
//   summary.json
SuiteResult run_suite(const SuiteConfig& config);

// Episode metrics for a finished run, or for a run that raised (the agent
// never left the start).
MetricReport episode_metrics(const Episode& episode, const Scene& scene,
                             const EpisodeResult* result);

// Pixel mapping of a top-down render.
struct TopdownFrame {
  double origin_x = 0.0;  // world x at the left edge
  double origin_y = 0.0;  // world y at the top edge
  double pixels_per_meter = 40.0;
  int width = 0;
  int height = 0;

  PixelPoint to_pixel(Point2 p) const {
    return {(p.x - origin_x) * pixels_per_meter, (origin_y - p.y) * pixels_per_meter};
  }
  Point2 to_world(PixelPoint px) const {
    return {origin_x + px.u / pixels_per_meter, origin_y - px.v / pixels_per_meter};
  }
};

struct Topdown {
  RgbImage image;
  TopdownFrame frame;
  nlohmann::json sidecar;
};

// Footprint, executed path, candidate dots, chosen waypoint rings and the goal
// disc. Throws InconsistentLog when the log cannot belong to the scene.
Topdown render_topdown(const TrajectoryLog& log, const Scene& scene,
                       double pixels_per_meter = 40.0);
// Writes <png> and a sidecar <png stem>.json.
void write_topdown(const Topdown& t, const std::filesystem::path& png);

// Capacities used by the context sweep.
inline const std::vector<std::size_t> kSweepCapacities{1, 2, 4, 8, 16, 32};

struct SweepPoint {
  std::size_t capacity = 0;
  MetricReport metrics;
  int failures = 0;
  int max_history = 0;
};
// One suite per capacity; output_dir, when set, gets a capacity-<n>/ per run
// and a sweep.csv.
std::vector<SweepPoint> sweep_context(const SuiteConfig& base,
                                      const std::vector<std::size_t>& capacities =
                                          kSweepCapacities);

// ---------------------------------------------------------------------------
// Instruct corpus

inline constexpr const char* kInstructFormat = "agentvln-instruct";
inline constexpr int kInstructVersion = 1;

struct NoiseConfig {
  double p_perturb = 0.3;
  double sigma_pos = 0.2;                       // meters
  double sigma_heading = 0.17453292519943295;  // 10 degrees
};

struct InstructSample {
  Episode episode;
  int decision_index = 0;
  PlanarPose pose;
  // Request as the brain would see it; for localization the transcript in it
  // is empty and the dialogue lives in `transcript`.
  BrainRequest request;
  std::vector<std::string> frames;  // frame refs of the context window
  std::vector<TranscriptEntry> transcript;
  Decision expected;
  bool perturbed = false;
  double sigma_pos = 0.0;
  double sigma_heading = 0.0;
};

nlohmann::json sample_to_json(const InstructSample& s);
InstructSample sample_from_json(const nlohmann::json& j);

// Oracle rollouts of the suite's episodes, one sample per decision (Stop
// decisions and localization dialogues that do not end on a pixel are
// skipped). Stops once max_samples are collected when that is nonzero.
std::vector<InstructSample> generate_instruct(const SuiteConfig& config,
                                              const NoiseConfig& noise = {},
                                              std::size_t max_samples = 0);

struct SampleCheck {
  bool decision_ok = false;  // oracle re-derivation reproduces `expected`
  bool stage_ok = false;     // stage agrees with the visibility predicate
  std::string detail;
};
SampleCheck verify_sample(const InstructSample& sample,
                          const AgentConfig& config = {});

}  // namespace agentvln
