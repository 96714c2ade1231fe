#pragma once

// Brain implementations: a ground-truth oracle, log replay, and a remote
// endpoint speaking the tool-call protocol.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentvln/agent.hpp"
#include "agentvln/decision.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

// Geodesic field toward the goal, rebuilt when the episode changes.
struct OracleCache {
  std::string episode_id;
  const Scene* scene = nullptr;
  std::unique_ptr<NavRaster> raster;
  std::unique_ptr<GeodesicField> field;

  const GeodesicField& field_for(const Scene& scene, const Episode& episode);
};

// The oracle keeps this far from obstacles so its shortcuts never graze them.
inline constexpr double kOracleInflation = kAgentRadius;
// Minimum drop in distance-to-go for a waypoint to be worth selecting.
inline constexpr double kOracleMinProgress = 0.5;
// Stop without a dock once this close to the goal.
inline constexpr double kOracleStopDistance = 1.0;
// Bearing error below which the oracle steps forward instead of turning.
inline constexpr double kOracleHeadingTol = 0.1308996938995747;  // 7.5 degrees

BrainResponse oracle_decide(const BrainRequest& request,
                            const EpisodeTruth& truth, OracleCache& cache);

class OracleBrain : public Brain {
 public:
  BrainResponse decide(const BrainRequest& request,
                       const EpisodeTruth& truth) override {
    return oracle_decide(request, truth, cache_);
  }

 private:
  OracleCache cache_;
};

// Replays the brain decisions of a recorded log. Decisions the agent made
// without consulting the brain are skipped.
class ScriptedBrain : public Brain {
 public:
  explicit ScriptedBrain(const TrajectoryLog& log);
  explicit ScriptedBrain(std::vector<nlohmann::json> decision_records);

  BrainResponse decide(const BrainRequest& request,
                       const EpisodeTruth& truth) override;
  std::size_t remaining() const { return script_.size() - next_; }

 private:
  std::vector<nlohmann::json> script_;
  std::size_t next_ = 0;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string path = "/decide";
  std::chrono::milliseconds timeout{10000};
  int retries = 1;
  std::string session;
  bool send_frames = true;
};

// Envelope posted to the endpoint.
nlohmann::json remote_envelope(const BrainRequest& request,
                               const std::string& session,
                               bool include_frame);
// Maps a response body to a response; throws SchemaViolation.
BrainResponse parse_remote_response(const std::string& body);

// Connections are pooled, so one instance can serve concurrent episodes.
class RemoteBrain : public Brain {
 public:
  explicit RemoteBrain(RemoteConfig config);
  ~RemoteBrain() override;

  BrainResponse decide(const BrainRequest& request,
                       const EpisodeTruth& truth) override;
  BrainResponse decide_as(const std::string& session, const BrainRequest& request);
  bool wants_frames() const override { return config_.send_frames; }

 private:
  struct Impl;
  RemoteConfig config_;
  std::unique_ptr<Impl> impl_;
};

// One episode's session on a shared remote brain.
class RemoteSession : public Brain {
 public:
  RemoteSession(RemoteBrain& remote, std::string session)
      : remote_(remote), session_(std::move(session)) {}

  BrainResponse decide(const BrainRequest& request, const EpisodeTruth&) override {
    return remote_.decide_as(session_, request);
  }
  bool wants_frames() const override { return remote_.wants_frames(); }

 private:
  RemoteBrain& remote_;
  std::string session_;
};

}  // namespace agentvln
