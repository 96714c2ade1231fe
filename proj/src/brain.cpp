#include "agentvln/brain.hpp"

#include <cmath>
#include <limits>
#include <mutex>

#include <httplib.h>

#include "agentvln/errors.hpp"
#include "agentvln/image.hpp"
#include "agentvln/qdpcot.hpp"

namespace agentvln {

const GeodesicField& OracleCache::field_for(const Scene& s, const Episode& e) {
  if (!field || episode_id != e.id || scene != &s) {
    raster = std::make_unique<NavRaster>(s, kGeodesicResolution, kOracleInflation);
    field = std::make_unique<GeodesicField>(*raster, e.goal);
    episode_id = e.id;
    scene = &s;
  }
  return *field;
}

namespace {

BrainResponse respond(Decision d, std::string why) {
  return {std::move(d), std::move(why), std::nullopt};
}

// Turn toward the goal along the geodesic, or step once already facing it.
// An ongoing scan keeps its rotation sense so the two never undo each other.
BrainResponse follow_geodesic(const EpisodeTruth& truth, OracleCache& cache,
                              int scan_direction = 0) {
  const GeodesicField& field = cache.field_for(*truth.scene, *truth.episode);
  const PlanarPose& pose = truth.pose;
  const auto path = field.path_from({pose.x, pose.y, 0.0});
  if (path.size() < 2) {
    return respond(FineStep{FineAction::Left}, "no geodesic from here, turning");
  }
  // Farthest point of the first few meters that is in straight sight.
  Point2 aim = path[1];
  const std::size_t horizon = std::min<std::size_t>(path.size(), 60);
  for (std::size_t i = 1; i < horizon; ++i) {
    if (cache.raster->line_of_sight(pose.position(), path[i])) aim = path[i];
  }
  const double bearing = std::atan2(aim.y - pose.y, aim.x - pose.x);
  const double err = wrap_angle(bearing - pose.theta);
  if (std::abs(err) > kOracleHeadingTol) {
    const bool left = scan_direction != 0 ? scan_direction > 0 : err > 0;
    return respond(FineStep{left ? FineAction::Left : FineAction::Right},
                   "turning toward the geodesic");
  }
  if (step(*truth.scene, pose, FineAction::Forward).collided) {
    // Aim cut a corner. Turn toward the nearby part of the path instead.
    Point2 near = path[1];
    for (std::size_t i = 1; i < horizon && std::hypot(path[i].x - pose.x, path[i].y - pose.y) <= 0.35; ++i) {
      near = path[i];
    }
    const double e = wrap_angle(std::atan2(near.y - pose.y, near.x - pose.x) - pose.theta);
    return respond(FineStep{e < 0 ? FineAction::Right : FineAction::Left},
                   "forward blocked, turning");
  }
  return respond(FineStep{FineAction::Forward}, "advancing along the geodesic");
}

}  // namespace

BrainResponse oracle_decide(const BrainRequest& request,
                            const EpisodeTruth& truth, OracleCache& cache) {
  if (truth.scene == nullptr || truth.episode == nullptr || truth.obs == nullptr) {
    throw InvalidArgument("oracle needs scene, episode and observation");
  }
  const Episode& episode = *truth.episode;
  const PlanarPose& pose = truth.pose;
  const double to_goal = std::hypot(episode.goal.x - pose.x, episode.goal.y - pose.y);
  if (to_goal <= episode.success_radius &&
      (request.last_dock_arrived || to_goal <= kOracleStopDistance)) {
    return respond(Stop{}, "goal within reach");
  }

  if (request.stage == Stage::GlobalNavigation) {
    if (request.candidates.empty()) {
      return respond(FineStep{fallback_policy(request.fallback_scan, *truth.obs, truth.K)},
                     "no waypoint prompt in view, scanning");
    }
    const GeodesicField& field = cache.field_for(*truth.scene, episode);
    const auto here = field.distance_to({pose.x, pose.y, 0.0});
    int best_id = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : request.candidates) {
      const auto d = field.distance_to(c.world);
      if (d && (*d < best || (*d == best && c.id < best_id))) {
        best = *d;
        best_id = c.id;
      }
    }
    if (best_id >= 0 && (!here || *here - best >= kOracleMinProgress)) {
      return respond(SelectWaypoint{best_id}, "waypoint closest to the goal");
    }
    return follow_geodesic(truth, cache, request.fallback_scan.direction);
  }

  const std::string& label = episode.target().object_label;
  const auto clusters = label_clusters(*truth.obs, label);
  const std::uint16_t goal_code =
      episode.goal_object >= 0 ? object_code(static_cast<std::size_t>(episode.goal_object))
                               : std::uint16_t{0};
  const InstanceCluster* goal = nullptr;
  for (const auto& c : clusters) {
    if (c.code == goal_code) goal = &c;
  }
  if (goal == nullptr) return follow_geodesic(truth, cache);

  const auto signal = detect_ambiguity(*truth.obs, label, episode.target().relation);
  if (const auto* amb = std::get_if<AmbiguitySignal>(&signal);
      amb && request.perception_allowed) {
    for (const auto& p : amb->candidate_pixels) {
      if (!transcript_depth(request.transcript, p)) {
        return respond(AskPerception{DistanceAtPixel{p}},
                       "measuring a candidate " + label);
      }
    }
  }
  return respond(TargetPixel{goal->representative}, "target " + label + " located");
}

ScriptedBrain::ScriptedBrain(const TrajectoryLog& log) {
  for (auto& r : log.decisions()) {
    if (r.value("brain_called", true)) script_.push_back(r);
  }
}

ScriptedBrain::ScriptedBrain(std::vector<nlohmann::json> decision_records)
    : script_(std::move(decision_records)) {}

BrainResponse ScriptedBrain::decide(const BrainRequest& request,
                                    const EpisodeTruth&) {
  if (next_ >= script_.size()) {
    throw ScriptExhausted("script has no decision for index " +
                          std::to_string(request.decision_index));
  }
  const nlohmann::json& rec = script_[next_];
  if (rec.contains("stage") &&
      stage_from_string(rec["stage"].get<std::string>()) != request.stage) {
    throw ScriptDivergence("stage differs at decision " +
                           std::to_string(request.decision_index));
  }
  const nlohmann::json recorded =
      rec.contains("candidates") ? rec["candidates"] : nlohmann::json::array();
  bool same = recorded.size() == request.candidates.size();
  for (std::size_t i = 0; same && i < recorded.size(); ++i) {
    const auto& c = request.candidates[i];
    same = recorded[i].at("id").get<int>() == c.id &&
           recorded[i].at("pixel").at(0).get<double>() == c.pixel.u &&
           recorded[i].at("pixel").at(1).get<double>() == c.pixel.v;
  }
  if (!same) {
    throw ScriptDivergence("candidate set differs at decision " +
                           std::to_string(request.decision_index));
  }
  ++next_;
  BrainResponse r{decision_from_json(rec.at("decision")),
                  rec.value("rationale", std::string()), std::nullopt};
  if (rec.contains("incident")) r.incident = rec["incident"].get<std::string>();
  return r;
}

nlohmann::json remote_envelope(const BrainRequest& request,
                               const std::string& session, bool include_frame) {
  nlohmann::json req = request_to_json(request);
  // World coordinates stay on this side of the wire.
  for (auto& c : req["candidates"]) {
    c = {{"id", c["id"]}, {"pixel", c["pixel"]}};
  }
  nlohmann::json env = {{"session", session}, {"request", req}, {"tools", tool_schema()}};
  if (include_frame && request.annotated_frame != nullptr) {
    env["frame_png_base64"] = base64_encode(encode_png(*request.annotated_frame));
  }
  return env;
}

BrainResponse parse_remote_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw SchemaViolation("response is not valid JSON");
  }
  if (!j.is_object()) throw SchemaViolation("response must be an object");
  std::string rationale;
  if (j.contains("rationale") && j["rationale"].is_string()) {
    rationale = j["rationale"].get<std::string>();
  }
  const nlohmann::json& call = j.contains("decision") ? j["decision"] : j;
  return {decision_from_json(call), rationale, std::nullopt};
}

struct RemoteBrain::Impl {
  std::mutex mu;
  std::vector<std::unique_ptr<httplib::Client>> idle;
};

namespace {

std::unique_ptr<httplib::Client> make_client(const RemoteConfig& config) {
  auto client = std::make_unique<httplib::Client>(config.endpoint);
  client->set_connection_timeout(config.timeout);
  client->set_read_timeout(config.timeout);
  client->set_write_timeout(config.timeout);
  return client;
}

}  // namespace

RemoteBrain::RemoteBrain(RemoteConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (config_.endpoint.empty()) throw InvalidArgument("remote endpoint not configured");
  auto client = make_client(config_);
  if (!client->is_valid()) {
    throw InvalidArgument("bad remote endpoint '" + config_.endpoint + "'");
  }
  impl_->idle.push_back(std::move(client));
}

RemoteBrain::~RemoteBrain() = default;

BrainResponse RemoteBrain::decide(const BrainRequest& request, const EpisodeTruth&) {
  return decide_as(config_.session, request);
}

BrainResponse RemoteBrain::decide_as(const std::string& session,
                                     const BrainRequest& request) {
  const std::string body = remote_envelope(request, session, config_.send_frames).dump();
  std::unique_ptr<httplib::Client> client;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (!impl_->idle.empty()) {
      client = std::move(impl_->idle.back());
      impl_->idle.pop_back();
    }
  }
  if (!client) client = make_client(config_);

  std::optional<BrainResponse> answer;
  std::string failure;
  for (int attempt = 0; attempt <= config_.retries && !answer; ++attempt) {
    const httplib::Result res = client->Post(config_.path, body, "application/json");
    if (!res) {
      failure = RemoteUnavailable("request failed: " + httplib::to_string(res.error())).what();
      continue;
    }
    if (res->status != 200) {
      failure = RemoteUnavailable("status " + std::to_string(res->status)).what();
      continue;
    }
    try {
      answer = parse_remote_response(res->body);
    } catch (const SchemaViolation& e) {
      // A malformed answer is not retried.
      failure = e.what();
      break;
    }
  }
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->idle.push_back(std::move(client));
  }
  if (answer) return *answer;
  return {FineStep{FineAction::Left}, "remote brain degraded", failure};
}

}  // namespace agentvln
