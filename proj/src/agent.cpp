#include "agentvln/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agentvln/errors.hpp"

namespace agentvln {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kScanStride = 4;
// Once a scan has started it turns at least this far before advancing.
constexpr double kHalfSweep = 3.14159265358979323846 - 1e-9;

Rgb label_color(const std::string& label) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : label) h = (h ^ c) * 16777619u;
  // Keep away from the prompt colors: no channel dominates strongly.
  return {static_cast<std::uint8_t>(90 + (h & 0x7f)),
          static_cast<std::uint8_t>(60 + ((h >> 8) & 0x5f)),
          static_cast<std::uint8_t>(110 + ((h >> 16) & 0x7f))};
}

}  // namespace

bool visibility_predicate(const Observation& obs, const Episode& episode,
                          const CameraIntrinsics& K, double d_vis,
                          int min_pixels) {
  const Projection proj = project(episode.goal, K, obs.pose);
  const auto* hit = std::get_if<ProjectionResult>(&proj);
  if (hit == nullptr) return false;
  double rendered = 0.0;
  if (!obs.depth.lookup(hit->pixel, rendered)) return false;
  if (rendered < hit->depth_scale - SkillConfig{}.occlusion_eps) return false;
  const Vec3& t = obs.pose.translation;
  if (std::hypot(episode.goal.x - t.x(), episode.goal.y - t.y()) > d_vis) {
    return false;
  }
  return obs.count_label(episode.target().object_label) >=
         static_cast<std::size_t>(min_pixels);
}

double forward_clearance(const Observation& obs, const CameraIntrinsics& K,
                         double z_min, double z_max) {
  double best = kMaxRange;
  const Mat3& R = obs.pose.rotation;
  const Vec3& t = obs.pose.translation;
  for (int v = 0; v < obs.height; v += kScanStride) {
    for (int u = 0; u < obs.width; u += kScanStride) {
      if (!obs.depth.valid(u, v)) continue;
      const double d = obs.depth.at(u, v);
      const double x = (u - K.cx) * d / K.fx;
      if (std::abs(x) > kAgentRadius) continue;
      const Vec3 P = R * Vec3(x, (v - K.cy) * d / K.fy, d) + t;
      if (P.z() < z_min || P.z() > z_max) continue;
      best = std::min(best, d);
    }
  }
  return best;
}

FineAction fallback_policy(const FallbackScan& scan, const Observation& obs,
                           const CameraIntrinsics& K, double clear_min) {
  const bool sweeping = scan.direction != 0 && scan.accumulated < kHalfSweep;
  if (!sweeping && !scan.last_forward_collided &&
      forward_clearance(obs, K) > clear_min) {
    return FineAction::Forward;
  }
  if (scan.direction != 0) {
    return scan.direction > 0 ? FineAction::Left : FineAction::Right;
  }
  double left = 0.0, right = 0.0;
  for (int v = 0; v < obs.height; v += kScanStride) {
    for (int u = 0; u < obs.width; u += kScanStride) {
      const double d = obs.depth.valid(u, v) ? obs.depth.at(u, v) : kMaxRange;
      (u < K.cx ? left : right) += d;
    }
  }
  return left >= right ? FineAction::Left : FineAction::Right;
}

RgbImage annotate_frame(const Observation& obs,
                        const std::vector<WaypointCandidate>& candidates,
                        std::optional<int> chosen) {
  RgbImage img(obs.width, obs.height);
  for (int v = 0; v < obs.height; ++v) {
    for (int u = 0; u < obs.width; ++u) {
      const auto code = obs.code_at(u, v);
      Rgb c{140, 180, 220};
      if (code == kCodeFloor) c = {165, 160, 150};
      if (code == kCodeWall) c = {120, 110, 100};
      if (code >= kCodeObjectBase) c = label_color(obs.label_of(code));
      img.set(u, v, c);
    }
  }
  for (const auto& cand : candidates) {
    img.fill_disc(cand.pixel.u, cand.pixel.v, 6.0, colors::kGreen);
    img.draw_number(static_cast<int>(std::lround(cand.pixel.u)) + 8,
                    static_cast<int>(std::lround(cand.pixel.v)) - 5, cand.id,
                    colors::kWhite);
  }
  if (chosen) {
    for (const auto& cand : candidates) {
      if (cand.id == *chosen) {
        img.draw_ring(cand.pixel.u, cand.pixel.v, 9.0, 2.0, colors::kRed);
      }
    }
  }
  return img;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::BrainStop:
      return "brain_stop";
    case StopReason::StepLimit:
      return "step_limit";
    case StopReason::DecisionLimit:
      return "decision_limit";
  }
  return "decision_limit";
}

StopReason stop_reason_from_string(std::string_view s) {
  if (s == "brain_stop") return StopReason::BrainStop;
  if (s == "step_limit") return StopReason::StepLimit;
  if (s == "decision_limit") return StopReason::DecisionLimit;
  throw FormatError("unknown stop reason '" + std::string(s) + "'");
}

std::string TrajectoryLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

TrajectoryLog TrajectoryLog::from_jsonl(const std::string& text) {
  TrajectoryLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      log.records_.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad trajectory record: ") + e.what());
    }
  }
  if (log.records_.empty() || log.records_.front().value("type", "") != "header" ||
      log.records_.front().value("format", "") != kTrajectoryFormat) {
    throw FormatError("trajectory log lacks a header record");
  }
  if (log.records_.front().value("version", 0) != kTrajectoryVersion) {
    throw FormatError("unsupported trajectory log version");
  }
  return log;
}

TrajectoryLog TrajectoryLog::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_jsonl(ss.str());
}

void TrajectoryLog::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  f << to_jsonl();
}

std::vector<PlanarPose> TrajectoryLog::poses() const {
  std::vector<PlanarPose> out;
  for (const auto& r : records_) {
    const auto type = r.value("type", "");
    if (type == "header") out.push_back(r.at("episode").at("start").get<PlanarPose>());
    if (type == "decision") {
      for (const auto& p : r.at("fine_poses")) out.push_back(p.get<PlanarPose>());
    }
  }
  return out;
}

std::vector<nlohmann::json> TrajectoryLog::decisions() const {
  std::vector<nlohmann::json> out;
  for (const auto& r : records_) {
    if (r.value("type", "") == "decision") out.push_back(r);
  }
  return out;
}

bool TrajectoryLog::stopped() const {
  for (const auto& r : records_) {
    if (r.value("type", "") == "result") {
      return r.at("stop_reason").get<std::string>() == "brain_stop";
    }
  }
  return false;
}

nlohmann::json pose_to_json(const PlanarPose& p) { return {p.x, p.y, p.theta}; }

std::vector<WaypointCandidate> prompt_candidates(const OccupancyGrid& grid,
                                                const Observation& obs,
                                                const Episode& episode,
                                                const AgentConfig& config) {
  // A sighting of the goal label, even too far or too small to localize,
  // steers the proposals toward it.
  std::optional<WorldPoint> hint;
  const auto sightings = label_clusters(obs, episode.target().object_label);
  if (!sightings.empty()) {
    hint = pixel_to_world(sightings.front().representative, obs.depth, config.K, obs.pose);
  }
  return propose_waypoints(grid, obs.pose, config.K, obs, hint, config.skills);
}

EpisodeResult run_episode(const Episode& episode, Brain& brain,
                          const AgentConfig& config) {
  const Scene scene = generate_scene(episode.scene_seed, episode.difficulty);
  return run_episode(episode, scene, brain, config);
}

EpisodeResult run_episode(const Episode& episode, const Scene& scene,
                          Brain& brain, const AgentConfig& config,
                          const DecisionHook& hook) {
  const CameraIntrinsics& K = config.K;
  EpisodeResult res;
  PlanarPose pose = episode.start;
  OccupancyGrid grid(pose.position(), config.map);
  HistoryContext context(config.context_capacity);
  Stage stage = Stage::GlobalNavigation;
  int misses = 0;
  std::vector<TranscriptEntry> transcript;
  FallbackScan scan;
  bool docked = false;
  int asks = 0;
  int steps = 0;
  bool stopped = false;

  nlohmann::json episode_json;
  to_json(episode_json, episode);
  res.trajectory.add({{"type", "header"},
                      {"format", kTrajectoryFormat},
                      {"version", kTrajectoryVersion},
                      {"episode", episode_json},
                      {"config",
                       {{"context_capacity", config.context_capacity},
                        {"decision_limit", config.decision_limit},
                        {"step_limit", config.step_limit},
                        {"disable_fallback", config.ablations.disable_fallback},
                        {"disable_qdpcot", config.ablations.disable_qdpcot},
                        {"disable_waypoint_prompts",
                         config.ablations.disable_waypoint_prompts}}}});

  int index = 0;
  for (; index < config.decision_limit && steps < config.step_limit; ++index) {
    const Observation obs = render(scene, pose.pose(config.camera_height), K, steps);
    integrate(grid, obs, K);
    mark_disc_free(grid, pose.position(), kAgentRadius);

    const bool visible = visibility_predicate(obs, episode, K, config.d_vis,
                                              config.min_vis_pixels);
    const Stage previous = stage;
    if (stage == Stage::GlobalNavigation) {
      if (visible) stage = Stage::LocalLocalization;
      misses = 0;
    } else if (visible) {
      misses = 0;
    } else if (++misses >= config.vis_loss_patience) {
      stage = Stage::GlobalNavigation;
      misses = 0;
    }
    if (stage != previous) transcript.clear();

    std::vector<WaypointCandidate> candidates;
    if (stage == Stage::GlobalNavigation &&
        !config.ablations.disable_waypoint_prompts) {
      candidates = prompt_candidates(grid, obs, episode, config);
    }

    BrainRequest request;
    request.episode_id = episode.id;
    request.instruction = episode.instruction;
    request.stage = stage;
    request.decision_index = index;
    request.timestep = steps;
    request.frame_ref = "frame-" + std::to_string(index);
    request.candidates = candidates;
    request.history_digest = context.digest();
    request.transcript = transcript;
    request.fallback_scan = scan;
    request.perception_allowed =
        asks < kQdMaxRounds && !(stage == Stage::LocalLocalization &&
                                 config.ablations.disable_qdpcot);
    request.last_dock_arrived = docked;
    RgbImage frame;
    if (brain.wants_frames()) {
      frame = annotate_frame(obs, candidates);
      request.annotated_frame = &frame;
    }
    if (hook) {
      hook(DecisionPoint{scene, episode, pose, obs, grid, request, config});
    }

    nlohmann::json rec = {{"type", "decision"},
                          {"index", index},
                          {"timestep", steps},
                          {"stage", to_string(stage)},
                          {"visible", visible},
                          {"perception_allowed", request.perception_allowed}};
    rec["candidates"] = nlohmann::json::array();
    for (const auto& c : candidates) rec["candidates"].push_back(candidate_to_json(c));

    BrainResponse response;
    bool brain_called = true;
    if (stage == Stage::GlobalNavigation && candidates.empty() &&
        config.ablations.disable_fallback) {
      brain_called = false;
      response.decision = Stop{};
      response.rationale = "no waypoint prompt and fallback disabled";
    } else {
      const EpisodeTruth truth{&scene, &episode, &obs, pose, K};
      response = brain.decide(request, truth);
    }
    rec["brain_called"] = brain_called;
    rec["decision"] = decision_to_json(response.decision);
    rec["rationale"] = response.rationale;
    if (response.incident) {
      ++res.incidents;
      rec["incident"] = *response.incident;
    }

    // Legality against the current stage and candidate set.
    Decision executed = response.decision;
    std::optional<std::string> violation;
    if (const auto* s = std::get_if<SelectWaypoint>(&executed)) {
      const bool known = std::any_of(candidates.begin(), candidates.end(),
                                     [&](const auto& c) { return c.id == s->id; });
      if (stage != Stage::GlobalNavigation || !known) {
        violation = "select_waypoint " + std::to_string(s->id) + " is not a current candidate";
      }
    } else if (const auto* t = std::get_if<TargetPixel>(&executed)) {
      double d = 0.0;
      if (stage != Stage::LocalLocalization) {
        violation = "target_pixel outside local localization";
      } else if (!K.contains(t->pixel.u, t->pixel.v) || !obs.depth.lookup(t->pixel, d)) {
        violation = "target_pixel has no valid depth";
      }
    } else if (const auto* a = std::get_if<AskPerception>(&executed)) {
      if (!request.perception_allowed) {
        violation = "perception ask not allowed now";
      } else if (const auto* q = std::get_if<DistanceAtPixel>(&a->query);
                 q && !K.contains(q->pixel.u, q->pixel.v)) {
        violation = "distance_at_pixel outside the image";
      }
    }
    if (violation) {
      ++res.violations;
      rec["violation"] = BrainProtocolViolation(*violation).what();
      executed = FineStep{FineAction::Left};
    }
    if (config.ablations.disable_qdpcot) {
      if (auto* t = std::get_if<TargetPixel>(&executed)) {
        const auto clusters = label_clusters(obs, episode.target().object_label);
        if (!clusters.empty()) t->pixel = clusters.front().representative;
      }
    }
    rec["executed"] = decision_to_json(executed);

    nlohmann::json fine = nlohmann::json::array();
    nlohmann::json outcome = nlohmann::json::object();
    const auto plan = [&](const PlanGoal& goal) {
      SkillConfig sc = config.skills;
      sc.step_budget = std::min(sc.step_budget, config.step_limit - steps);
      try {
        const PlanResult r = run_plan(goal, scene, pose, grid, candidates, sc);
        for (const Point2& c : r.contacts) mark_contact(grid, c);
        pose = r.pose;
        steps += r.outcome.steps_taken;
        for (const auto& p : r.path) fine.push_back(pose_to_json(p));
        outcome = {{"steps_taken", r.outcome.steps_taken},
                   {"terminal_reason", to_string(r.outcome.terminal_reason)},
                   {"collided_count", r.outcome.collided_count}};
        return r.outcome.terminal_reason == TerminalReason::Arrived;
      } catch (const NoPath& e) {
        outcome = {{"error", e.what()}};
        return false;
      }
    };

    std::visit(
        overloaded{
            [&](const Stop&) { stopped = true; },
            [&](const FineStep& f) {
              const StepResult s = step(scene, pose, f.action);
              if (s.contact) mark_contact(grid, *s.contact);
              pose = s.pose;
              ++steps;
              fine.push_back(pose_to_json(pose));
              outcome = {{"collided", s.collided}};
              if (stage == Stage::GlobalNavigation) scan = advance_scan(scan, f.action);
              scan.last_forward_collided = f.action == FineAction::Forward && s.collided;
              docked = false;
              asks = 0;
            },
            [&](const SelectWaypoint& s) {
              plan(NavigateToWaypoint{s.id});
              scan = {};
              docked = false;
              asks = 0;
            },
            [&](const AskPerception& a) {
              PerceptionResult answer;
              try {
                answer = run_perception(a.query, obs, grid, K, config.skills);
              } catch (const Error& e) {
                answer = {e.what(), LabelList{}};
              }
              transcript.push_back({a.query, answer});
              outcome = {{"answer", result_to_json(answer)}};
              ++asks;
            },
            [&](const TargetPixel& t) {
              const WorldPoint target = pixel_to_world(t.pixel, obs.depth, K, obs.pose);
              docked = plan(Dock{target});
              outcome["target_world"] = {target.x, target.y, target.z};
              scan = {};
              asks = 0;
            },
        },
        executed);

    context.push({index, request.timestep, request.frame_ref, summarize(executed)});
    rec["outcome"] = outcome;
    rec["fine_poses"] = fine;
    rec["pose"] = pose_to_json(pose);
    rec["history_len"] = context.size();
    rec["transcript"] = transcript_to_json(transcript);
    res.trajectory.add(std::move(rec));
    if (std::holds_alternative<TargetPixel>(executed)) transcript.clear();
    if (stopped) {
      ++index;
      break;
    }
  }

  res.decisions = index;
  res.steps = steps;
  res.stop_reason = stopped                      ? StopReason::BrainStop
                    : steps >= config.step_limit ? StopReason::StepLimit
                                                 : StopReason::DecisionLimit;
  res.navigation_error = std::hypot(pose.x - episode.goal.x, pose.y - episode.goal.y);
  res.success = stopped && res.navigation_error <= episode.success_radius;
  res.trajectory.add({{"type", "result"},
                      {"stop_reason", to_string(res.stop_reason)},
                      {"success", res.success},
                      {"navigation_error", res.navigation_error},
                      {"decisions", res.decisions},
                      {"steps", res.steps},
                      {"incidents", res.incidents},
                      {"violations", res.violations},
                      {"final_pose", pose_to_json(pose)}});
  return res;
}

}  // namespace agentvln
