#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "agentvln/agent.hpp"
#include "agentvln/brain.hpp"
#include "agentvln/errors.hpp"

using namespace agentvln;

namespace {

const CameraIntrinsics K0 = default_camera();

Polygon box(double x0, double y0, double x1, double y1) {
  return Rect{x0, y0, x1, y1}.polygon();
}

Scene hall(double length = 14.0) {
  Scene s;
  s.bounds = {0, 0, length, 6};
  s.footprint = {box(0, 0, length, 0.2), box(0, 5.8, length, 6), box(0, 0.2, 0.2, 5.8),
                 box(length - 0.2, 0.2, length, 5.8)};
  return s;
}

// Chair whose front face is `ahead` meters in front of a camera at (2, 3)
// facing +x.
Scene chair_at(double ahead, double length = 14.0) {
  Scene s = hall(length);
  const double x = 2 + ahead;
  s.objects.push_back({"chair", box(x, 2.7, x + 0.6, 3.3), {x + 0.3, 3.0, 0.9}});
  return s;
}

Episode chair_episode(const Scene& s) {
  Episode e;
  e.id = "fixture";
  e.start = {2, 3, 0};
  e.instruction = {"walk to the chair", {{"nearest", "chair"}}};
  e.goal_object = 0;
  e.goal = s.objects[0].anchor;
  e.success_radius = 3.0;
  return e;
}

class StopBrain : public Brain {
 public:
  BrainResponse decide(const BrainRequest&, const EpisodeTruth&) override {
    return {Stop{}, "done", std::nullopt};
  }
};

class BadIdBrain : public Brain {
 public:
  int calls = 0;
  BrainResponse decide(const BrainRequest&, const EpisodeTruth&) override {
    ++calls;
    if (calls > 3) return {Stop{}, "", std::nullopt};
    return {SelectWaypoint{99}, "", std::nullopt};
  }
};

// True when `b` follows from `a` by at most one fine action.
bool one_step(const Scene& s, const PlanarPose& a, const PlanarPose& b) {
  if (a.x == b.x && a.y == b.y && a.theta == b.theta) return true;
  for (auto act : {FineAction::Forward, FineAction::Left, FineAction::Right}) {
    const auto r = step(s, a, act);
    if (std::abs(r.pose.x - b.x) < 1e-9 && std::abs(r.pose.y - b.y) < 1e-9 &&
        std::abs(wrap_angle(r.pose.theta - b.theta)) < 1e-9) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(Visibility, NearUnoccludedGoal) {
  const Scene s = chair_at(2.5);
  const Episode e = chair_episode(s);
  const Observation o = render(s, e.start.pose(), K0);
  EXPECT_TRUE(visibility_predicate(o, e, K0));
}

TEST(Visibility, BehindWall) {
  Scene s = chair_at(3.0);
  s.footprint.push_back(box(4.0, 2.0, 4.2, 4.0));
  const Episode e = chair_episode(s);
  const Observation o = render(s, e.start.pose(), K0);
  EXPECT_FALSE(visibility_predicate(o, e, K0));
}

TEST(Visibility, TooFar) {
  const Scene s = chair_at(9.0);
  const Episode e = chair_episode(s);
  const Observation o = render(s, e.start.pose(), K0);
  EXPECT_GT(o.count_label("chair"), 50u);
  EXPECT_FALSE(visibility_predicate(o, e, K0));
}

TEST(Fallback, WallAheadOpenLeft) {
  Scene s = hall();
  s.footprint.push_back(box(2.4, 0.2, 2.6, 3.2));
  const Observation o = render(s, heading_pose(2, 3.1, 0, 1.25), K0);
  EXPECT_LT(forward_clearance(o, K0), 0.5);
  EXPECT_EQ(fallback_policy({}, o, K0), FineAction::Left);
}

TEST(Fallback, OpenAheadGoesForward) {
  Scene s = hall();
  s.footprint.push_back(box(6.0, 0.2, 6.2, 5.8));
  const Observation o = render(s, heading_pose(2, 3, 0, 1.25), K0);
  EXPECT_NEAR(forward_clearance(o, K0), 4.0, 0.05);
  EXPECT_EQ(fallback_policy({}, o, K0), FineAction::Forward);
}

TEST(Fallback, BoxedInTurnsAround) {
  // Dead end: walls ahead and on both sides, opening behind.
  Scene s = hall();
  s.footprint.push_back(box(2.45, 2.5, 2.65, 3.5));
  s.footprint.push_back(box(0.2, 3.3, 2.65, 3.5));
  s.footprint.push_back(box(0.2, 2.5, 2.65, 2.7));
  s.footprint[2] = box(-1, -1, -0.9, -0.9);  // open the far end of the alley
  PlanarPose p{2, 3, 0};
  FallbackScan scan;
  double turned = 0;
  for (int i = 0; i < 48; ++i) {
    const Observation o = render(s, p.pose(), K0);
    const FineAction a = fallback_policy(scan, o, K0);
    if (a == FineAction::Forward) break;
    turned += kTurnAngle;
    scan = advance_scan(scan, a);
    p = step(s, p, a).pose;
  }
  EXPECT_GE(turned, M_PI - 1e-9);
  EXPECT_LT(turned, 2 * M_PI);
}

TEST(Episode, TrivialGoalAhead) {
  const Scene s = chair_at(1.0);
  const Episode e = chair_episode(s);
  OracleBrain brain;
  const EpisodeResult r = run_episode(e, s, brain);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.stop_reason, StopReason::BrainStop);
  const auto ds = r.trajectory.decisions();
  ASSERT_FALSE(ds.empty());
  EXPECT_EQ(ds.front().at("stage"), "local_localization");
  bool targeted = false;
  for (const auto& d : ds) targeted |= d.at("executed").at("tool") == "target_pixel";
  EXPECT_TRUE(targeted);
  EXPECT_LE(r.navigation_error, e.success_radius);
}

TEST(Episode, CorridorNeedsGlobalNavigation) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed < 40 && checked < 3; seed += 3) {
    const Episode e = generate_episode(seed, Difficulty::Corridor);
    OracleBrain brain;
    const EpisodeResult r = run_episode(e, brain);
    const auto ds = r.trajectory.decisions();
    if (ds.empty() || ds.front().at("stage") != "global_navigation") continue;
    ++checked;
    EXPECT_TRUE(r.success) << e.id;
    EXPECT_LE(r.navigation_error, e.success_radius);
    bool local = false;
    for (const auto& d : ds) local |= d.at("stage") == "local_localization";
    EXPECT_TRUE(local) << e.id;
  }
  EXPECT_EQ(checked, 3);
}

TEST(Episode, ImmediateStopFails) {
  const Episode e = generate_episode(4, Difficulty::Rooms);
  StopBrain brain;
  const EpisodeResult r = run_episode(e, brain);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.stop_reason, StopReason::BrainStop);
  EXPECT_EQ(r.decisions, 1);
}

TEST(Episode, IllegalSelectionIsRecovered) {
  const Episode e = generate_episode(2, Difficulty::Rooms);
  BadIdBrain brain;
  const EpisodeResult r = run_episode(e, brain);
  EXPECT_EQ(r.violations, 3);
  const auto ds = r.trajectory.decisions();
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(ds[i].contains("violation"));
    EXPECT_EQ(ds[i].at("executed"), (nlohmann::json{{"tool", "fine_action"}, {"action", "left"}}));
  }
}

TEST(Episode, LogInvariants) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Episode e = generate_episode(seed, static_cast<Difficulty>(seed % 3));
    const Scene s = generate_scene(e.scene_seed, e.difficulty);
    OracleBrain brain;
    AgentConfig cfg;
    cfg.context_capacity = 3;
    std::vector<std::size_t> history;
    const EpisodeResult r = run_episode(e, s, brain, cfg, [&](const DecisionPoint& d) {
      history.push_back(d.request.history_digest.size());
      EXPECT_LE(d.request.history_digest.size(), cfg.context_capacity);
      if (d.request.stage == Stage::LocalLocalization) EXPECT_TRUE(d.request.candidates.empty());
    });
    for (std::size_t i = 0; i < history.size(); ++i) EXPECT_EQ(history[i], std::min<std::size_t>(i, 3));

    const auto poses = r.trajectory.poses();
    ASSERT_FALSE(poses.empty());
    EXPECT_EQ(poses.front().x, e.start.x);
    for (std::size_t i = 1; i < poses.size(); ++i) {
      ASSERT_TRUE(one_step(s, poses[i - 1], poses[i])) << e.id << " pose " << i;
    }
    int prev_t = -1;
    PlanarPose prev_pose = e.start;
    for (const auto& d : r.trajectory.decisions()) {
      EXPECT_GE(d.at("timestep").get<int>(), prev_t);
      prev_t = d.at("timestep").get<int>();
      const auto tool = d.at("executed").at("tool").get<std::string>();
      if (tool == "select_waypoint") EXPECT_FALSE(d.at("candidates").empty());
      const PlanarPose now = d.at("pose").get<PlanarPose>();
      if (tool != "select_waypoint" && tool != "fine_action" && tool != "target_pixel" &&
          tool != "stop") {
        // Perception asks leave the embodiment alone.
        EXPECT_EQ(now.x, prev_pose.x);
        EXPECT_EQ(now.y, prev_pose.y);
        EXPECT_EQ(now.theta, prev_pose.theta);
        EXPECT_TRUE(d.at("fine_poses").empty());
      }
      prev_pose = now;
    }
    if (r.success) EXPECT_LE(r.navigation_error, e.success_radius);

    const TrajectoryLog back = TrajectoryLog::from_jsonl(r.trajectory.to_jsonl());
    EXPECT_EQ(back.to_jsonl(), r.trajectory.to_jsonl());
    EXPECT_EQ(back.stopped(), r.stop_reason == StopReason::BrainStop);
  }
}

TEST(Log, MalformedInput) {
  EXPECT_THROW(TrajectoryLog::from_jsonl("{not json}\n"), FormatError);
  EXPECT_THROW(TrajectoryLog::load("/nonexistent/path.jsonl"), FormatError);
}

TEST(Annotate, DrawsDiscsAndRing) {
  const Scene s = hall();
  const Observation o = render(s, heading_pose(2, 3, 0, 1.25), K0);
  const std::vector<WaypointCandidate> c{{0, {4, 3, 0}, {320, 380}, 2.0}};
  const RgbImage plain = annotate_frame(o, {});
  const RgbImage a = annotate_frame(o, c);
  const RgbImage chosen = annotate_frame(o, c, 0);
  EXPECT_NE(plain.data(), a.data());
  EXPECT_NE(a.data(), chosen.data());
  // Inside radius 6 the disc is green; left of it nothing changes.
  EXPECT_EQ(a.at(325, 380), colors::kGreen);
  EXPECT_EQ(a.at(320, 385), colors::kGreen);
  EXPECT_EQ(a.at(310, 380), plain.at(310, 380));
  EXPECT_EQ(chosen.at(311, 380), colors::kRed);
  EXPECT_EQ(annotate_frame(o, c).data(), a.data());
}
