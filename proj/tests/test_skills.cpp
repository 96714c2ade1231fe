#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "agentvln/errors.hpp"
#include "agentvln/skills.hpp"

using namespace agentvln;

namespace {

const CameraIntrinsics K0 = default_camera();

Polygon box(double x0, double y0, double x1, double y1) {
  return Rect{x0, y0, x1, y1}.polygon();
}

Scene room(double length = 12.0) {
  Scene s;
  s.bounds = {0, 0, length, 6};
  s.footprint = {box(0, 0, length, 0.2), box(0, 5.8, length, 6), box(0, 0.2, 0.2, 5.8),
                 box(length - 0.2, 0.2, length, 5.8)};
  return s;
}

Scene chair_room() {
  Scene s = room();
  s.objects.push_back({"chair", box(4.37, 2.7, 4.97, 3.3), {4.67, 3.0, 0.9}});
  return s;
}

// Grid seen from the pose after a full turn in place.
OccupancyGrid scanned(const Scene& s, PlanarPose p) {
  OccupancyGrid g(p.position());
  for (int k = 0; k < 24; ++k) {
    integrate(g, render(s, p.pose(), K0), K0);
    p.theta = wrap_angle(p.theta + kTurnAngle);
  }
  mark_disc_free(g, p.position(), kAgentRadius);
  return g;
}

double polyline_length(const PlanarPose& start, const std::vector<PlanarPose>& path) {
  double len = 0;
  Point2 prev = start.position();
  for (const auto& p : path) {
    len += std::hypot(p.x - prev.x, p.y - prev.y);
    prev = p.position();
  }
  return len;
}

}  // namespace

TEST(Perception, FormatMeters) {
  EXPECT_EQ(format_meters(2.37), "2.37 meters");
  EXPECT_EQ(format_meters(0.004), "0.00 meters");
  EXPECT_EQ(format_meters(10.0), "10.00 meters");
}

TEST(Perception, DistanceAtPixelIsLookup) {
  const Scene s = room();
  Observation o = render(s, heading_pose(2, 3, 0, 1.25), K0);
  o.depth.set(100, 200, 2.37);
  OccupancyGrid g({2, 3});
  const Pose before = o.pose;
  const auto r = run_perception(DistanceAtPixel{{100, 200}}, o, g, K0);
  EXPECT_EQ(std::get<Meters>(r.payload).value, 2.37);
  EXPECT_EQ(r.summary, "2.37 meters");
  EXPECT_EQ(o.pose.rotation, before.rotation);
  EXPECT_EQ(o.pose.translation, before.translation);
  EXPECT_EQ(g.observed_count(), 0);
}

TEST(Perception, DistanceAtInvalidPixel) {
  Scene s;
  s.bounds = {-50, -50, 50, 50};
  const Observation o = render(s, heading_pose(0, 0, 0, 1.25), K0);
  OccupancyGrid g({0, 0});
  EXPECT_THROW(run_perception(DistanceAtPixel{{320, 10}}, o, g, K0), InvalidDepthPixel);
}

TEST(Perception, ObjectDistanceIsNearestFace) {
  const Scene s = chair_room();
  const Observation o = render(s, heading_pose(2, 3, 0, 1.25), K0);
  OccupancyGrid g({2, 3});
  // Every pixel on the chair's front face is 2.37 m deep in camera z; the
  // top face is farther.
  const auto r = run_perception(ObjectDistance{"chair"}, o, g, K0);
  EXPECT_NEAR(std::get<Meters>(r.payload).value, 2.37, 1e-9);
  EXPECT_EQ(r.summary, "2.37 meters");
  EXPECT_THROW(run_perception(ObjectDistance{"piano"}, o, g, K0), LabelNotVisible);
  const auto v = run_perception(VisibleObjects{}, o, g, K0);
  EXPECT_EQ(std::get<LabelList>(v.payload).labels, std::vector<std::string>{"chair"});
}

TEST(Perception, UpdateMapIntegrates) {
  const Scene s = chair_room();
  const Observation o = render(s, heading_pose(2, 3, 0, 1.25), K0);
  OccupancyGrid g({2, 3});
  const auto r = run_perception(UpdateMap{}, o, g, K0);
  const auto& m = std::get<MapSummary>(r.payload);
  EXPECT_EQ(m.free, g.count(CellState::Free));
  EXPECT_EQ(m.occupied, g.count(CellState::Occupied));
  EXPECT_EQ(m.observed, g.observed_count());
  EXPECT_GT(m.occupied, 0);
}

TEST(Waypoints, StraightCorridorOnMidline) {
  const Scene s = room();
  const PlanarPose p{1.05, 3.05, 0};
  OccupancyGrid g(p.position());
  const Observation o = render(s, p.pose(), K0);
  integrate(g, o, K0);
  mark_disc_free(g, p.position(), kAgentRadius);
  const auto cands = propose_waypoints(g, o.pose, K0, o, WorldPoint{8.05, 3.05, 0});
  ASSERT_GE(cands.size(), 3u);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    EXPECT_EQ(cands[i].id, static_cast<int>(i));
    EXPECT_NEAR(cands[i].pixel.u, 320.0, 0.5);
    EXPECT_NEAR(cands[i].world.y, 3.05, 0.05);
  }
  std::vector<double> xs;
  for (const auto& c : cands) xs.push_back(c.world.x);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    EXPECT_NEAR(xs[i] - xs[i - 1], 1.0, 0.11);
  }
}

TEST(Waypoints, BlankWallGivesNothing) {
  Scene s = room();
  s.footprint.push_back(box(3.3, 0.2, 3.5, 5.8));
  const PlanarPose p{3.0, 3.0, 0};
  OccupancyGrid g(p.position());
  const Observation o = render(s, p.pose(), K0);
  integrate(g, o, K0);
  mark_disc_free(g, p.position(), kAgentRadius);
  EXPECT_TRUE(propose_waypoints(g, o.pose, K0, o, WorldPoint{8, 3, 0}).empty());
  EXPECT_TRUE(propose_waypoints(g, o.pose, K0, o, std::nullopt).empty());
}

TEST(Waypoints, BlindCornerHidesFarSamples) {
  // The goal sits behind a wall stub; the route bends around its lower end.
  Scene s = room();
  const Polygon stub = box(4.0, 3.2, 4.2, 5.8);
  s.footprint.push_back(stub);
  const PlanarPose p{1.05, 2.55, 0};
  const OccupancyGrid g = scanned(s, p);
  const Observation o = render(s, p.pose(), K0);
  const auto cands = propose_waypoints(g, o.pose, K0, o, WorldPoint{5.5, 5.0, 0});
  ASSERT_FALSE(cands.empty());
  double nearest_corner = 1e9;
  for (const auto& c : cands) {
    EXPECT_FALSE(segment_intersects_polygon(stub, p.position(), {c.world.x, c.world.y}));
    EXPECT_FALSE(c.world.x > 4.2 && c.world.y > 3.2) << c.world.x << "," << c.world.y;
    nearest_corner = std::min(nearest_corner, std::hypot(c.world.x - 4.1, c.world.y - 3.2));
  }
  EXPECT_LT(nearest_corner, 1.0);
}

TEST(Waypoints, CandidatesReprojectAndAreUnoccluded) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto d = static_cast<Difficulty>(seed % 3);
    const Scene s = generate_scene(seed, d);
    const Episode e = generate_episode(seed, d);
    const OccupancyGrid g = scanned(s, e.start);
    const Observation o = render(s, e.start.pose(), K0);
    for (const auto& hint : {std::optional<WorldPoint>{}, std::optional<WorldPoint>{e.goal}}) {
      const auto cands = propose_waypoints(g, o.pose, K0, o, hint);
      EXPECT_LE(cands.size(), 8u);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& c = cands[i];
        EXPECT_EQ(c.id, static_cast<int>(i));
        EXPECT_EQ(c.world.z, 0.0);
        EXPECT_GT(c.depth_scale, 0.0);
        const auto r = project(c.world, K0, o.pose);
        ASSERT_TRUE(std::holds_alternative<ProjectionResult>(r));
        const auto& pr = std::get<ProjectionResult>(r);
        EXPECT_LT(std::hypot(pr.pixel.u - c.pixel.u, pr.pixel.v - c.pixel.v), 1e-6);
        EXPECT_TRUE(K0.contains(c.pixel.u, c.pixel.v));
        double depth = 0;
        ASSERT_TRUE(o.depth.lookup(c.pixel, depth));
        EXPECT_GE(depth, c.depth_scale - 0.05);
      }
    }
  }
}

TEST(Plan, OpenRoomTwoMetersAhead) {
  const Scene s = room();
  const PlanarPose p{2.05, 3.05, 0};
  const OccupancyGrid g = scanned(s, p);
  const auto r = run_plan(NavigateToWorld{{4.05, 3.05, 0}}, s, p, g, {});
  EXPECT_EQ(r.outcome.terminal_reason, TerminalReason::Arrived);
  EXPECT_EQ(r.outcome.collided_count, 0);
  int forwards = 0;
  PlanarPose prev = p;
  for (const auto& q : r.path) {
    if (q.x != prev.x || q.y != prev.y) ++forwards;
    prev = q;
  }
  EXPECT_EQ(forwards, 8);
  EXPECT_EQ(r.outcome.steps_taken, static_cast<int>(r.path.size()));
  EXPECT_LE(std::hypot(r.pose.x - 4.05, r.pose.y - 3.05), 0.2);
}

TEST(Plan, DockFacesTarget) {
  const Scene s = chair_room();
  const PlanarPose p{1.55, 1.55, 0};
  const OccupancyGrid g = scanned(s, p);
  const auto r = run_plan(Dock{{4.67, 3.0, 0}}, s, p, g, {});
  EXPECT_EQ(r.outcome.terminal_reason, TerminalReason::Arrived);
  const double bearing = std::atan2(3.0 - r.pose.y, 4.67 - r.pose.x);
  EXPECT_LE(std::abs(wrap_angle(bearing - r.pose.theta)), kTurnAngle + 1e-9);
}

TEST(Plan, TargetInsideObstacleIsNoPath) {
  Scene s = room();
  s.footprint.push_back(box(5.0, 0.2, 6.0, 5.8));
  const PlanarPose p{3.05, 3.05, 0};
  OccupancyGrid g(p.position());
  integrate(g, render(s, p.pose(), K0), K0);
  mark_disc_free(g, p.position(), kAgentRadius);
  // Fill the slab in the map so the target is walled in on every side.
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      const Point2 m = g.center(c, r);
      if (m.x > 5.0 && m.x < 6.0 && m.y > 0.2 && m.y < 5.8) g.mark_occupied(c, r);
    }
  }
  EXPECT_THROW(run_plan(NavigateToWorld{{5.55, 3.05, 0}}, s, p, g, {}), NoPath);
}

TEST(Plan, UnknownWaypointId) {
  const Scene s = room();
  const PlanarPose p{3.05, 3.05, 0};
  const OccupancyGrid g = scanned(s, p);
  EXPECT_THROW(run_plan(NavigateToWaypoint{3}, s, p, g, {}), InvalidArgument);
}

TEST(Plan, UnseenObstacleBlocks) {
  Scene s = room();
  const PlanarPose p{1.05, 3.05, 0};
  // Map built before the blocking wall appeared.
  const OccupancyGrid g = scanned(s, p);
  s.footprint.push_back(box(3.0, 0.2, 3.2, 5.8));
  const auto r = run_plan(NavigateToWorld{{6.05, 3.05, 0}}, s, p, g, {});
  EXPECT_EQ(r.outcome.terminal_reason, TerminalReason::Blocked);
  EXPECT_GE(r.outcome.collided_count, 1);
  EXPECT_LT(r.pose.x, 3.0);
  EXPECT_FALSE(r.contacts.empty());
}

TEST(Plan, NoShortcutsAndSteps) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Scene s = generate_scene(seed, Difficulty::Rooms);
    const Episode e = generate_episode(seed, Difficulty::Rooms);
    const OccupancyGrid g = scanned(s, e.start);
    const Observation o = render(s, e.start.pose(), K0);
    const auto cands = propose_waypoints(g, o.pose, K0, o, std::nullopt);
    for (const auto& c : cands) {
      const auto r = run_plan(NavigateToWaypoint{c.id}, s, e.start, g, cands);
      EXPECT_GE(r.outcome.steps_taken, 1);
      const auto geo = geodesic_distance(s, {e.start.x, e.start.y, 0}, {r.pose.x, r.pose.y, 0});
      ASSERT_TRUE(geo.has_value());
      EXPECT_GE(polyline_length(e.start, r.path), *geo - 2 * 0.1);
      for (const auto& q : r.path) ASSERT_TRUE(s.disc_free(q.position(), kAgentRadius));
    }
  }
}

TEST(PlanSearch, MatchesIndependentDijkstra) {
  // Fully known grid so the search window is the whole grid.
  MapConfig mc;
  mc.half_extent = 12;
  OccupancyGrid g({0, 0}, mc);
  std::mt19937_64 rng(21);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      if (rng() % 9 == 0) g.mark_occupied(c, r);
      else g.mark_free(c, r);
    }
  }
  const SkillConfig cfg;
  const int n = g.cols();
  const double res = g.resolution();
  auto occ = [&](int c, int r) { return g.at(c, r) == CellState::Occupied; };
  // Multiplier per cell from the nearest Occupied cell.
  std::vector<double> mult(static_cast<std::size_t>(n * n), 1.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int rr = 0; rr < n; ++rr)
        for (int cc = 0; cc < n; ++cc)
          if (occ(cc, rr)) dmin = std::min(dmin, std::hypot(cc - c, rr - r) * res);
      if (dmin <= kAgentRadius + 0.5 * res) mult[r * n + c] = cfg.inflation_penalty * cfg.wall_penalty;
      else if (dmin <= cfg.inflation_radius + 1e-9) mult[r * n + c] = cfg.inflation_penalty;
      else if (dmin <= cfg.wall_penalty_radius + 1e-9) mult[r * n + c] = cfg.wall_penalty;
    }
  }
  int sc = 12, sr = 12;
  const Point2 start = g.center(sc, sr);
  std::vector<double> dist(mult.size(), std::numeric_limits<double>::infinity());
  std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, std::greater<>> pq;
  dist[sr * n + sc] = 0;
  pq.push({0, sr * n + sc});
  auto blocked = [&](int c, int r) { return occ(c, r) && !(c == sc && r == sr); };
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const int c = i % n, r = i / n;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int nc = c + dc, nr = r + dr;
        if ((!dc && !dr) || nc < 0 || nr < 0 || nc >= n || nr >= n || blocked(nc, nr)) continue;
        if (dc && dr && (blocked(nc, r) || blocked(c, nr))) continue;
        const double nd = d + (dc && dr ? std::sqrt(2.0) : 1.0) * res * mult[nr * n + nc];
        if (nd < dist[nr * n + nc]) {
          dist[nr * n + nc] = nd;
          pq.push({nd, nr * n + nc});
        }
      }
    }
  }
  const PlanSearch ps(g, start, std::nullopt, cfg);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const Point2 m = g.center(c, r);
      if (!std::isfinite(dist[r * n + c])) {
        EXPECT_FALSE(ps.reachable(m));
        continue;
      }
      ASSERT_TRUE(ps.reachable(m));
      EXPECT_NEAR(ps.cost_to(m), dist[r * n + c], 1e-9);
      const auto path = ps.path_to(m);
      ASSERT_FALSE(path.empty());
      EXPECT_NEAR(path.front().x, start.x, 1e-12);
      EXPECT_NEAR(path.back().x, m.x, 1e-12);
    }
  }
}

TEST(Catalog, NamesUniqueAndSchemaComplete) {
  const auto& cat = skill_catalog();
  std::set<std::string> names;
  for (const auto& t : cat) {
    EXPECT_TRUE(names.insert(t.name).second) << t.name;
    EXPECT_TRUE(t.kind == "perception" || t.kind == "planning" || t.kind == "decision");
    EXPECT_EQ(t.parameters.at("type"), "object");
  }
  for (const char* n : {"update_map", "project_waypoints", "distance_at_pixel",
                        "object_distance", "visible_objects"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  const auto schema = tool_schema();
  EXPECT_EQ(schema.at("tools").size(), cat.size());
}

TEST(Catalog, QueryAndResultRoundTrip) {
  const std::vector<PerceptionQuery> qs{UpdateMap{}, ProjectWaypoints{},
                                        DistanceAtPixel{{100, 200}}, ObjectDistance{"chair"},
                                        VisibleObjects{}};
  for (const auto& q : qs) {
    const auto j = query_to_json(q);
    EXPECT_EQ(query_to_json(perception_query_from_json(j)), j);
  }
  const std::vector<PerceptionResult> rs{
      {"2.37 meters", Meters{2.37}},
      {"chair, table", LabelList{{"chair", "table"}}},
      {"map", MapSummary{3, 4, 7}},
      {"1 candidate", CandidateList{{{0, {1, 2, 0}, {300, 400}, 2.5}}}}};
  for (const auto& r : rs) {
    const auto j = result_to_json(r);
    EXPECT_EQ(result_to_json(perception_result_from_json(j)), j);
  }
  EXPECT_THROW(perception_query_from_json({{"tool", "teleport"}}), FormatError);
}
