#include "agentvln/skills.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include "agentvln/errors.hpp"

namespace agentvln {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::Arrived:
      return "arrived";
    case TerminalReason::Blocked:
      return "blocked";
    case TerminalReason::Budget:
      return "budget";
  }
  return "arrived";
}

std::string format_meters(double m) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f meters", m);
  return buf;
}

// ---------------------------------------------------------------------------
// Planning search

PlanSearch::PlanSearch(const OccupancyGrid& grid, Point2 from,
                       std::optional<Point2> include,
                       const SkillConfig& config)
    : grid_(&grid) {
  int sc = 0, sr = 0;
  grid.cell_of(from, sc, sr);
  int c0 = sc, r0 = sr, c1 = sc, r1 = sr;
  int kc0 = 0, kr0 = 0, kc1 = 0, kr1 = 0;
  if (grid.known_box(kc0, kr0, kc1, kr1)) {
    c0 = std::min(c0, kc0);
    r0 = std::min(r0, kr0);
    c1 = std::max(c1, kc1);
    r1 = std::max(r1, kr1);
  }
  if (include) {
    int ic = 0, ir = 0;
    grid.cell_of(*include, ic, ir);
    c0 = std::min(c0, ic);
    r0 = std::min(r0, ir);
    c1 = std::max(c1, ic);
    r1 = std::max(r1, ir);
  }
  const int m = config.search_margin;
  c0_ = std::max(0, c0 - m);
  r0_ = std::max(0, r0 - m);
  const int c_hi = std::min(grid.cols() - 1, c1 + m);
  const int r_hi = std::min(grid.rows() - 1, r1 + m);
  w_ = c_hi - c0_ + 1;
  h_ = r_hi - r0_ + 1;
  const std::size_t n = static_cast<std::size_t>(w_) * h_;
  blocked_.assign(n, 0);
  penalty_.assign(n, 0);
  const double res = grid.resolution();
  const double radius = std::max(config.wall_penalty_radius, config.inflation_radius);
  const int reach = static_cast<int>(std::ceil(radius / res));
  for (int r = 0; r < h_; ++r) {
    for (int c = 0; c < w_; ++c) {
      if (grid.at(c0_ + c, r0_ + r) != CellState::Occupied) continue;
      blocked_[static_cast<std::size_t>(r) * w_ + c] = 1;
      for (int dr = -reach; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
          const int nc = c + dc, nr = r + dr;
          if (nc < 0 || nr < 0 || nc >= w_ || nr >= h_) continue;
          const double d = std::hypot(dc, dr) * res;
          auto& p = penalty_[static_cast<std::size_t>(nr) * w_ + nc];
          std::uint8_t level = 0;
          if (d <= config.wall_penalty_radius + 1e-9) level = 1;
          if (d <= config.inflation_radius + 1e-9) level = 2;
          if (d <= kAgentRadius + 0.5 * res) level = 3;
          p = std::max(p, level);
        }
      }
    }
  }
  cost_.assign(n, kInf);
  parent_.assign(n, -1);
  const int start = (sr - r0_) * w_ + (sc - c0_);
  blocked_[static_cast<std::size_t>(start)] = 0;
  cost_[static_cast<std::size_t>(start)] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  open.emplace(0.0, start);
  const double diag = std::sqrt(2.0) * res;
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > cost_[static_cast<std::size_t>(idx)]) continue;
    const int c = idx % w_, r = idx / w_;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dc == 0 && dr == 0) continue;
        const int nc = c + dc, nr = r + dr;
        if (nc < 0 || nr < 0 || nc >= w_ || nr >= h_) continue;
        const int nidx = nr * w_ + nc;
        if (blocked_[static_cast<std::size_t>(nidx)]) continue;
        if (dc != 0 && dr != 0 &&
            (blocked_[static_cast<std::size_t>(r * w_ + nc)] ||
             blocked_[static_cast<std::size_t>(nr * w_ + c)])) {
          continue;
        }
        double step = (dc != 0 && dr != 0) ? diag : res;
        // Inflated cells stay passable so a start inside the band can leave it.
        // Graded so a path that starts in the band leaves it by the short way.
        const auto pen = penalty_[static_cast<std::size_t>(nidx)];
        if (pen == 1) step *= config.wall_penalty;
        if (pen == 2) step *= config.inflation_penalty;
        if (pen == 3) step *= config.inflation_penalty * config.wall_penalty;
        const double nd = d + step;
        if (nd < cost_[static_cast<std::size_t>(nidx)]) {
          cost_[static_cast<std::size_t>(nidx)] = nd;
          parent_[static_cast<std::size_t>(nidx)] = idx;
          open.emplace(nd, nidx);
        }
      }
    }
  }
}

bool PlanSearch::local(Point2 p, int& i) const {
  int c = 0, r = 0;
  grid_->cell_of(p, c, r);
  c -= c0_;
  r -= r0_;
  if (c < 0 || r < 0 || c >= w_ || r >= h_) return false;
  i = r * w_ + c;
  return true;
}

bool PlanSearch::reachable(Point2 p) const {
  int i = 0;
  return local(p, i) && cost_[static_cast<std::size_t>(i)] < kInf;
}

double PlanSearch::cost_to(Point2 p) const {
  int i = 0;
  return local(p, i) ? cost_[static_cast<std::size_t>(i)] : kInf;
}

bool PlanSearch::occupied(Point2 p) const {
  int c = 0, r = 0;
  return grid_->cell_of(p, c, r) && grid_->at(c, r) == CellState::Occupied;
}

bool PlanSearch::penalized(Point2 p) const {
  int i = 0;
  return local(p, i) && penalty_[static_cast<std::size_t>(i)] != 0;
}

std::vector<Point2> PlanSearch::path_to(Point2 p) const {
  std::vector<Point2> out;
  int i = 0;
  if (!local(p, i) || cost_[static_cast<std::size_t>(i)] == kInf) return out;
  while (i >= 0) {
    out.push_back(grid_->center(c0_ + i % w_, r0_ + i / w_));
    i = parent_[static_cast<std::size_t>(i)];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<Point2> PlanSearch::standoff(Point2 p) const {
  std::optional<Point2> best;
  std::optional<Point2> any;
  double best_d = kInf, any_d = kInf;
  for (int i = 0; i < w_ * h_; ++i) {
    if (cost_[static_cast<std::size_t>(i)] == kInf) continue;
    const int c = c0_ + i % w_, r = r0_ + i / w_;
    const Point2 q = grid_->center(c, r);
    const double d = dist(q, p);
    if (d < any_d) {
      any_d = d;
      any = q;
    }
    if (grid_->at(c, r) == CellState::Free &&
        !penalty_[static_cast<std::size_t>(i)] && d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best ? best : any;
}

// ---------------------------------------------------------------------------
// Waypoint proposals

bool candidate_visible(const WorldPoint& world, const Pose& pose,
                       const CameraIntrinsics& K, const Observation& obs,
                       double occlusion_eps, PixelPoint* pixel,
                       double* depth_scale) {
  const Projection proj = project(world, K, pose);
  const auto* hit = std::get_if<ProjectionResult>(&proj);
  if (hit == nullptr) return false;
  double rendered = 0.0;
  if (!obs.depth.lookup(hit->pixel, rendered)) return false;
  if (rendered < hit->depth_scale - occlusion_eps) return false;
  if (pixel) *pixel = hit->pixel;
  if (depth_scale) *depth_scale = hit->depth_scale;
  return true;
}

namespace {

// Points every `spacing` meters of arc length, excluding the start.
std::vector<Point2> arc_samples(const std::vector<Point2>& path,
                                double spacing, bool include_end) {
  std::vector<Point2> out;
  double next = spacing;
  double travelled = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double seg = dist(path[i - 1], path[i]);
    while (seg > 0.0 && travelled + seg >= next - 1e-9) {
      const double t = (next - travelled) / seg;
      out.push_back({path[i - 1].x + t * (path[i].x - path[i - 1].x),
                     path[i - 1].y + t * (path[i].y - path[i - 1].y)});
      next += spacing;
    }
    travelled += seg;
  }
  if (include_end && path.size() > 1 &&
      (out.empty() || dist(out.back(), path.back()) > spacing / 2.0)) {
    out.push_back(path.back());
  }
  return out;
}

}  // namespace

std::vector<WaypointCandidate> propose_waypoints(
    const OccupancyGrid& grid, const Pose& pose, const CameraIntrinsics& K,
    const Observation& obs, std::optional<WorldPoint> goal_hint,
    const SkillConfig& config) {
  const Point2 agent{pose.translation.x(), pose.translation.y()};
  std::optional<Point2> hint;
  if (goal_hint) hint = Point2{goal_hint->x, goal_hint->y};
  const PlanSearch search(grid, agent, hint, config);

  std::vector<std::vector<Point2>> lists;
  if (hint) {
    Point2 target = *hint;
    if (!search.reachable(target)) {
      if (auto s = search.standoff(target)) target = *s;
    }
    lists.push_back(arc_samples(search.path_to(target), config.waypoint_spacing,
                                false));
  } else {
    const auto fronts = frontiers(grid, config.frontier_min_size);
    for (std::size_t i = 0;
         i < fronts.size() && static_cast<int>(i) < config.frontier_paths; ++i) {
      // Aim at the part of the frontier the camera sees, when there is one.
      Point2 c{fronts[i].centroid.x, fronts[i].centroid.y};
      double best = std::numeric_limits<double>::infinity();
      for (const Point2& m : fronts[i].members) {
        const double d = dist(m, {fronts[i].centroid.x, fronts[i].centroid.y});
        if (d < best && candidate_visible({m.x, m.y, 0.0}, pose, K, obs,
                                          config.occlusion_eps)) {
          best = d;
          c = m;
        }
      }
      const auto path = search.path_to(c);
      if (path.empty()) continue;
      lists.push_back(arc_samples(path, config.waypoint_spacing, true));
    }
  }

  struct Visible {
    WorldPoint world;
    PixelPoint pixel;
    double depth_scale;
  };
  std::vector<std::vector<Visible>> visible(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (auto it = lists[i].rbegin(); it != lists[i].rend(); ++it) {
      const WorldPoint w{it->x, it->y, 0.0};
      PixelPoint px;
      double s = 0.0;
      if (candidate_visible(w, pose, K, obs, config.occlusion_eps, &px, &s)) {
        visible[i].push_back({w, px, s});
      }
    }
  }

  std::vector<WaypointCandidate> out;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (const auto& list : visible) {
      if (round >= list.size()) continue;
      any = true;
      const Visible& v = list[round];
      bool near = false;
      for (const auto& c : out) {
        if (std::hypot(c.world.x - v.world.x, c.world.y - v.world.y) <
            config.dedupe_radius) {
          near = true;
        }
      }
      if (near || static_cast<int>(out.size()) >= config.max_candidates) continue;
      out.push_back({static_cast<int>(out.size()), v.world, v.pixel,
                     v.depth_scale});
    }
    if (!any || static_cast<int>(out.size()) >= config.max_candidates) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perception

PerceptionResult run_perception(const PerceptionQuery& query,
                                const Observation& obs, OccupancyGrid& grid,
                                const CameraIntrinsics& K,
                                const SkillConfig& config) {
  return std::visit(
      overloaded{
          [&](const UpdateMap&) {
            integrate(grid, obs, K);
            MapSummary m{grid.count(CellState::Free),
                         grid.count(CellState::Occupied),
                         grid.observed_count()};
            return PerceptionResult{
                "map: " + std::to_string(m.free) + " free, " +
                    std::to_string(m.occupied) + " occupied, " +
                    std::to_string(m.observed) + " observed cells",
                m};
          },
          [&](const ProjectWaypoints&) {
            CandidateList list{
                propose_waypoints(grid, obs.pose, K, obs, std::nullopt, config)};
            std::string s = std::to_string(list.candidates.size()) + " waypoints";
            for (const auto& c : list.candidates) {
              char buf[96];
              std::snprintf(buf, sizeof(buf), "; #%d at (%.1f, %.1f) %s", c.id,
                            c.pixel.u, c.pixel.v,
                            format_meters(c.depth_scale).c_str());
              s += buf;
            }
            return PerceptionResult{s, list};
          },
          [&](const DistanceAtPixel& q) {
            double d = 0.0;
            if (!obs.depth.lookup(q.pixel, d)) {
              throw InvalidDepthPixel("no valid depth at the queried pixel");
            }
            return PerceptionResult{format_meters(d), Meters{d}};
          },
          [&](const ObjectDistance& q) {
            double best = kInf;
            for (int v = 0; v < obs.height; ++v) {
              for (int u = 0; u < obs.width; ++u) {
                const auto code = obs.code_at(u, v);
                if (code < kCodeObjectBase || obs.label_of(code) != q.label) continue;
                if (obs.depth.valid(u, v)) best = std::min(best, obs.depth.at(u, v));
              }
            }
            if (best == kInf) {
              throw LabelNotVisible("no '" + q.label + "' in view");
            }
            return PerceptionResult{format_meters(best), Meters{best}};
          },
          [&](const VisibleObjects&) {
            std::set<std::string> seen;
            for (auto code : obs.semantic) {
              if (code >= kCodeObjectBase) seen.insert(obs.label_of(code));
            }
            LabelList list{{seen.begin(), seen.end()}};
            std::string s = "visible: ";
            if (list.labels.empty()) s += "none";
            for (std::size_t i = 0; i < list.labels.size(); ++i) {
              if (i) s += ", ";
              s += list.labels[i];
            }
            return PerceptionResult{s, list};
          },
      },
      query);
}

// ---------------------------------------------------------------------------
// Closed-loop execution

namespace {

// Point `ahead` meters of arc beyond the projection of p onto the polyline,
// searching segments from `seg` on. Updates seg to the projection segment.
Point2 lookahead_point(const std::vector<Point2>& path, Point2 p,
                       std::size_t& seg, double ahead) {
  double best = kInf;
  std::size_t best_seg = seg;
  double best_t = 0.0;
  const std::size_t last = std::min(path.size() - 1, seg + 8);
  for (std::size_t i = seg; i < last; ++i) {
    const Point2 a = path[i], b = path[i + 1];
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    double t = len2 > 0 ? ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2
                        : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double d = std::hypot(p.x - (a.x + t * (b.x - a.x)),
                                p.y - (a.y + t * (b.y - a.y)));
    if (d < best - 1e-12) {
      best = d;
      best_seg = i;
      best_t = t;
    }
  }
  seg = best_seg;
  double remaining = ahead;
  Point2 cur{path[seg].x + best_t * (path[seg + 1].x - path[seg].x),
             path[seg].y + best_t * (path[seg + 1].y - path[seg].y)};
  for (std::size_t i = seg + 1; i < path.size(); ++i) {
    const double d = dist(cur, path[i]);
    if (d >= remaining) {
      const double t = remaining / d;
      return {cur.x + t * (path[i].x - cur.x), cur.y + t * (path[i].y - cur.y)};
    }
    remaining -= d;
    cur = path[i];
  }
  return path.back();
}

}  // namespace

PlanResult run_plan(const PlanGoal& goal, const Scene& scene,
                    const PlanarPose& pose, const OccupancyGrid& grid,
                    const std::vector<WaypointCandidate>& candidates,
                    const SkillConfig& config) {
  const Point2 start = pose.position();
  Point2 target{};
  std::optional<Point2> face;
  if (const auto* w = std::get_if<NavigateToWaypoint>(&goal)) {
    const auto it = std::find_if(candidates.begin(), candidates.end(),
                                 [&](const auto& c) { return c.id == w->candidate_id; });
    if (it == candidates.end()) {
      throw InvalidArgument("unknown waypoint id " + std::to_string(w->candidate_id));
    }
    target = {it->world.x, it->world.y};
  } else if (const auto* n = std::get_if<NavigateToWorld>(&goal)) {
    target = {n->target.x, n->target.y};
  } else {
    const auto& d = std::get<Dock>(goal);
    target = {d.target.x, d.target.y};
    face = target;
  }

  const PlanSearch search(grid, start, target, config);
  std::vector<Point2> path;
  Point2 final_point = target;
  if (face) {
    const auto s = search.standoff(target);
    if (!s) throw NoPath("no reachable standoff near the dock target");
    final_point = *s;
    path = search.path_to(*s);
  } else {
    if (search.occupied(target)) throw NoPath("target lies in occupied space");
    path = search.path_to(target);
  }
  if (path.empty()) throw NoPath("target unreachable on the occupancy grid");
  path.front() = start;
  if (path.size() == 1) path.push_back(final_point);
  path.back() = final_point;

  PlanResult result{pose, {}, {}, {}};
  PlanarPose cur = pose;
  int consecutive = 0;
  bool arrived = false;
  bool blocked = false;
  std::size_t seg = 0;
  const auto act = [&](FineAction a) {
    const StepResult s = step(scene, cur, a);
    cur = s.pose;
    ++result.outcome.steps_taken;
    result.path.push_back(cur);
    if (a == FineAction::Forward) {
      if (s.collided) {
        ++result.outcome.collided_count;
        if (s.contact) result.contacts.push_back(*s.contact);
        ++consecutive;
      } else {
        consecutive = 0;
      }
    }
  };
  const auto turn_toward = [&](Point2 p) -> std::optional<FineAction> {
    const double e = wrap_angle(std::atan2(p.y - cur.y, p.x - cur.x) - cur.theta);
    if (std::abs(e) <= kTurnAngle / 2.0) return std::nullopt;
    return e > 0 ? FineAction::Left : FineAction::Right;
  };

  while (result.outcome.steps_taken < config.step_budget) {
    const Point2 p = cur.position();
    if (dist(p, final_point) <= config.arrival_tol) {
      arrived = true;
      break;
    }
    // After a bump, stop cutting corners until the path clears.
    const double ahead = consecutive > 0 ? config.lookahead / 4.0 : config.lookahead;
    Point2 look = dist(p, final_point) <= ahead ? final_point
                                                : lookahead_point(path, p, seg, ahead);
    act(turn_toward(look).value_or(FineAction::Forward));
    if (consecutive >= 2) {
      blocked = true;
      break;
    }
  }
  if (arrived && face && dist(cur.position(), *face) > 1e-9) {
    while (result.outcome.steps_taken < config.step_budget) {
      const auto turn = turn_toward(*face);
      if (!turn) break;
      act(*turn);
    }
    if (turn_toward(*face)) arrived = false;
  }
  result.pose = cur;
  result.outcome.terminal_reason = arrived   ? TerminalReason::Arrived
                                   : blocked ? TerminalReason::Blocked
                                             : TerminalReason::Budget;
  return result;
}

// ---------------------------------------------------------------------------
// Catalog and serialization

namespace {

nlohmann::json object_schema(nlohmann::json properties,
                             std::vector<std::string> required) {
  return {{"type", "object"},
          {"properties", std::move(properties)},
          {"required", std::move(required)},
          {"additionalProperties", false}};
}

}  // namespace

const std::vector<ToolSpec>& skill_catalog() {
  static const std::vector<ToolSpec> catalog = [] {
    const nlohmann::json number = {{"type", "number"}};
    const nlohmann::json integer = {{"type", "integer"}, {"minimum", 0}};
    const nlohmann::json text = {{"type", "string"}};
    const nlohmann::json meters = object_schema(
        {{"summary", text}, {"meters", number}}, {"summary", "meters"});
    std::vector<ToolSpec> c;
    c.push_back({"update_map", "perception",
                 "Integrate the current depth frame into the occupancy grid.",
                 object_schema(nlohmann::json::object(), {}),
                 object_schema({{"summary", text},
                                {"free", integer},
                                {"occupied", integer},
                                {"observed", integer}},
                               {"summary"})});
    c.push_back({"project_waypoints", "perception",
                 "List waypoint candidates visible in the current frame.",
                 object_schema(nlohmann::json::object(), {}),
                 object_schema({{"summary", text},
                                {"candidates", {{"type", "array"}}}},
                               {"summary", "candidates"})});
    c.push_back({"distance_at_pixel", "perception",
                 "Depth in meters at an image pixel.",
                 object_schema({{"u", number}, {"v", number}}, {"u", "v"}), meters});
    c.push_back({"object_distance", "perception",
                 "Distance in meters to the nearest visible object with a label.",
                 object_schema({{"label", text}}, {"label"}), meters});
    c.push_back({"visible_objects", "perception",
                 "Labels of the objects in view.",
                 object_schema(nlohmann::json::object(), {}),
                 object_schema({{"summary", text},
                                {"labels", {{"type", "array"}, {"items", text}}}},
                               {"summary", "labels"})});
    const nlohmann::json outcome = object_schema(
        {{"steps_taken", integer},
         {"terminal_reason",
          {{"type", "string"}, {"enum", {"arrived", "blocked", "budget"}}}},
         {"collided_count", integer}},
        {"steps_taken", "terminal_reason", "collided_count"});
    c.push_back({"navigate_to_waypoint", "planning",
                 "Drive to a waypoint candidate of the current frame.",
                 object_schema({{"id", integer}}, {"id"}), outcome});
    c.push_back({"navigate_to_world", "planning",
                 "Drive to a ground point in world coordinates.",
                 object_schema({{"x", number}, {"y", number}}, {"x", "y"}), outcome});
    c.push_back({"dock", "planning",
                 "Approach a world point and turn to face it.",
                 object_schema({{"x", number}, {"y", number}}, {"x", "y"}), outcome});
    c.push_back({"select_waypoint", "decision",
                 "Choose one of the numbered waypoint prompts.",
                 object_schema({{"id", integer}}, {"id"}), nlohmann::json::object()});
    c.push_back({"fine_action", "decision",
                 "Take a single atomic motion.",
                 object_schema({{"action",
                                 {{"type", "string"},
                                  {"enum", {"forward", "left", "right"}}}}},
                               {"action"}),
                 nlohmann::json::object()});
    c.push_back({"target_pixel", "decision",
                 "Point at the goal in the current frame.",
                 object_schema({{"u", number}, {"v", number}}, {"u", "v"}),
                 nlohmann::json::object()});
    c.push_back({"stop", "decision", "End the episode here.",
                 object_schema(nlohmann::json::object(), {}),
                 nlohmann::json::object()});
    return c;
  }();
  return catalog;
}

nlohmann::json tool_schema() {
  nlohmann::json tools = nlohmann::json::array();
  for (const auto& t : skill_catalog()) {
    tools.push_back({{"name", t.name},
                     {"kind", t.kind},
                     {"description", t.description},
                     {"callable", t.kind != "planning"},
                     {"parameters", t.parameters},
                     {"result", t.result}});
  }
  return {{"version", 1}, {"tools", tools}};
}

nlohmann::json query_to_json(const PerceptionQuery& q) {
  return std::visit(
      overloaded{
          [](const UpdateMap&) { return nlohmann::json{{"tool", "update_map"}}; },
          [](const ProjectWaypoints&) {
            return nlohmann::json{{"tool", "project_waypoints"}};
          },
          [](const DistanceAtPixel& d) {
            return nlohmann::json{
                {"tool", "distance_at_pixel"}, {"u", d.pixel.u}, {"v", d.pixel.v}};
          },
          [](const ObjectDistance& o) {
            return nlohmann::json{{"tool", "object_distance"}, {"label", o.label}};
          },
          [](const VisibleObjects&) {
            return nlohmann::json{{"tool", "visible_objects"}};
          },
      },
      q);
}

PerceptionQuery perception_query_from_json(const nlohmann::json& j) {
  const auto tool = j.at("tool").get<std::string>();
  if (tool == "update_map") return UpdateMap{};
  if (tool == "project_waypoints") return ProjectWaypoints{};
  if (tool == "distance_at_pixel") {
    return DistanceAtPixel{{j.at("u").get<double>(), j.at("v").get<double>()}};
  }
  if (tool == "object_distance") return ObjectDistance{j.at("label").get<std::string>()};
  if (tool == "visible_objects") return VisibleObjects{};
  throw FormatError("unknown perception tool '" + tool + "'");
}

nlohmann::json candidate_to_json(const WaypointCandidate& c) {
  return {{"id", c.id},
          {"world", {c.world.x, c.world.y, c.world.z}},
          {"pixel", {c.pixel.u, c.pixel.v}},
          {"depth_scale", c.depth_scale}};
}

WaypointCandidate waypoint_candidate_from_json(const nlohmann::json& j) {
  WaypointCandidate c;
  c.id = j.at("id").get<int>();
  c.world = j.at("world").get<WorldPoint>();
  c.pixel = {j.at("pixel").at(0).get<double>(), j.at("pixel").at(1).get<double>()};
  c.depth_scale = j.at("depth_scale").get<double>();
  return c;
}

nlohmann::json result_to_json(const PerceptionResult& r) {
  nlohmann::json j = {{"summary", r.summary}};
  std::visit(overloaded{
                 [&](const MapSummary& m) {
                   j["free"] = m.free;
                   j["occupied"] = m.occupied;
                   j["observed"] = m.observed;
                 },
                 [&](const CandidateList& l) {
                   j["candidates"] = nlohmann::json::array();
                   for (const auto& c : l.candidates) {
                     j["candidates"].push_back(candidate_to_json(c));
                   }
                 },
                 [&](const Meters& m) { j["meters"] = m.value; },
                 [&](const LabelList& l) { j["labels"] = l.labels; },
             },
             r.payload);
  return j;
}

PerceptionResult perception_result_from_json(const nlohmann::json& j) {
  PerceptionResult r;
  r.summary = j.at("summary").get<std::string>();
  if (j.contains("meters")) {
    r.payload = Meters{j.at("meters").get<double>()};
  } else if (j.contains("labels")) {
    r.payload = LabelList{j.at("labels").get<std::vector<std::string>>()};
  } else if (j.contains("candidates")) {
    CandidateList l;
    for (const auto& c : j.at("candidates")) {
      l.candidates.push_back(waypoint_candidate_from_json(c));
    }
    r.payload = l;
  } else if (j.contains("observed")) {
    r.payload = MapSummary{j.at("free").get<std::int64_t>(),
                           j.at("occupied").get<std::int64_t>(),
                           j.at("observed").get<std::int64_t>()};
  } else {
    throw FormatError("perception result without payload");
  }
  return r;
}

}  // namespace agentvln
