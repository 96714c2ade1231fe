// Procedural floorplans on a 0.1 m lattice.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "agentvln/errors.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

namespace {

constexpr double kThick = 0.2;
constexpr double kClearance = 0.8;

struct Furniture {
  const char* label;
  double sx;
  double sy;
  double height;
};

constexpr std::array<Furniture, 10> kCatalog{{
    {"chair", 0.5, 0.5, 0.9},
    {"table", 1.0, 0.6, 0.75},
    {"sofa", 1.0, 0.5, 0.8},
    {"bed", 1.0, 1.0, 0.6},
    {"plant", 0.4, 0.4, 1.0},
    {"cabinet", 0.6, 0.4, 1.1},
    {"tv_stand", 0.8, 0.4, 0.6},
    {"armchair", 0.6, 0.6, 0.85},
    {"stool", 0.4, 0.4, 0.5},
    {"desk", 1.0, 0.6, 0.75},
}};

double lattice(double v) { return std::round(v * 10.0) / 10.0; }

double rect_gap(const Rect& a, const Rect& b) {
  const double dx = std::max({0.0, a.min_x - b.max_x, b.min_x - a.max_x});
  const double dy = std::max({0.0, a.min_y - b.max_y, b.min_y - a.max_y});
  return std::hypot(dx, dy);
}

struct Layout {
  Scene scene;
  std::vector<Rect> walls;
  std::vector<Rect> objects;
  std::vector<Point2> keepouts;
  double keepout_radius = 1.3;

  void wall(double x0, double y0, double x1, double y1) {
    if (x1 - x0 <= 1e-9 || y1 - y0 <= 1e-9) return;
    walls.push_back({x0, y0, x1, y1});
    scene.footprint.push_back(walls.back().polygon());
  }

  int add(const Furniture& f, const Rect& r) {
    objects.push_back(r);
    SceneObject o;
    o.label = f.label;
    o.footprint = r.polygon();
    o.anchor = {(r.min_x + r.max_x) / 2.0, (r.min_y + r.max_y) / 2.0,
                f.height};
    scene.objects.push_back(std::move(o));
    return static_cast<int>(scene.objects.size()) - 1;
  }

  bool fits(const Rect& r, const Rect& region, double wall_gap,
            double object_gap) const {
    if (r.min_x < region.min_x - 1e-9 || r.max_x > region.max_x + 1e-9 ||
        r.min_y < region.min_y - 1e-9 || r.max_y > region.max_y + 1e-9) {
      return false;
    }
    for (const auto& w : walls) {
      if (rect_gap(r, w) < wall_gap - 1e-9) return false;
    }
    for (const auto& o : objects) {
      if (rect_gap(r, o) < object_gap - 1e-9) return false;
    }
    const Point2 c{(r.min_x + r.max_x) / 2.0, (r.min_y + r.max_y) / 2.0};
    for (const auto& k : keepouts) {
      if (std::hypot(c.x - k.x, c.y - k.y) < keepout_radius) return false;
    }
    return true;
  }

  // Random free placement inside region; -1 when nothing fits.
  int place(Rng& rng, const Furniture& f, const Rect& region,
            double gap = kClearance) {
    for (int attempt = 0; attempt < 80; ++attempt) {
      const bool turn = rng.uniform() < 0.5;
      const double sx = turn ? f.sy : f.sx;
      const double sy = turn ? f.sx : f.sy;
      if (region.max_x - region.min_x < sx || region.max_y - region.min_y < sy) {
        continue;
      }
      const double x0 = lattice(rng.uniform(region.min_x, region.max_x - sx));
      const double y0 = lattice(rng.uniform(region.min_y, region.max_y - sy));
      const Rect r{x0, y0, lattice(x0 + sx), lattice(y0 + sy)};
      if (fits(r, region, gap, gap)) return add(f, r);
    }
    return -1;
  }
};

std::vector<int> shuffled_catalog(Rng& rng) {
  std::vector<int> order(kCatalog.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)));
    std::swap(order[i], order[j]);
  }
  return order;
}

void outer_walls(Layout& l, double w, double h) {
  l.scene.bounds = {0.0, 0.0, w, h};
  l.wall(0.0, 0.0, w, kThick);
  l.wall(0.0, h - kThick, w, h);
  l.wall(0.0, kThick, kThick, h - kThick);
  l.wall(w - kThick, kThick, w, h - kThick);
}

struct Draft {
  Scene scene;
  PlanarPose start;
  int goal = -1;
  bool has_start = false;
};

Draft draft_rooms(Rng& rng) {
  Layout l;
  const double w = 8.0 + 0.5 * rng.uniform_int(0, 6);
  const double h = 6.0 + 0.5 * rng.uniform_int(0, 6);
  outer_walls(l, w, h);
  const double px = lattice(rng.uniform(0.4 * w, 0.6 * w));
  const double door_y = lattice(rng.uniform(kThick + 1.2, h - kThick - 1.2));
  l.wall(px, kThick, px + kThick, door_y - 0.6);
  l.wall(px, door_y + 0.6, px + kThick, h - kThick);
  l.keepouts.push_back({px + kThick / 2.0, door_y});
  if (w - kThick - (px + kThick) >= 3.0 && rng.uniform() < 0.5) {
    const double py = lattice(rng.uniform(0.4 * h, 0.6 * h));
    const double door_x =
        lattice(rng.uniform(px + kThick + 1.0, w - kThick - 1.0));
    l.wall(px + kThick, py, door_x - 0.6, py + kThick);
    l.wall(door_x + 0.6, py, w - kThick, py + kThick);
    l.keepouts.push_back({door_x, py + kThick / 2.0});
  }
  const Rect inner{kThick, kThick, w - kThick, h - kThick};
  const int n = rng.uniform_int(4, 6);
  const auto order = shuffled_catalog(rng);
  for (int i = 0; i < n; ++i) {
    l.place(rng, kCatalog[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])], inner);
  }
  Draft d;
  d.scene = std::move(l.scene);
  return d;
}

Draft draft_corridor(Rng& rng) {
  Layout l;
  const double w = 9.0 + 0.5 * rng.uniform_int(0, 6);
  const double h = 7.0 + 0.5 * rng.uniform_int(0, 6);
  const double cw = (16 + rng.uniform_int(0, 4)) / 10.0;
  outer_walls(l, w, h);
  // Solid block leaving an L of width cw along the bottom and right walls.
  l.wall(kThick, lattice(kThick + cw), lattice(w - kThick - cw), h - kThick);

  const auto order = shuffled_catalog(rng);
  std::size_t next = 0;
  const auto pick = [&](double max_across) -> const Furniture* {
    for (; next < order.size(); ++next) {
      const auto& f = kCatalog[static_cast<std::size_t>(order[next])];
      if (std::min(f.sx, f.sy) <= max_across + 1e-9) {
        ++next;
        return &f;
      }
    }
    return nullptr;
  };

  Draft d;
  // Goal object flush against the far end of the vertical leg.
  const Furniture* goal = pick(cw - 0.4);
  {
    const double lo = std::min(goal->sx, goal->sy);
    const double hi = std::max(goal->sx, goal->sy);
    const double across = hi <= cw - 0.4 ? hi : lo;
    const double depth = hi <= cw - 0.4 ? lo : hi;
    const double cx = w - kThick - cw / 2.0;
    const double x0 = lattice(cx - across / 2.0);
    const Rect r{x0, lattice(h - kThick - depth), lattice(x0 + across),
                 h - kThick};
    d.goal = l.add(*goal, r);
  }
  // Distractors flush against the outer walls, each leaving >= 1 m of width.
  const int extra = rng.uniform_int(1, 2);
  for (int i = 0; i < extra; ++i) {
    const Furniture* f = pick(cw - 1.0);
    if (f == nullptr) break;
    const double across = std::min(f->sx, f->sy);
    const double along = std::max(f->sx, f->sy);
    for (int attempt = 0; attempt < 40; ++attempt) {
      Rect r;
      if (i == 0) {
        const double x0 = lattice(
            rng.uniform(kThick + 2.5, w - kThick - cw - 0.5 - along));
        r = {x0, kThick, lattice(x0 + along), lattice(kThick + across)};
      } else {
        const double y0 = lattice(
            rng.uniform(kThick + cw + 0.5, h - kThick - 1.5 - along));
        r = {lattice(w - kThick - across), y0, w - kThick,
             lattice(y0 + along)};
      }
      bool ok = true;
      for (const auto& o : l.objects) {
        if (rect_gap(r, o) < 1.0) ok = false;
      }
      if (ok) {
        l.add(*f, r);
        break;
      }
    }
  }
  d.start = {kThick + rng.uniform(0.5, 1.2),
             kThick + cw / 2.0 + rng.uniform(-0.2, 0.2),
             rng.uniform(-0.35, 0.35)};
  d.has_start = true;
  d.scene = std::move(l.scene);
  return d;
}

Draft draft_occlusion(Rng& rng) {
  Layout l;
  const double w = 8.0 + 0.5 * rng.uniform_int(0, 6);
  const double h = 6.0 + 0.5 * rng.uniform_int(0, 6);
  outer_walls(l, w, h);
  constexpr double kGap = 1.4;
  const double px = lattice(rng.uniform(0.4 * w, 0.55 * w));
  l.wall(px, kThick, px + kThick, lattice(h - kThick - kGap));

  Draft d;
  const double standoff = 0.4 + 0.1 * rng.uniform_int(0, 2);
  switch (rng.uniform_int(0, 2)) {
    case 0:  // facing the partition
      d.start = {px - standoff, rng.uniform(kThick + 0.8, h / 2.0), 0.0};
      break;
    case 1:  // facing the bottom wall
      d.start = {rng.uniform(kThick + 0.8, px - 0.8), kThick + standoff,
                 -std::numbers::pi / 2.0};
      break;
    default:  // facing the outer side wall
      d.start = {kThick + standoff, rng.uniform(kThick + 0.8, h / 2.0),
                 std::numbers::pi};
      break;
  }
  d.has_start = true;
  l.keepouts.push_back(d.start.position());
  l.keepouts.push_back({px + kThick / 2.0, h - kThick - kGap / 2.0});

  const auto order = shuffled_catalog(rng);
  const Rect goal_region{px + kThick, kThick, w - kThick, h / 2.0};
  std::size_t k = 0;
  for (; k < order.size() && d.goal < 0; ++k) {
    d.goal = l.place(rng, kCatalog[static_cast<std::size_t>(order[k])],
                     goal_region);
  }
  const Rect inner{kThick, kThick, w - kThick, h - kThick};
  const int extra = rng.uniform_int(1, 3);
  for (int i = 0; i < extra && k < order.size(); ++i, ++k) {
    l.place(rng, kCatalog[static_cast<std::size_t>(order[k])], inner);
  }
  d.scene = std::move(l.scene);

  if (rng.uniform() < 0.5) {
    const auto mirror = [w](Point2 p) { return Point2{w - p.x, p.y}; };
    for (auto& poly : d.scene.footprint) {
      for (auto& p : poly) p = mirror(p);
    }
    for (auto& o : d.scene.objects) {
      for (auto& p : o.footprint) p = mirror(p);
      o.anchor.x = w - o.anchor.x;
    }
    d.start.x = w - d.start.x;
    d.start.theta = wrap_angle(std::numbers::pi - d.start.theta);
  }
  return d;
}

Draft draft(Rng& rng, Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::Rooms:
      return draft_rooms(rng);
    case Difficulty::Corridor:
      return draft_corridor(rng);
    case Difficulty::OcclusionStress:
      return draft_occlusion(rng);
  }
  return draft_rooms(rng);
}

WorldPoint ground(Point2 p) { return {p.x, p.y, 0.0}; }

bool start_ok(const Scene& scene, const NavRaster& raster, Point2 p) {
  int c = 0, r = 0;
  return scene.disc_free(p, 0.3) && raster.cell_of(p, c, r) &&
         raster.traversable(c, r);
}

bool blind(const Scene& scene, Point2 a, Point2 b) {
  for (const auto& wall : scene.footprint) {
    if (segment_intersects_polygon(wall, a, b)) return true;
  }
  return false;
}

struct Built {
  Scene scene;
  PlanarPose start;
  int goal = -1;
};

// Rejection loop shared by generate_scene and generate_episode so the scene
// half of an episode is exactly generate_scene(seed, difficulty).
Built build(std::uint64_t seed, Difficulty difficulty) {
  Rng rng(seed ^ (0xA5A5F00Dull + static_cast<std::uint64_t>(difficulty)));
  for (int attempt = 0; attempt < 200; ++attempt) {
    Draft d = draft(rng, difficulty);
    d.scene.seed = seed;
    d.scene.difficulty = difficulty;
    if (d.scene.objects.empty()) continue;
    const NavRaster raster(d.scene);
    if (!d.has_start) {
      d.goal = rng.uniform_int(0, static_cast<int>(d.scene.objects.size()) - 1);
      const auto& a = d.scene.objects[static_cast<std::size_t>(d.goal)].anchor;
      const GeodesicField field(raster, {a.x, a.y, 0.0});
      for (int tries = 0; tries < 400 && !d.has_start; ++tries) {
        const Point2 p{rng.uniform(d.scene.bounds.min_x, d.scene.bounds.max_x),
                       rng.uniform(d.scene.bounds.min_y, d.scene.bounds.max_y)};
        if (!start_ok(d.scene, raster, p)) continue;
        const auto g = field.distance_to(ground(p));
        if (!g || *g < 4.0 || *g > 14.0) continue;
        d.start = {p.x, p.y, rng.uniform(-std::numbers::pi, std::numbers::pi)};
        d.has_start = true;
      }
      if (!d.has_start) continue;
    }
    if (d.goal < 0) continue;
    const auto& anchor = d.scene.objects[static_cast<std::size_t>(d.goal)].anchor;
    const Point2 s = d.start.position();
    if (!start_ok(d.scene, raster, s)) continue;
    if (std::hypot(anchor.x - s.x, anchor.y - s.y) <= 3.5) continue;
    if (!geodesic_distance(raster, ground(s), {anchor.x, anchor.y, 0.0})) {
      continue;
    }
    if (difficulty == Difficulty::OcclusionStress &&
        !blind(d.scene, s, {anchor.x, anchor.y})) {
      continue;
    }
    return {std::move(d.scene), d.start, d.goal};
  }
  throw InvalidArgument("scene generation did not converge for seed " +
                        std::to_string(seed));
}

std::string instruction_text(Rng& rng, Difficulty difficulty,
                             const std::string& label) {
  static const std::array<const char*, 4> kTemplates{
      "Go to the %s.", "Walk over to the %s and stop there.",
      "Find the %s.", "Head to the %s and wait next to it."};
  std::string t = kTemplates[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  if (difficulty == Difficulty::Corridor) {
    t = "Follow the hallway around the corner and stop at the %s.";
  } else if (difficulty == Difficulty::OcclusionStress) {
    t = "Turn around, go through the opening and find the %s.";
  }
  std::string pretty = label;
  std::replace(pretty.begin(), pretty.end(), '_', ' ');
  const auto at = t.find("%s");
  return t.replace(at, 2, pretty);
}

}  // namespace

Scene generate_scene(std::uint64_t seed, Difficulty difficulty) {
  return build(seed, difficulty).scene;
}

Episode generate_episode(std::uint64_t seed, Difficulty difficulty) {
  Built b = build(seed, difficulty);
  Rng rng(seed * 31 + 7);
  const auto& goal = b.scene.objects[static_cast<std::size_t>(b.goal)];
  Episode e;
  e.id = std::string(to_string(difficulty)) + "-" + std::to_string(seed);
  e.scene_seed = seed;
  e.difficulty = difficulty;
  e.start = b.start;
  e.instruction.text = instruction_text(rng, difficulty, goal.label);
  e.instruction.program = {{"nearest", goal.label}};
  e.goal = goal.anchor;
  e.goal_object = b.goal;
  return e;
}

TwoInstanceFixture generate_two_instance_scene(std::uint64_t seed) {
  static const std::array<int, 4> kSmall{0, 4, 7, 8};  // chair plant armchair stool
  Rng rng(seed ^ 0x2B1D5EEDull);
  Layout l;
  outer_walls(l, 12.0, 8.0);
  l.scene.seed = seed;
  const auto& f = kCatalog[static_cast<std::size_t>(kSmall[static_cast<std::size_t>(rng.uniform_int(0, 3))])];
  const double cam_x = 1.0;
  const double cam_y = 4.0;
  const double r_near = lattice(rng.uniform(1.8, 3.5));
  const double r_far = lattice(r_near + rng.uniform(1.2, 3.0));
  const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
  const double off_near = side * lattice(rng.uniform(0.4, 1.2));
  const double off_far = -side * lattice(rng.uniform(0.4, 1.5));
  const auto box = [&](double dist, double off) {
    const double cx = cam_x + dist;
    const double cy = cam_y + off;
    return Rect{lattice(cx - f.sx / 2.0), lattice(cy - f.sy / 2.0),
                lattice(cx - f.sx / 2.0) + f.sx, lattice(cy - f.sy / 2.0) + f.sy};
  };
  TwoInstanceFixture fx;
  // Insertion order is randomized so the index does not leak which is near.
  if (rng.uniform() < 0.5) {
    fx.near_object = l.add(f, box(r_near, off_near));
    fx.far_object = l.add(f, box(r_far, off_far));
  } else {
    fx.far_object = l.add(f, box(r_far, off_far));
    fx.near_object = l.add(f, box(r_near, off_near));
  }
  fx.scene = std::move(l.scene);
  fx.pose = {cam_x, cam_y, 0.0};
  fx.label = f.label;
  return fx;
}

}  // namespace agentvln
