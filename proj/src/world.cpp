#include "agentvln/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "agentvln/errors.hpp"

namespace agentvln {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
Point2 sub(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = sub(b, a);
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(sub(p, a), ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * ab.x), p.y - (a.y + t * ab.y));
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(sub(b, a), sub(c, a));
  const double d2 = cross(sub(b, a), sub(d, a));
  const double d3 = cross(sub(d, c), sub(a, c));
  const double d4 = cross(sub(d, c), sub(b, c));
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  const auto on = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  if (d1 == 0 && on(a, b, c)) return true;
  if (d2 == 0 && on(a, b, d)) return true;
  if (d3 == 0 && on(c, d, a)) return true;
  if (d4 == 0 && on(c, d, b)) return true;
  return false;
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

// Convex prism used by the raycaster. Edges carry outward normals.
struct Prism {
  std::vector<Point2> points;
  std::vector<Point2> normals;
  double height = 0.0;
  std::uint16_t code = kCodeWall;
};

std::vector<Prism> build_prisms(const Scene& scene) {
  std::vector<Prism> out;
  const auto add = [&](const Polygon& poly, double height,
                       std::uint16_t code) {
    Prism p;
    p.points = poly;
    if (signed_area(poly) < 0.0) std::reverse(p.points.begin(), p.points.end());
    const std::size_t n = p.points.size();
    p.normals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 e = sub(p.points[(i + 1) % n], p.points[i]);
      p.normals[i] = {e.y, -e.x};
    }
    p.height = height;
    p.code = code;
    out.push_back(std::move(p));
  };
  for (const auto& wall : scene.footprint) add(wall, kWallHeight, kCodeWall);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    add(scene.objects[i].footprint, scene.objects[i].height(), object_code(i));
  }
  return out;
}

struct Interval {
  double t_in = 0.0;
  double t_out = 0.0;
  double height = 0.0;
  std::uint16_t code = kCodeWall;
};

// Cyrus-Beck clipping of the planar ray o + t*d (t >= 0) against each prism.
void ray_intervals(const std::vector<Prism>& prisms, Point2 o, Point2 d,
                   std::vector<Interval>& out) {
  out.clear();
  for (const auto& prism : prisms) {
    double enter = -kInf;
    double exit = kInf;
    bool miss = false;
    for (std::size_t i = 0; i < prism.points.size(); ++i) {
      const Point2 n = prism.normals[i];
      const double num = dot(n, sub(o, prism.points[i]));
      const double den = dot(n, d);
      if (den == 0.0) {
        if (num > 0.0) {
          miss = true;
          break;
        }
        continue;
      }
      const double t = -num / den;
      if (den < 0.0) {
        enter = std::max(enter, t);
      } else {
        exit = std::min(exit, t);
      }
      if (enter > exit) {
        miss = true;
        break;
      }
    }
    if (miss || exit <= 0.0) continue;
    out.push_back({std::max(enter, 0.0), exit, prism.height, prism.code});
  }
  std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) {
    return a.t_in < b.t_in;
  });
}

// Height of the ray is z0 + slope * t, t being the camera-frame depth.
RayHit first_hit(const std::vector<Interval>& intervals, double z0,
                 double slope) {
  double best = kInf;
  std::uint16_t code = kCodeSky;
  if (slope < 0.0) {
    best = -z0 / slope;
    code = kCodeFloor;
  }
  for (const auto& iv : intervals) {
    if (iv.t_in >= best) break;
    const double z_in = z0 + slope * iv.t_in;
    if (z_in <= iv.height) {
      best = iv.t_in;
      code = iv.code;
      break;
    }
    if (slope < 0.0) {
      const double t_top = (iv.height - z0) / slope;
      if (t_top <= iv.t_out && t_top < best) {
        best = t_top;
        code = iv.code;
      }
    }
  }
  RayHit hit;
  if (best <= kMaxRange) {
    hit.depth = best;
    hit.code = code;
    hit.valid = true;
  }
  return hit;
}

bool camera_inside_obstacle(const Scene& scene, const Pose& pose) {
  return !scene.point_free({pose.translation.x(), pose.translation.y()});
}

}  // namespace

Polygon Rect::polygon() const {
  return {{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}};
}

bool point_in_polygon(const Polygon& poly, Point2 p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[i];
    const Point2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polygon(const Polygon& poly, Point2 p) {
  if (point_in_polygon(poly, p)) return 0.0;
  double best = kInf;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i],
                                                 poly[(i + 1) % poly.size()]));
  }
  return best;
}

bool segment_intersects_polygon(const Polygon& poly, Point2 a, Point2 b) {
  if (point_in_polygon(poly, a) || point_in_polygon(poly, b)) return true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (segments_intersect(a, b, poly[i], poly[(i + 1) % poly.size()])) {
      return true;
    }
  }
  return false;
}

double segment_polygon_distance(const Polygon& poly, Point2 a, Point2 b) {
  if (segment_intersects_polygon(poly, a, b)) return 0.0;
  double best = kInf;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 c = poly[i];
    const Point2 d = poly[(i + 1) % poly.size()];
    best = std::min({best, point_segment_distance(a, c, d),
                     point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b)});
  }
  return best;
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Rooms:
      return "rooms";
    case Difficulty::Corridor:
      return "corridor";
    case Difficulty::OcclusionStress:
      return "occlusion_stress";
  }
  return "rooms";
}

Difficulty difficulty_from_string(std::string_view s) {
  if (s == "rooms") return Difficulty::Rooms;
  if (s == "corridor") return Difficulty::Corridor;
  if (s == "occlusion_stress") return Difficulty::OcclusionStress;
  throw InvalidArgument("unknown difficulty '" + std::string(s) + "'");
}

std::vector<Polygon> Scene::obstacles() const {
  std::vector<Polygon> out = footprint;
  for (const auto& o : objects) out.push_back(o.footprint);
  return out;
}

bool Scene::point_free(Point2 p) const {
  for (const auto& w : footprint) {
    if (point_in_polygon(w, p)) return false;
  }
  for (const auto& o : objects) {
    if (point_in_polygon(o.footprint, p)) return false;
  }
  return true;
}

bool Scene::disc_free(Point2 c, double radius) const {
  for (const auto& w : footprint) {
    if (distance_to_polygon(w, c) <= radius) return false;
  }
  for (const auto& o : objects) {
    if (distance_to_polygon(o.footprint, c) <= radius) return false;
  }
  return true;
}

std::vector<std::string> Scene::labels() const {
  std::vector<std::string> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.label);
  return out;
}

const std::string& Observation::label_of(std::uint16_t code) const {
  static const std::string kEmpty;
  if (code < kCodeObjectBase) return kEmpty;
  const std::size_t i = code - kCodeObjectBase;
  return i < labels.size() ? labels[i] : kEmpty;
}

std::size_t Observation::count_label(std::string_view label) const {
  std::size_t n = 0;
  for (auto code : semantic) {
    if (code >= kCodeObjectBase && label_of(code) == label) ++n;
  }
  return n;
}

RayHit cast_pixel(const Scene& scene, const Pose& pose,
                  const CameraIntrinsics& K, const PixelPoint& pixel) {
  const auto prisms = build_prisms(scene);
  const Vec3 ray = pose.rotation * Vec3((pixel.u - K.cx) / K.fx,
                                        (pixel.v - K.cy) / K.fy, 1.0);
  std::vector<Interval> intervals;
  const Point2 o{pose.translation.x(), pose.translation.y()};
  if (ray.x() != 0.0 || ray.y() != 0.0) {
    ray_intervals(prisms, o, {ray.x(), ray.y()}, intervals);
  }
  return first_hit(intervals, pose.translation.z(), ray.z());
}

Observation render(const Scene& scene, const Pose& pose,
                   const CameraIntrinsics& K, int timestep) {
  if (camera_inside_obstacle(scene, pose)) {
    throw PoseInCollision("camera center lies inside an obstacle");
  }
  Observation obs;
  obs.width = K.width;
  obs.height = K.height;
  obs.semantic.assign(static_cast<std::size_t>(K.width) * K.height, kCodeSky);
  obs.depth = DepthMap(K.width, K.height);
  obs.pose = pose;
  obs.timestep = timestep;
  obs.labels = scene.labels();

  const auto prisms = build_prisms(scene);
  const Point2 o{pose.translation.x(), pose.translation.y()};
  const double z0 = pose.translation.z();
  const Mat3& R = pose.rotation;
  // A level camera has its image y axis along world -z, so every pixel of a
  // column shares one planar ray direction.
  const bool level = std::abs(R(0, 1)) < 1e-12 && std::abs(R(1, 1)) < 1e-12 &&
                     std::abs(R(2, 0)) < 1e-12 && std::abs(R(2, 2)) < 1e-12;
  std::vector<Interval> intervals;
  for (int u = 0; u < K.width; ++u) {
    const double xn = (u - K.cx) / K.fx;
    if (level) {
      const Point2 d{R(0, 0) * xn + R(0, 2), R(1, 0) * xn + R(1, 2)};
      ray_intervals(prisms, o, d, intervals);
    }
    for (int v = 0; v < K.height; ++v) {
      const double yn = (v - K.cy) / K.fy;
      RayHit hit;
      if (level) {
        hit = first_hit(intervals, z0, R(2, 1) * yn);
      } else {
        const Vec3 ray = R * Vec3(xn, yn, 1.0);
        intervals.clear();
        if (ray.x() != 0.0 || ray.y() != 0.0) {
          ray_intervals(prisms, o, {ray.x(), ray.y()}, intervals);
        }
        hit = first_hit(intervals, z0, ray.z());
      }
      if (hit.valid) {
        obs.depth.set(u, v, hit.depth);
        obs.semantic[static_cast<std::size_t>(v) * K.width + u] = hit.code;
      }
    }
  }
  return obs;
}

std::string_view to_string(FineAction a) {
  switch (a) {
    case FineAction::Forward:
      return "forward";
    case FineAction::Left:
      return "left";
    case FineAction::Right:
      return "right";
  }
  return "forward";
}

FineAction fine_action_from_string(std::string_view s) {
  if (s == "forward") return FineAction::Forward;
  if (s == "left") return FineAction::Left;
  if (s == "right") return FineAction::Right;
  throw InvalidArgument("unknown fine action '" + std::string(s) + "'");
}

namespace {

Point2 closest_on_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {a.x + t * dx, a.y + t * dy};
}

// Polygon point nearest to the swept segment ab, pushed just inside the
// (convex) polygon so its grid cell is the obstacle's.
Point2 contact_point(const Polygon& poly, Point2 a, Point2 b) {
  double best = kInf;
  Point2 hit = poly.front();
  const auto consider = [&](Point2 on_poly, Point2 on_seg) {
    const double d = std::hypot(on_poly.x - on_seg.x, on_poly.y - on_seg.y);
    if (d < best) {
      best = d;
      hit = on_poly;
    }
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 c = poly[i];
    const Point2 d = poly[(i + 1) % poly.size()];
    consider(c, closest_on_segment(c, a, b));
    consider(closest_on_segment(a, c, d), a);
    consider(closest_on_segment(b, c, d), b);
  }
  Point2 centroid{0.0, 0.0};
  for (const auto& q : poly) {
    centroid.x += q.x / static_cast<double>(poly.size());
    centroid.y += q.y / static_cast<double>(poly.size());
  }
  const double len = std::hypot(centroid.x - hit.x, centroid.y - hit.y);
  if (len > 0.0) {
    const double k = std::min(1e-3, len) / len;
    hit.x += k * (centroid.x - hit.x);
    hit.y += k * (centroid.y - hit.y);
  }
  return hit;
}

}  // namespace

StepResult step(const Scene& scene, const PlanarPose& pose,
                FineAction action) {
  StepResult r{pose, false, std::nullopt};
  switch (action) {
    case FineAction::Left:
      r.pose.theta = wrap_angle(pose.theta + kTurnAngle);
      return r;
    case FineAction::Right:
      r.pose.theta = wrap_angle(pose.theta - kTurnAngle);
      return r;
    case FineAction::Forward:
      break;
  }
  const Point2 a{pose.x, pose.y};
  const Point2 b{pose.x + kForwardStep * std::cos(pose.theta),
                 pose.y + kForwardStep * std::sin(pose.theta)};
  for (const auto& poly : scene.obstacles()) {
    if (segment_polygon_distance(poly, a, b) <= kAgentRadius) {
      r.collided = true;
      r.contact = contact_point(poly, a, b);
      return r;
    }
  }
  r.pose.x = b.x;
  r.pose.y = b.y;
  return r;
}

// ---------------------------------------------------------------------------
// Free-space raster and geodesics

NavRaster::NavRaster(const Scene& scene, double resolution, double inflation)
    : resolution_(resolution),
      origin_x_(scene.bounds.min_x),
      origin_y_(scene.bounds.min_y) {
  cols_ = static_cast<int>(
      std::ceil((scene.bounds.max_x - scene.bounds.min_x) / resolution - 1e-9));
  rows_ = static_cast<int>(
      std::ceil((scene.bounds.max_y - scene.bounds.min_y) / resolution - 1e-9));
  cells_.assign(static_cast<std::size_t>(cols_) * rows_, 1);
  const auto obstacles = scene.obstacles();
  for (const auto& poly : obstacles) {
    double x0 = kInf, y0 = kInf, x1 = -kInf, y1 = -kInf;
    for (const auto& p : poly) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    const int c0 = std::max(0, static_cast<int>(std::floor(
                                   (x0 - inflation - origin_x_) / resolution)));
    const int c1 = std::min(cols_ - 1, static_cast<int>(std::floor(
                                           (x1 + inflation - origin_x_) /
                                           resolution)));
    const int r0 = std::max(0, static_cast<int>(std::floor(
                                   (y0 - inflation - origin_y_) / resolution)));
    const int r1 = std::min(rows_ - 1, static_cast<int>(std::floor(
                                           (y1 + inflation - origin_y_) /
                                           resolution)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        auto& cell = cells_[static_cast<std::size_t>(r) * cols_ + c];
        if (cell && distance_to_polygon(poly, center(c, r)) <= inflation) {
          cell = 0;
        }
      }
    }
  }
}

bool NavRaster::cell_of(Point2 p, int& c, int& r) const {
  c = static_cast<int>(std::floor((p.x - origin_x_) / resolution_));
  r = static_cast<int>(std::floor((p.y - origin_y_) / resolution_));
  return c >= 0 && r >= 0 && c < cols_ && r < rows_;
}

Point2 NavRaster::center(int c, int r) const {
  return {origin_x_ + (c + 0.5) * resolution_,
          origin_y_ + (r + 0.5) * resolution_};
}

bool NavRaster::snap(Point2 p, double max_dist, int& c, int& r) const {
  int pc = 0, pr = 0;
  cell_of(p, pc, pr);
  if (traversable(pc, pr)) {
    c = pc;
    r = pr;
    return true;
  }
  const int reach = static_cast<int>(std::ceil(max_dist / resolution_)) + 1;
  double best = kInf;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      if (!traversable(pc + dc, pr + dr)) continue;
      const Point2 q = center(pc + dc, pr + dr);
      const double d = std::hypot(q.x - p.x, q.y - p.y);
      if (d <= max_dist && d < best) {
        best = d;
        c = pc + dc;
        r = pr + dr;
      }
    }
  }
  return best < kInf;
}

bool NavRaster::line_of_sight(Point2 a, Point2 b) const {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int n = std::max(1, static_cast<int>(std::ceil(len / (resolution_ / 4))));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    int c = 0, r = 0;
    cell_of({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, c, r);
    if (!traversable(c, r)) return false;
  }
  return true;
}

GeodesicField::GeodesicField(const NavRaster& raster, WorldPoint source)
    : raster_(&raster) {
  const std::size_t n =
      static_cast<std::size_t>(raster.cols()) * raster.rows();
  dist_.assign(n, kInf);
  parent_.assign(n, -1);
  int sc = 0, sr = 0;
  if (!raster.snap({source.x, source.y}, kSnapDistance, sc, sr)) return;
  source_valid_ = true;
  const int cols = raster.cols();
  const double res = raster.resolution();
  const double diag = std::sqrt(2.0) * res;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const int s = sr * cols + sc;
  dist_[static_cast<std::size_t>(s)] = 0.0;
  open.emplace(0.0, s);
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist_[static_cast<std::size_t>(idx)]) continue;
    const int c = idx % cols;
    const int r = idx / cols;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dc == 0 && dr == 0) continue;
        const int nc = c + dc;
        const int nr = r + dr;
        if (!raster.traversable(nc, nr)) continue;
        if (dc != 0 && dr != 0 &&
            (!raster.traversable(c + dc, r) || !raster.traversable(c, r + dr))) {
          continue;
        }
        const double nd = d + ((dc != 0 && dr != 0) ? diag : res);
        const int nidx = nr * cols + nc;
        if (nd < dist_[static_cast<std::size_t>(nidx)]) {
          dist_[static_cast<std::size_t>(nidx)] = nd;
          parent_[static_cast<std::size_t>(nidx)] = idx;
          open.emplace(nd, nidx);
        }
      }
    }
  }
}

std::optional<double> GeodesicField::distance_to(WorldPoint p) const {
  if (!source_valid_) return std::nullopt;
  int c = 0, r = 0;
  if (!raster_->snap({p.x, p.y}, kSnapDistance, c, r)) return std::nullopt;
  const double d =
      dist_[static_cast<std::size_t>(r) * raster_->cols() + c];
  if (d == kInf) return std::nullopt;
  return d;
}

std::vector<Point2> GeodesicField::path_from(WorldPoint p) const {
  std::vector<Point2> out;
  if (!source_valid_) return out;
  int c = 0, r = 0;
  if (!raster_->snap({p.x, p.y}, kSnapDistance, c, r)) return out;
  int idx = r * raster_->cols() + c;
  if (dist_[static_cast<std::size_t>(idx)] == kInf) return out;
  while (idx >= 0) {
    out.push_back(raster_->center(idx % raster_->cols(), idx / raster_->cols()));
    idx = parent_[static_cast<std::size_t>(idx)];
  }
  return out;
}

namespace {

double polyline_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    len += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  return len;
}

// Endpoint as used by the search: the point itself when its cell is
// traversable, otherwise the snapped cell center.
bool resolve_endpoint(const NavRaster& raster, WorldPoint p, Point2& out) {
  int c = 0, r = 0;
  if (!raster.snap({p.x, p.y}, kSnapDistance, c, r)) return false;
  int pc = 0, pr = 0;
  raster.cell_of({p.x, p.y}, pc, pr);
  out = (pc == c && pr == r) ? Point2{p.x, p.y} : raster.center(c, r);
  return true;
}

std::vector<Point2> taut_path(const NavRaster& raster, WorldPoint a,
                              WorldPoint b) {
  Point2 pa, pb;
  if (!resolve_endpoint(raster, a, pa) || !resolve_endpoint(raster, b, pb)) {
    return {};
  }
  GeodesicField field(raster, {pb.x, pb.y, 0.0});
  auto cells = field.path_from({pa.x, pa.y, 0.0});
  if (cells.empty()) return {};
  std::vector<Point2> raw;
  raw.push_back(pa);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) raw.push_back(cells[i]);
  raw.push_back(pb);
  std::vector<Point2> out{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !raster.line_of_sight(raw[i], raw[j])) --j;
    out.push_back(raw[j]);
    i = j;
  }
  return out;
}

}  // namespace

std::vector<Point2> geodesic_path(const NavRaster& raster, WorldPoint a,
                                  WorldPoint b) {
  return taut_path(raster, a, b);
}

std::optional<double> geodesic_distance(const NavRaster& raster, WorldPoint a,
                                        WorldPoint b) {
  const auto ab = taut_path(raster, a, b);
  if (ab.empty()) return std::nullopt;
  const auto ba = taut_path(raster, b, a);
  double len = polyline_length(ab);
  if (!ba.empty()) len = std::min(len, polyline_length(ba));
  return len;
}

std::optional<double> geodesic_distance(const Scene& scene, WorldPoint a,
                                        WorldPoint b) {
  const NavRaster raster(scene);
  return geodesic_distance(raster, a, b);
}

// ---------------------------------------------------------------------------
// Random numbers

Rng::Rng(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ull + 1) {}

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(next() % span);
}

double Rng::gaussian() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const Point2& p) { j = {p.x, p.y}; }
void from_json(const nlohmann::json& j, Point2& p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
}
void to_json(nlohmann::json& j, const WorldPoint& p) { j = {p.x, p.y, p.z}; }
void from_json(const nlohmann::json& j, WorldPoint& p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
  p.z = j.at(2).get<double>();
}
void to_json(nlohmann::json& j, const PlanarPose& p) {
  j = {p.x, p.y, p.theta};
}
void from_json(const nlohmann::json& j, PlanarPose& p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
  p.theta = j.at(2).get<double>();
}

void to_json(nlohmann::json& j, const Scene& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.objects) {
    objects.push_back(
        {{"label", o.label}, {"footprint", o.footprint}, {"anchor", o.anchor}});
  }
  j = {{"seed", s.seed},
       {"difficulty", to_string(s.difficulty)},
       {"bounds",
        {{"min", Point2{s.bounds.min_x, s.bounds.min_y}},
         {"max", Point2{s.bounds.max_x, s.bounds.max_y}}}},
       {"footprint", s.footprint},
       {"objects", objects},
       {"wall_height", kWallHeight}};
}

void from_json(const nlohmann::json& j, Scene& s) {
  s.seed = j.at("seed").get<std::uint64_t>();
  s.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  const auto lo = j.at("bounds").at("min").get<Point2>();
  const auto hi = j.at("bounds").at("max").get<Point2>();
  s.bounds = {lo.x, lo.y, hi.x, hi.y};
  s.footprint = j.at("footprint").get<std::vector<Polygon>>();
  s.objects.clear();
  for (const auto& o : j.at("objects")) {
    s.objects.push_back({o.at("label").get<std::string>(),
                         o.at("footprint").get<Polygon>(),
                         o.at("anchor").get<WorldPoint>()});
  }
}

void to_json(nlohmann::json& j, const Episode& e) {
  nlohmann::json program = nlohmann::json::array();
  for (const auto& g : e.instruction.program) {
    program.push_back(
        {{"relation", g.relation}, {"object_label", g.object_label}});
  }
  j = {{"id", e.id},
       {"scene_seed", e.scene_seed},
       {"difficulty", to_string(e.difficulty)},
       {"start", e.start},
       {"instruction", {{"text", e.instruction.text}, {"program", program}}},
       {"goal", e.goal},
       {"goal_object", e.goal_object},
       {"success_radius", e.success_radius},
       {"max_steps", e.max_steps}};
}

void from_json(const nlohmann::json& j, Episode& e) {
  e.id = j.value("id", std::string{});
  e.scene_seed = j.at("scene_seed").get<std::uint64_t>();
  e.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  e.start = j.at("start").get<PlanarPose>();
  e.instruction.text = j.at("instruction").at("text").get<std::string>();
  e.instruction.program.clear();
  for (const auto& g : j.at("instruction").at("program")) {
    e.instruction.program.push_back({g.at("relation").get<std::string>(),
                                     g.at("object_label").get<std::string>()});
  }
  e.goal = j.at("goal").get<WorldPoint>();
  e.goal_object = j.value("goal_object", -1);
  e.success_radius = j.at("success_radius").get<double>();
  e.max_steps = j.at("max_steps").get<int>();
  if (e.instruction.program.empty()) {
    throw FormatError("episode instruction program is empty");
  }
  if (!(e.success_radius > 0.0)) {
    throw FormatError("success_radius must be positive");
  }
}

}  // namespace agentvln
