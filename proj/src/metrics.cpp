#include "agentvln/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "agentvln/errors.hpp"

namespace agentvln {

namespace {

double d2(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

double path_length(const std::vector<Point2>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += d2(path[i - 1], path[i]);
  return len;
}

double dtw(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  if (a.empty() || b.empty()) throw EmptyTrajectory("dtw of an empty path");
  // Two rolling rows of the cumulative cost matrix.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(b.size() + 1, inf), cur(b.size() + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = d2(a[i - 1], b[j - 1]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double ndtw(const std::vector<Point2>& path, const std::vector<Point2>& reference,
            double success_radius) {
  if (success_radius <= 0.0) throw InvalidArgument("success radius must be positive");
  return std::exp(-dtw(path, reference) /
                  (static_cast<double>(reference.size()) * success_radius));
}

std::vector<Point2> reference_path(const Scene& scene, const Episode& episode,
                                   double spacing) {
  if (spacing <= 0.0) throw InvalidArgument("spacing must be positive");
  const NavRaster raster(scene);
  const WorldPoint start{episode.start.x, episode.start.y, 0.0};
  const auto taut = geodesic_path(raster, start, episode.goal);
  if (taut.empty()) throw NoPath("goal unreachable from the episode start");
  std::vector<Point2> out{taut.front()};
  double carry = 0.0;  // arc length since the last emitted sample
  for (std::size_t i = 1; i < taut.size(); ++i) {
    const Point2 a = taut[i - 1], b = taut[i];
    const double len = d2(a, b);
    double s = spacing - carry;
    while (s < len) {
      const double t = s / len;
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      s += spacing;
    }
    carry = len - (s - spacing);
  }
  if (d2(out.back(), taut.back()) > 1e-12) out.push_back(taut.back());
  return out;
}

MetricReport compute(const std::vector<Point2>& path, bool stopped,
                     const Episode& episode, const std::vector<Point2>& reference) {
  if (path.empty()) throw EmptyTrajectory("no positions in the trajectory");
  if (reference.empty()) throw InvalidArgument("empty reference path");
  const double radius = episode.success_radius;
  const Point2 goal{episode.goal.x, episode.goal.y};
  MetricReport r;
  r.ne = d2(path.back(), goal);
  r.sr = stopped && r.ne <= radius ? 1.0 : 0.0;
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& p : path) closest = std::min(closest, d2(p, goal));
  r.os = closest <= radius ? 1.0 : 0.0;
  const double l = path_length(reference);
  const double p = path_length(path);
  const double denom = std::max(p, l);
  r.spl = denom > 0.0 ? r.sr * l / denom : r.sr;
  // Turning in place repeats a position; it adds no travel and no alignment.
  std::vector<Point2> moved;
  for (const auto& q : path) {
    if (moved.empty() || d2(moved.back(), q) > 0.0) moved.push_back(q);
  }
  r.ndtw = ndtw(moved, reference, radius);
  return r;
}

MetricReport compute(const TrajectoryLog& trajectory, const Episode& episode,
                     const std::vector<Point2>& reference) {
  const auto poses = trajectory.poses();
  std::vector<Point2> path;
  path.reserve(poses.size());
  for (const auto& p : poses) path.push_back(p.position());
  return compute(path, trajectory.stopped(), episode, reference);
}

MetricReport aggregate(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw EmptyList("no reports to aggregate");
  MetricReport m;
  for (const auto& r : reports) {
    m.ne += r.ne;
    m.os += r.os;
    m.sr += r.sr;
    m.spl += r.spl;
    m.ndtw += r.ndtw;
  }
  const double n = static_cast<double>(reports.size());
  m.ne /= n;
  m.os /= n;
  m.sr /= n;
  m.spl /= n;
  m.ndtw /= n;
  return m;
}

std::string metrics_header() { return "NE,OS,SR,SPL,nDTW"; }

std::string metrics_row(const MetricReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.2f,%.1f,%.1f,%.1f,%.1f", r.ne, 100.0 * r.os,
                100.0 * r.sr, 100.0 * r.spl, 100.0 * r.ndtw);
  return buf;
}

}  // namespace agentvln
