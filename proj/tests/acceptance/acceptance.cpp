// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Geometry>

#include "agentvln/agent.hpp"
#include "agentvln/brain.hpp"
#include "agentvln/errors.hpp"
#include "agentvln/geometry.hpp"
#include "agentvln/harness.hpp"
#include "agentvln/mapping.hpp"
#include "agentvln/metrics.hpp"
#include "agentvln/qdpcot.hpp"
#include "agentvln/world.hpp"

#include <httplib.h>

using namespace agentvln;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("agentvln_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool metrics_ordered(const MetricReport& m) {
  return m.spl <= m.sr && m.sr <= m.os;
}

bool metrics_valid(const MetricReport& m) {
  for (double v : {m.ne, m.os, m.sr, m.spl, m.ndtw}) {
    if (!std::isfinite(v)) return false;
  }
  return m.ne >= 0 && m.os >= 0 && m.os <= 1 && m.sr >= 0 && m.spl >= 0 && m.ndtw >= 0 &&
         m.ndtw <= 1 && metrics_ordered(m);
}

// Every suite produced here is checked for the metric ordering.
int g_suites = 0;
int g_suites_unordered = 0;

SuiteResult checked_suite(const SuiteConfig& c) {
  SuiteResult r = run_suite(c);
  ++g_suites;
  bool ok = metrics_ordered(r.aggregate);
  for (const auto& e : r.episodes) ok = ok && metrics_ordered(e.metrics);
  if (!ok) ++g_suites_unordered;
  return r;
}

// ---------------------------------------------------------------------------

Outcome geometry_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const CameraIntrinsics K = default_camera();
  DepthMap map(K.width, K.height);
  double worst_px = 0, worst_m = 0;
  int not_in_frame = 0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    Pose pose;
    pose.rotation = q.toRotationMatrix();
    pose.translation = Vec3(20 * unit(rng) - 10, 20 * unit(rng) - 10, 3 * unit(rng));
    const PixelPoint px{unit(rng) * K.width, unit(rng) * K.height};
    const double depth = 0.1 + (1.0 - unit(rng)) * 9.9;  // (0.1, 10]

    const Projection p = project(back_project(px, depth, K, pose), K, pose);
    if (const auto* r = std::get_if<ProjectionResult>(&p)) {
      worst_px = std::max(worst_px, std::hypot(r->pixel.u - px.u, r->pixel.v - px.v));
    } else {
      ++not_in_frame;
    }

    // Integer pixel so the map lookup reads exactly this depth.
    const int u = std::min(K.width - 1, static_cast<int>(px.u));
    const int v = std::min(K.height - 1, static_cast<int>(px.v));
    map.set(u, v, depth);
    const PixelPoint ip{static_cast<double>(u), static_cast<double>(v)};
    const WorldPoint a = back_project(ip, depth, K, pose);
    const WorldPoint b = pixel_to_world(ip, map, K, pose);
    worst_m = std::max(worst_m, (a.vec() - b.vec()).norm());
  }
  const double secs = seconds_since(t0);
  return {not_in_frame == 0 && worst_px < 1e-6 && worst_m < 1e-12 && secs < 5.0,
          fmt("max reprojection %.2e px, max form disagreement %.2e m, %d lost, %.2f s", worst_px,
              worst_m, not_in_frame, secs)};
}

// Camera-to-floor-point line of sight in 3D. Walls rise above the camera;
// objects block only where the descending ray is below their height.
bool floor_point_visible(const Scene& s, Point2 cam, double h, Point2 p) {
  const double d = std::hypot(p.x - cam.x, p.y - cam.y);
  for (const auto& w : s.footprint) {
    if (segment_intersects_polygon(w, cam, p)) return false;
  }
  for (const auto& o : s.objects) {
    const double s0 = o.height() >= h ? 0.0 : 1.0 - o.height() / h;
    const Point2 from{cam.x + s0 * (p.x - cam.x), cam.y + s0 * (p.y - cam.y)};
    if (d > 0 && segment_intersects_polygon(o.footprint, from, p)) return false;
  }
  return true;
}

Outcome mapping_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  const CameraIntrinsics K = default_camera();
  const double h = kDefaultCameraHeight;
  // Floor distance at the bottom edge of the frustum.
  const double near_limit = h * K.fy / (K.height - K.cy);
  std::int64_t obstacle_free = 0, in_range = 0, in_range_free = 0;
  double worst_room = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Episode e = generate_episode(1000 + seed, Difficulty::Rooms);
    const Scene s = generate_scene(e.scene_seed, e.difficulty);
    PlanarPose p = e.start;
    OccupancyGrid g(p.position());
    for (int k = 0; k < 24; ++k) {
      integrate(g, render(s, p.pose(), K), K);
      p.theta = wrap_angle(p.theta + kTurnAngle);
    }
    const auto obstacles = s.obstacles();
    const double half_diag = g.resolution() * std::sqrt(0.5);
    std::int64_t room_range = 0, room_free = 0;
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) {
        const Point2 q = g.center(c, r);
        if (!s.bounds.contains(q.x, q.y)) continue;
        bool inside = false;
        double clearance = 1e9;
        for (const auto& o : obstacles) {
          inside = inside || point_in_polygon(o, q);
          clearance = std::min(clearance, distance_to_polygon(o, q));
        }
        const CellState st = g.at(c, r);
        if (inside) {
          obstacle_free += st == CellState::Free;
          continue;
        }
        if (clearance < half_diag) continue;  // straddles an obstacle edge
        const double d = std::hypot(q.x - p.x, q.y - p.y);
        if (d < near_limit || d > kMaxRange) continue;
        if (!floor_point_visible(s, p.position(), h, q)) continue;
        ++room_range;
        room_free += st == CellState::Free;
      }
    }
    in_range += room_range;
    in_range_free += room_free;
    if (room_range > 0) worst_room = std::min(worst_room, double(room_free) / room_range);
  }
  const double frac = in_range ? double(in_range_free) / in_range : 0.0;
  const double secs = seconds_since(t0);
  return {obstacle_free == 0 && frac >= 0.90 && secs < 30.0,
          fmt("%lld obstacle cells Free, %.1f%% of %lld visible free cells Free (worst room %.1f%%), "
              "%.1f s",
              static_cast<long long>(obstacle_free), 100 * frac, static_cast<long long>(in_range),
              100 * worst_room, secs)};
}

SuiteConfig oracle_suite(const fs::path& out) {
  SuiteConfig c;
  c.first_seed = 0;
  c.episodes = 100;
  c.output_dir = out.string();
  c.renders = false;
  return c;
}

Outcome oracle_end_to_end(const SuiteResult& r, double secs) {
  const auto& m = r.aggregate;
  return {m.sr >= 0.95 && m.spl >= 0.80 && m.ne <= 1.0 && secs < 120.0 && r.failures == 0,
          fmt("SR %.1f%%, SPL %.3f, NE %.2f m, %d errors, %.1f s", 100 * m.sr, m.spl, m.ne,
              r.failures, secs)};
}

Outcome fallback_efficacy() {
  SuiteConfig on;
  on.first_seed = 0;
  on.episodes = 50;
  on.mix = {Difficulty::OcclusionStress};
  on.renders = false;
  SuiteConfig off = on;
  off.ablations.disable_fallback = true;
  const SuiteResult a = checked_suite(on), b = checked_suite(off);
  int only_on = 0, only_off = 0;
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    if (a.episodes[i].episode.id != b.episodes[i].episode.id) return {false, "unpaired seeds"};
    only_on += a.episodes[i].metrics.sr > b.episodes[i].metrics.sr;
    only_off += b.episodes[i].metrics.sr > a.episodes[i].metrics.sr;
  }
  const double drop = 100 * (a.aggregate.sr - b.aggregate.sr);
  return {drop >= 10.0,
          fmt("SR %.1f%% enabled vs %.1f%% disabled (drop %.1f pts; %d pairs only enabled, %d only "
              "disabled)",
              100 * a.aggregate.sr, 100 * b.aggregate.sr, drop, only_on, only_off)};
}

Outcome qdpcot_correctness() {
  const CameraIntrinsics K = default_camera();
  int decidable = 0, correct = 0, undecidable = 0, single_view = 0, depth_mismatch = 0;
  int approx = 0, approx_qd = 0, approx_ablated = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TwoInstanceFixture fx = generate_two_instance_scene(seed);
    const Observation obs = render(fx.scene, fx.pose.pose(), K);
    OccupancyGrid grid(fx.pose.position());
    const auto near_box = fx.scene.objects[static_cast<std::size_t>(fx.near_object)].footprint;
    const auto far_box = fx.scene.objects[static_cast<std::size_t>(fx.far_object)].footprint;
    const auto front = [&](const Polygon& poly) {
      double x = 1e9;
      for (const auto& v : poly) x = std::min(x, v.x);
      return x - fx.pose.x;
    };
    int truth = -1;
    std::string relation;
    switch (seed % 3) {
      case 0:
        relation = "nearest";
        truth = fx.near_object;
        break;
      case 1:
        relation = "farthest";
        truth = fx.far_object;
        break;
      default: {
        const bool want_near = (seed / 3) % 2 == 0;
        truth = want_near ? fx.near_object : fx.far_object;
        relation = fmt("approx_meters(%.2f)", front(want_near ? near_box : far_box));
      }
    }
    const auto instance_at = [&](PixelPoint px) {
      return static_cast<int>(obs.code_at(static_cast<int>(std::lround(px.u)),
                                          static_cast<int>(std::lround(px.v)))) -
             static_cast<int>(kCodeObjectBase);
    };
    const auto clusters = label_clusters(obs, fx.label);
    if (clusters.size() < 2) {
      ++single_view;
      continue;
    }
    const AmbiguityResult amb = detect_ambiguity(obs, fx.label, relation);
    const auto* signal = std::get_if<AmbiguitySignal>(&amb);
    if (!signal) {
      ++single_view;
      continue;
    }
    CoTState state;
    PixelPoint target;
    try {
      target = resolve(*signal, relation,
                       [&](const PerceptionQuery& q) { return run_perception(q, obs, grid, K); },
                       state);
    } catch (const Undecidable&) {
      ++undecidable;
      continue;
    }
    ++decidable;
    const bool hit = instance_at(target) == truth;
    correct += hit;
    for (const auto& t : state.transcript) {
      const auto* q = std::get_if<DistanceAtPixel>(&t.query);
      const auto* m = std::get_if<Meters>(&t.answer.payload);
      double d = 0;
      if (!q || !m || !obs.depth.lookup(q->pixel, d) || d != m->value) ++depth_mismatch;
    }
    const auto measured = transcript_depth(state.transcript, target);
    double looked_up = 0;
    if (!measured || !obs.depth.lookup(target, looked_up) || *measured != looked_up) {
      ++depth_mismatch;
    }
    if (seed % 3 == 2) {
      ++approx;
      approx_qd += hit;
      approx_ablated += instance_at(clusters.front().representative) == truth;
    }
  }
  const double acc = decidable ? double(correct) / decidable : 0.0;
  const double qd = approx ? 100.0 * approx_qd / approx : 0.0;
  const double ablated = approx ? 100.0 * approx_ablated / approx : 0.0;
  return {decidable > 0 && acc >= 0.99 && depth_mismatch == 0 && qd - ablated >= 20.0,
          fmt("%.1f%% of %d decidable (%d undecidable, %d not both visible), %d depth mismatches, "
              "approx_meters %.1f%% vs %.1f%% ablated",
              100 * acc, decidable, undecidable, single_view, depth_mismatch, qd, ablated)};
}

double brute_dtw(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<double>> D(n + 1, std::vector<double>(m + 1, 1e300));
  D[0][0] = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double c = std::hypot(a[i - 1].x - b[j - 1].x, a[i - 1].y - b[j - 1].y);
      D[i][j] = c + std::min({D[i - 1][j], D[i][j - 1], D[i - 1][j - 1]});
    }
  }
  return D[n][m];
}

Outcome metric_equivalence() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> N(0, 0.4);
  std::uniform_int_distribution<int> len(2, 60);
  const auto walk = [&](Point2 from, int n) {
    std::vector<Point2> p{from};
    while (static_cast<int>(p.size()) < n) p.push_back({p.back().x + N(rng), p.back().y + N(rng)});
    return p;
  };
  double worst = 0;
  int unordered = 0;
  for (int k = 0; k < 50; ++k) {
    const Point2 start{N(rng) * 5, N(rng) * 5};
    // Distinct consecutive points so deduplication leaves the path intact.
    const auto path = walk(start, len(rng));
    const auto ref = walk(start, len(rng));
    Episode e;
    e.goal = {ref.back().x, ref.back().y, 0.5};
    e.success_radius = 1.0 + (k % 5) * 0.5;
    const bool stopped = k % 4 != 0;
    const MetricReport r = compute(path, stopped, e, ref);

    double path_len = 0, ref_len = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      path_len += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    }
    for (std::size_t i = 1; i < ref.size(); ++i) {
      ref_len += std::hypot(ref[i].x - ref[i - 1].x, ref[i].y - ref[i - 1].y);
    }
    const double ne = std::hypot(path.back().x - e.goal.x, path.back().y - e.goal.y);
    const double sr = stopped && ne <= e.success_radius ? 1.0 : 0.0;
    double closest = 1e300;
    for (const auto& q : path) closest = std::min(closest, std::hypot(q.x - e.goal.x, q.y - e.goal.y));
    const double os = closest <= e.success_radius ? 1.0 : 0.0;
    const double spl = sr * ref_len / std::max(path_len, ref_len);
    const double ndtw =
        std::exp(-brute_dtw(path, ref) / (static_cast<double>(ref.size()) * e.success_radius));
    worst = std::max({worst, std::abs(r.ne - ne), std::abs(r.sr - sr), std::abs(r.os - os), std::abs(r.spl - spl),
                      std::abs(r.ndtw - ndtw)});
    unordered += !metrics_ordered(r);
  }
  const bool suites_ok = g_suites > 0 && g_suites_unordered == 0;
  return {worst < 1e-9 && unordered == 0 && suites_ok,
          fmt("max abs error %.2e over 50 pairs; ordering broken in %d pairs and %d of %d suites",
              worst, unordered, g_suites_unordered, g_suites)};
}

Outcome determinism(const SuiteConfig& first, const SuiteResult& first_result) {
  SuiteConfig again = first;
  again.output_dir = scratch("oracle_again").string();
  const SuiteResult second = checked_suite(again);
  const bool same_report =
      first_result.summary(first).dump() == second.summary(again).dump() &&
      slurp(fs::path(first.output_dir) / "summary.json") ==
          slurp(fs::path(again.output_dir) / "summary.json") &&
      slurp(fs::path(first.output_dir) / "metrics.csv") ==
          slurp(fs::path(again.output_dir) / "metrics.csv");

  SuiteConfig replay = first;
  replay.brain = BrainKind::Scripted;
  replay.script_dir = first.output_dir;
  replay.output_dir = scratch("replay").string();
  const SuiteResult rep = checked_suite(replay);
  int differing = 0;
  for (const auto& e : rep.episodes) {
    const auto log = fs::path("episodes") / (e.episode.id + ".jsonl");
    differing += slurp(first.output_dir / log) != slurp(replay.output_dir / log);
  }
  return {same_report && differing == 0 && rep.failures == 0,
          fmt("repeat suite report %s; %d of %zu replayed logs differ, %d replay errors",
              same_report ? "identical" : "DIFFERS", differing, rep.episodes.size(), rep.failures)};
}

Outcome context_discipline(const SuiteConfig& oracle) {
  long checked = 0, wrong = 0;
  for (int i = 0; i < oracle.episodes; ++i) {
    const Episode e = oracle.episode(i);
    const auto log =
        TrajectoryLog::load(fs::path(oracle.output_dir) / "episodes" / (e.id + ".jsonl"));
    for (const auto& d : log.decisions()) {
      ++checked;
      // Logged after the decision joins the window: decisions so far = index + 1.
      const int decisions = d.at("index").get<int>() + 1;
      wrong += d.at("history_len").get<int>() != std::min(decisions, 8);
    }
  }
  SuiteConfig base;
  base.first_seed = 300;
  base.episodes = 2;
  base.renders = false;
  std::vector<std::size_t> caps;
  for (std::size_t c = 1; c <= 32; ++c) caps.push_back(c);
  int sweep_errors = 0, over = 0;
  try {
    for (const auto& p : sweep_context(base, caps)) {
      sweep_errors += p.failures;
      over += p.max_history > static_cast<int>(p.capacity);
    }
  } catch (const std::exception& ex) {
    return {false, std::string("sweep raised: ") + ex.what()};
  }
  return {checked > 0 && wrong == 0 && sweep_errors == 0 && over == 0,
          fmt("%ld decisions, %ld off min(decisions, 8); sweep 1..32: %d errors, %d over capacity",
              checked, wrong, sweep_errors, over)};
}

Outcome instruct_self_verification() {
  SuiteConfig c;
  c.first_seed = 500;
  c.episodes = 400;
  const auto samples = generate_instruct(c, NoiseConfig{}, 1000);
  int bad_decision = 0, bad_stage = 0, perturbed = 0;
  std::string first_detail;
  for (const auto& s : samples) {
    const SampleCheck k = verify_sample(sample_from_json(sample_to_json(s)));
    bad_decision += !k.decision_ok;
    bad_stage += !k.stage_ok;
    perturbed += s.perturbed;
    if ((!k.decision_ok || !k.stage_ok) && first_detail.empty()) first_detail = k.detail;
  }
  return {samples.size() == 1000 && bad_decision == 0 && bad_stage == 0,
          fmt("%zu samples (%d perturbed): %d decision mismatches, %d stage mismatches%s%s",
              samples.size(), perturbed, bad_decision, bad_stage, first_detail.empty() ? "" : "; ",
              first_detail.c_str())};
}

// Endpoint that misbehaves on a fixed fraction of requests and otherwise plays
// a crude policy from the envelope alone.
class FaultyEndpoint {
 public:
  FaultyEndpoint() {
    server_.Post("/decide", [this](const httplib::Request& req, httplib::Response& res) {
      double roll;
      {
        std::lock_guard lock(mu_);
        roll = std::uniform_real_distribution<double>(0, 1)(rng_);
      }
      ++hits_;
      if (roll < 0.12) {
        res.set_content("{\"tool\": \"select_waypoint\", \"id\": ", "application/json");
        return;
      }
      if (roll < 0.20) {
        res.set_content(R"({"tool":"navigate_to_world","x":1,"y":2})", "application/json");
        return;
      }
      if (roll < 0.26) {
        res.status = 500;
        return;
      }
      if (roll < 0.31) {
        std::this_thread::sleep_for(std::chrono::milliseconds(250));
        res.set_content(R"({"tool":"stop"})", "application/json");
        return;
      }
      const auto env = nlohmann::json::parse(req.body);
      const auto& r = env.at("request");
      nlohmann::json d;
      if (roll > 0.93 || r.at("stage") == "local_localization") {
        d = {{"tool", "stop"}};
      } else if (!r.at("candidates").empty()) {
        d = {{"tool", "select_waypoint"}, {"id", r.at("candidates")[0].at("id")}};
      } else {
        d = {{"tool", "fine_action"}, {"action", roll < 0.6 ? "forward" : "left"}};
      }
      res.set_content(nlohmann::json{{"decision", d}, {"rationale", "stub"}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FaultyEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int hits() const { return hits_.load(); }

 private:
  httplib::Server server_;
  std::mutex mu_;
  std::mt19937_64 rng_{7};
  std::atomic<int> hits_{0};
  int port_ = 0;
  std::thread thread_;
};

Outcome remote_robustness() {
  FaultyEndpoint stub;
  SuiteConfig c;
  c.first_seed = 700;
  c.episodes = 100;
  c.brain = BrainKind::Remote;
  c.endpoint = stub.url();
  c.remote_timeout_ms = 100;
  c.renders = false;
  SuiteResult r;
  try {
    r = checked_suite(c);
  } catch (const std::exception& ex) {
    return {false, std::string("suite raised: ") + ex.what()};
  }
  int completed = 0, invalid = 0, logged = 0, with_incidents = 0;
  for (const auto& e : r.episodes) {
    if (!e.result) continue;
    ++completed;
    invalid += !metrics_valid(e.metrics);
    int here = 0;
    for (const auto& d : e.result->trajectory.decisions()) here += d.contains("incident");
    logged += here;
    with_incidents += here > 0;
  }
  return {completed == 100 && invalid == 0 && logged > 0 && logged == r.incidents &&
              metrics_valid(r.aggregate),
          fmt("%d of 100 completed, %d incidents logged in %d episodes, %d invalid metric rows, "
              "%d endpoint hits, SR %.1f%%",
              completed, logged, with_incidents, invalid, stub.hits(), 100 * r.aggregate.sr)};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& ex) {
      o = {false, std::string("raised: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "geometry round trip", geometry_round_trip);
  report(2, "mapping soundness", mapping_soundness);

  const SuiteConfig oracle = oracle_suite(scratch("oracle"));
  SuiteResult oracle_result;
  double oracle_secs = 0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      oracle_result = checked_suite(oracle);
    } catch (const std::exception& ex) {
      std::printf("oracle suite raised: %s\n", ex.what());
    }
    oracle_secs = seconds_since(t0);
  }
  report(3, "oracle end to end", [&] { return oracle_end_to_end(oracle_result, oracle_secs); });
  report(4, "fallback efficacy", fallback_efficacy);
  report(5, "qd-pcot correctness", qdpcot_correctness);
  report(7, "determinism and replay", [&] { return determinism(oracle, oracle_result); });
  report(8, "context discipline", [&] { return context_discipline(oracle); });
  report(9, "instruct self-verification", instruct_self_verification);
  report(10, "remote robustness", remote_robustness);
  // Last, so the ordering check covers every suite above.
  report(6, "metric oracle equivalence", metric_equivalence);

  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
