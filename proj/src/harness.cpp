#include "agentvln/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "agentvln/brain.hpp"
#include "agentvln/errors.hpp"

namespace agentvln {

namespace fs = std::filesystem;

std::string_view to_string(BrainKind k) {
  switch (k) {
    case BrainKind::Oracle: return "oracle";
    case BrainKind::Scripted: return "scripted";
    case BrainKind::Remote: return "remote";
  }
  return "oracle";
}

BrainKind brain_kind_from_string(std::string_view s) {
  if (s == "oracle") return BrainKind::Oracle;
  if (s == "scripted") return BrainKind::Scripted;
  if (s == "remote") return BrainKind::Remote;
  throw InvalidArgument("unknown brain '" + std::string(s) + "'");
}

namespace {

std::string resolved_endpoint(const SuiteConfig& c) {
  if (!c.endpoint.empty()) return c.endpoint;
  if (const char* env = std::getenv(kRemoteEndpointEnv)) return env;
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

// Value as printed with `decimals` places, so the JSON shows it that way too.
double rounded(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return std::strtod(buf, nullptr);
}

nlohmann::json percent_report(const MetricReport& m) {
  return {{"NE", rounded(m.ne, 2)},
          {"OS", rounded(100.0 * m.os, 1)},
          {"SR", rounded(100.0 * m.sr, 1)},
          {"SPL", rounded(100.0 * m.spl, 1)},
          {"nDTW", rounded(100.0 * m.ndtw, 1)}};
}

}  // namespace

void SuiteConfig::validate() const {
  if (episodes < 1) throw InvalidArgument("a suite needs at least one seed");
  if (mix.empty()) throw InvalidArgument("difficulty mix is empty");
  if (context_capacity < 1) throw InvalidArgument("context_capacity must be at least 1");
  if (parallelism < 1) throw InvalidArgument("parallelism must be at least 1");
  if (brain == BrainKind::Scripted && script_dir.empty()) {
    throw InvalidArgument("scripted brain needs script_dir");
  }
  if (brain == BrainKind::Remote && resolved_endpoint(*this).empty()) {
    throw InvalidArgument(std::string("remote brain needs an endpoint or ") +
                          kRemoteEndpointEnv);
  }
  if (remote_timeout_ms < 1) throw InvalidArgument("remote_timeout_ms must be positive");
}

Episode SuiteConfig::episode(int index) const {
  const auto seed = first_seed + static_cast<std::uint64_t>(index);
  return generate_episode(seed, mix[static_cast<std::size_t>(index) % mix.size()]);
}

nlohmann::json config_to_json(const SuiteConfig& c) {
  nlohmann::json mix = nlohmann::json::array();
  for (auto d : c.mix) mix.push_back(to_string(d));
  return {{"first_seed", c.first_seed},
          {"episodes", c.episodes},
          {"mix", mix},
          {"brain", to_string(c.brain)},
          {"script_dir", c.script_dir},
          {"endpoint", c.endpoint},
          {"remote_timeout_ms", c.remote_timeout_ms},
          {"ablations",
           {{"disable_fallback", c.ablations.disable_fallback},
            {"disable_qdpcot", c.ablations.disable_qdpcot},
            {"disable_waypoint_prompts", c.ablations.disable_waypoint_prompts}}},
          {"context_capacity", c.context_capacity},
          {"output_dir", c.output_dir},
          {"parallelism", c.parallelism},
          {"renders", c.renders}};
}

SuiteConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("suite config must be an object");
  SuiteConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "first_seed") c.first_seed = v.get<std::uint64_t>();
      else if (key == "episodes") c.episodes = v.get<int>();
      else if (key == "mix") {
        c.mix.clear();
        for (const auto& d : v) c.mix.push_back(difficulty_from_string(d.get<std::string>()));
      } else if (key == "brain") c.brain = brain_kind_from_string(v.get<std::string>());
      else if (key == "script_dir") c.script_dir = v.get<std::string>();
      else if (key == "endpoint") c.endpoint = v.get<std::string>();
      else if (key == "remote_timeout_ms") c.remote_timeout_ms = v.get<int>();
      else if (key == "ablations") {
        for (const auto& [flag, on] : v.items()) {
          if (flag == "disable_fallback") c.ablations.disable_fallback = on.get<bool>();
          else if (flag == "disable_qdpcot") c.ablations.disable_qdpcot = on.get<bool>();
          else if (flag == "disable_waypoint_prompts") {
            c.ablations.disable_waypoint_prompts = on.get<bool>();
          } else {
            throw InvalidArgument("unknown ablation '" + flag + "'");
          }
        }
      } else if (key == "context_capacity") {
        const auto cap = v.get<long long>();
        if (cap < 1) throw InvalidArgument("context_capacity must be at least 1");
        c.context_capacity = static_cast<std::size_t>(cap);
      } else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "parallelism") c.parallelism = v.get<int>();
      else if (key == "renders") c.renders = v.get<bool>();
      else throw InvalidArgument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad suite config: ") + e.what());
  }
  return c;
}

SuiteConfig load_suite_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("bad suite config: ") + e.what());
  }
}

MetricReport episode_metrics(const Episode& episode, const Scene& scene,
                             const EpisodeResult* result) {
  const auto reference = reference_path(scene, episode);
  if (result != nullptr) return compute(result->trajectory, episode, reference);
  return compute({episode.start.position()}, false, episode, reference);
}

nlohmann::json SuiteResult::summary(const SuiteConfig& config) const {
  nlohmann::json cfg = config_to_json(config);
  // Where things live and how many threads ran them do not change results.
  for (const char* k : {"output_dir", "script_dir", "endpoint", "parallelism"}) cfg.erase(k);
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : episodes) {
    if (!e.result) errors.push_back({{"episode", e.episode.id}, {"error", e.error}});
  }
  return {{"format", "agentvln-suite"},
          {"version", 1},
          {"config", cfg},
          {"episodes", episodes.size()},
          {"failures", failures},
          {"incidents", incidents},
          {"violations", violations},
          {"metrics", percent_report(aggregate)},
          {"errors", errors}};
}

SuiteResult run_suite(const SuiteConfig& config) {
  config.validate();
  const fs::path out = config.output_dir;
  if (!out.empty()) {
    fs::create_directories(out / "episodes");
    if (config.renders) fs::create_directories(out / "renders");
  }

  std::unique_ptr<RemoteBrain> remote;
  if (config.brain == BrainKind::Remote) {
    RemoteConfig rc;
    rc.endpoint = resolved_endpoint(config);
    rc.timeout = std::chrono::milliseconds(config.remote_timeout_ms);
    remote = std::make_unique<RemoteBrain>(rc);
  }

  AgentConfig agent;
  agent.context_capacity = config.context_capacity;
  agent.ablations = config.ablations;

  SuiteResult suite;
  suite.episodes.resize(static_cast<std::size_t>(config.episodes));
  std::atomic<int> next{0};

  const auto run_one = [&](int index) {
    EpisodeRecord& rec = suite.episodes[static_cast<std::size_t>(index)];
    rec.episode = config.episode(index);
    const Episode& episode = rec.episode;
    const Scene scene = generate_scene(episode.scene_seed, episode.difficulty);
    try {
      std::unique_ptr<Brain> brain;
      switch (config.brain) {
        case BrainKind::Oracle:
          brain = std::make_unique<OracleBrain>();
          break;
        case BrainKind::Scripted: {
          fs::path log = fs::path(config.script_dir) / "episodes" / (episode.id + ".jsonl");
          if (!fs::exists(log)) log = fs::path(config.script_dir) / (episode.id + ".jsonl");
          brain = std::make_unique<ScriptedBrain>(TrajectoryLog::load(log.string()));
          break;
        }
        case BrainKind::Remote:
          brain = std::make_unique<RemoteSession>(*remote, episode.id);
          break;
      }
      rec.result = run_episode(episode, scene, *brain, agent);
    } catch (const std::exception& e) {
      rec.result.reset();
      rec.error = e.what();
    }
    try {
      rec.metrics = episode_metrics(episode, scene, rec.result ? &*rec.result : nullptr);
    } catch (const std::exception& e) {
      if (rec.error.empty()) rec.error = e.what();
      rec.metrics = {};
    }
    if (out.empty() || !rec.result) return;
    rec.result->trajectory.save((out / "episodes" / (episode.id + ".jsonl")).string());
    if (config.renders) {
      try {
        write_topdown(render_topdown(rec.result->trajectory, scene),
                      out / "renders" / (episode.id + ".png"));
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };

  const int workers = std::min(config.parallelism, config.episodes);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < config.episodes; i = next++) run_one(i);
    });
  }
  for (auto& t : pool) t.join();

  std::vector<MetricReport> reports;
  for (const auto& e : suite.episodes) {
    reports.push_back(e.metrics);
    if (!e.result) {
      ++suite.failures;
      continue;
    }
    suite.incidents += e.result->incidents;
    suite.violations += e.result->violations;
  }
  suite.aggregate = aggregate(reports);

  if (!out.empty()) {
    std::ostringstream csv;
    csv << "episode,difficulty,status," << metrics_header() << "\n";
    for (const auto& e : suite.episodes) {
      csv << e.episode.id << ',' << to_string(e.episode.difficulty) << ','
          << (e.result ? "ok" : "error") << ',' << metrics_row(e.metrics) << "\n";
    }
    csv << "mean,,," << metrics_row(suite.aggregate) << "\n";
    write_text(out / "metrics.csv", csv.str());
    write_text(out / "summary.json", suite.summary(config).dump(2) + "\n");
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Top-down renders

namespace {

constexpr Rgb kFloorColor{235, 235, 230};
constexpr Rgb kOutsideColor{90, 90, 90};
constexpr Rgb kWallColor{25, 25, 25};
constexpr Rgb kObjectColor{150, 120, 90};
constexpr Rgb kPathColor{30, 80, 230};
constexpr Rgb kGoalColor{255, 150, 0};
constexpr double kMargin = 0.5;  // meters around the scene bounds

void fill_polygon(RgbImage& img, const TopdownFrame& f, const Polygon& poly, Rgb c) {
  double x0 = poly.front().x, x1 = x0, y0 = poly.front().y, y1 = y0;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const PixelPoint a = f.to_pixel({x0, y1}), b = f.to_pixel({x1, y0});
  for (int v = std::max(0, static_cast<int>(std::floor(a.v)));
       v <= std::min(img.height() - 1, static_cast<int>(std::ceil(b.v))); ++v) {
    for (int u = std::max(0, static_cast<int>(std::floor(a.u)));
         u <= std::min(img.width() - 1, static_cast<int>(std::ceil(b.u))); ++u) {
      if (point_in_polygon(poly, f.to_world({static_cast<double>(u), static_cast<double>(v)}))) {
        img.set(u, v, c);
      }
    }
  }
}

nlohmann::json pixel_json(PixelPoint p) { return {p.u, p.v}; }

}  // namespace

Topdown render_topdown(const TrajectoryLog& log, const Scene& scene,
                       double pixels_per_meter) {
  if (pixels_per_meter <= 0.0) throw InvalidArgument("pixels_per_meter must be positive");
  Topdown t;
  TopdownFrame& f = t.frame;
  f.pixels_per_meter = pixels_per_meter;
  f.origin_x = scene.bounds.min_x - kMargin;
  f.origin_y = scene.bounds.max_y + kMargin;
  f.width = static_cast<int>(std::ceil((scene.bounds.max_x - scene.bounds.min_x + 2 * kMargin) *
                                       pixels_per_meter));
  f.height = static_cast<int>(std::ceil((scene.bounds.max_y - scene.bounds.min_y + 2 * kMargin) *
                                        pixels_per_meter));
  RgbImage& img = t.image;
  img = RgbImage(f.width, f.height, kOutsideColor);
  fill_polygon(img, f, scene.bounds.polygon(), kFloorColor);
  for (const auto& o : scene.objects) fill_polygon(img, f, o.footprint, kObjectColor);
  for (const auto& w : scene.footprint) fill_polygon(img, f, w, kWallColor);

  t.sidecar = {{"format", "agentvln-topdown"},
               {"version", 1},
               {"origin", {f.origin_x, f.origin_y}},
               {"pixels_per_meter", f.pixels_per_meter},
               {"width", f.width},
               {"height", f.height},
               {"scene_seed", scene.seed},
               {"difficulty", to_string(scene.difficulty)}};
  if (log.records().empty()) return t;

  const auto& header = log.records().front();
  if (header.value("type", "") != "header" || !header.contains("episode")) {
    throw InconsistentLog("log does not start with a header");
  }
  Episode episode;
  try {
    episode = header.at("episode").get<Episode>();
  } catch (const std::exception& e) {
    throw InconsistentLog(std::string("unreadable episode header: ") + e.what());
  }
  if (episode.scene_seed != scene.seed || episode.difficulty != scene.difficulty) {
    throw InconsistentLog("log episode " + episode.id + " was not run in this scene");
  }
  const auto poses = log.poses();
  for (const auto& p : poses) {
    if (!scene.bounds.contains(p.x, p.y) || !scene.point_free(p.position())) {
      throw InconsistentLog("pose inside an obstacle or outside the scene");
    }
  }

  const Point2 goal{episode.goal.x, episode.goal.y};
  const PixelPoint gp = f.to_pixel(goal);
  img.draw_ring(gp.u, gp.v, episode.success_radius * pixels_per_meter, 1.0, kGoalColor);
  img.fill_disc(gp.u, gp.v, 0.25 * pixels_per_meter, kGoalColor);

  for (std::size_t i = 1; i < poses.size(); ++i) {
    const PixelPoint a = f.to_pixel(poses[i - 1].position());
    const PixelPoint b = f.to_pixel(poses[i].position());
    img.draw_line(a.u, a.v, b.u, b.v, kPathColor);
  }

  nlohmann::json chosen = nlohmann::json::array();
  for (const auto& d : log.decisions()) {
    std::vector<WaypointCandidate> cands;
    for (const auto& c : d.value("candidates", nlohmann::json::array())) {
      cands.push_back(waypoint_candidate_from_json(c));
    }
    for (const auto& c : cands) {
      const PixelPoint p = f.to_pixel({c.world.x, c.world.y});
      img.fill_disc(p.u, p.v, 3.0, colors::kGreen);
    }
    const auto executed = d.value("executed", nlohmann::json::object());
    if (executed.value("tool", "") != "select_waypoint") continue;
    const int id = executed.at("id").get<int>();
    const auto it = std::find_if(cands.begin(), cands.end(),
                                 [&](const auto& c) { return c.id == id; });
    if (it == cands.end()) {
      throw InconsistentLog("decision " + std::to_string(d.value("index", -1)) +
                            " selects a waypoint it was never offered");
    }
    const PixelPoint p = f.to_pixel({it->world.x, it->world.y});
    img.draw_ring(p.u, p.v, 7.0, 2.0, colors::kRed);
    chosen.push_back({it->world.x, it->world.y});
  }

  if (!poses.empty()) {
    const PixelPoint s = f.to_pixel(poses.front().position());
    img.fill_disc(s.u, s.v, 4.0, colors::kBlack);
    const Point2 end = poses.back().position();
    t.sidecar["path_end"] = {{"world", {end.x, end.y}}, {"pixel", pixel_json(f.to_pixel(end))}};
  }
  t.sidecar["episode"] = episode.id;
  t.sidecar["goal"] = {{"world", {goal.x, goal.y}}, {"pixel", pixel_json(gp)}};
  t.sidecar["success_radius"] = episode.success_radius;
  t.sidecar["chosen_waypoints"] = chosen;
  return t;
}

void write_topdown(const Topdown& t, const fs::path& png) {
  write_png(png, t.image);
  fs::path side = png;
  side.replace_extension(".json");
  write_text(side, t.sidecar.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Context sweep

std::vector<SweepPoint> sweep_context(const SuiteConfig& base,
                                      const std::vector<std::size_t>& capacities) {
  std::vector<SweepPoint> out;
  for (const auto cap : capacities) {
    SuiteConfig c = base;
    c.context_capacity = cap;
    if (!base.output_dir.empty()) {
      c.output_dir = (fs::path(base.output_dir) / ("capacity-" + std::to_string(cap))).string();
    }
    const SuiteResult r = run_suite(c);
    SweepPoint p{cap, r.aggregate, r.failures, 0};
    for (const auto& e : r.episodes) {
      if (!e.result) continue;
      for (const auto& d : e.result->trajectory.decisions()) {
        p.max_history = std::max(p.max_history, d.value("history_len", 0));
      }
    }
    out.push_back(p);
  }
  if (!base.output_dir.empty()) {
    std::ostringstream csv;
    csv << "capacity,failures,max_history," << metrics_header() << "\n";
    for (const auto& p : out) {
      csv << p.capacity << ',' << p.failures << ',' << p.max_history << ','
          << metrics_row(p.metrics) << "\n";
    }
    write_text(fs::path(base.output_dir) / "sweep.csv", csv.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instruct corpus

namespace {

struct Dialogue {
  std::vector<TranscriptEntry> rounds;
  Decision final;
};

PerceptionResult answer_query(const PerceptionQuery& q, const Observation& obs,
                              const CameraIntrinsics& K, const SkillConfig& skills) {
  // Map queries are not part of a localization dialogue; they get a blank map.
  OccupancyGrid scratch(Point2{obs.pose.translation.x(), obs.pose.translation.y()});
  try {
    return run_perception(q, obs, scratch, K, skills);
  } catch (const Error& e) {
    return {e.what(), LabelList{}};
  }
}

// Oracle answers until it commits to something other than a perception ask.
Dialogue run_dialogue(BrainRequest request, const EpisodeTruth& truth,
                      OracleCache& cache, const SkillConfig& skills) {
  Dialogue d;
  for (;;) {
    request.transcript = d.rounds;
    request.perception_allowed = d.rounds.size() < static_cast<std::size_t>(kQdMaxRounds);
    BrainResponse r = oracle_decide(request, truth, cache);
    const auto* ask = std::get_if<AskPerception>(&r.decision);
    if (ask == nullptr) {
      d.final = r.decision;
      return d;
    }
    d.rounds.push_back({ask->query, answer_query(ask->query, *truth.obs, truth.K, skills)});
  }
}

std::uint64_t noise_seed(const Episode& e) {
  return e.scene_seed * 0x2545F4914F6CDD1Dull + static_cast<std::uint64_t>(e.difficulty) + 7;
}

}  // namespace

nlohmann::json sample_to_json(const InstructSample& s) {
  nlohmann::json episode;
  to_json(episode, s.episode);
  return {{"format", kInstructFormat},
          {"version", kInstructVersion},
          {"episode", episode},
          {"decision_index", s.decision_index},
          {"pose", pose_to_json(s.pose)},
          {"stage", to_string(s.request.stage)},
          {"context", {{"frames", s.frames}, {"digest", s.request.history_digest}}},
          {"request", request_to_json(s.request)},
          {"transcript", transcript_to_json(s.transcript)},
          {"expected", decision_to_json(s.expected)},
          {"noise_meta",
           {{"perturbed", s.perturbed},
            {"sigma_pos", s.sigma_pos},
            {"sigma_heading", s.sigma_heading}}}};
}

InstructSample sample_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kInstructFormat ||
        j.at("version").get<int>() != kInstructVersion) {
      throw FormatError("not an instruct sample of a supported version");
    }
    InstructSample s;
    s.episode = j.at("episode").get<Episode>();
    s.decision_index = j.at("decision_index").get<int>();
    s.pose = j.at("pose").get<PlanarPose>();
    s.request = request_from_json(j.at("request"));
    s.frames = j.at("context").at("frames").get<std::vector<std::string>>();
    s.transcript = transcript_from_json(j.at("transcript"));
    s.expected = decision_from_json(j.at("expected"));
    const auto& meta = j.at("noise_meta");
    s.perturbed = meta.at("perturbed").get<bool>();
    s.sigma_pos = meta.at("sigma_pos").get<double>();
    s.sigma_heading = meta.at("sigma_heading").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad instruct sample: ") + e.what());
  }
}

std::vector<InstructSample> generate_instruct(const SuiteConfig& config,
                                              const NoiseConfig& noise,
                                              std::size_t max_samples) {
  config.validate();
  if (config.brain != BrainKind::Oracle) {
    throw InvalidArgument("instruct generation needs the oracle brain");
  }
  if (noise.p_perturb < 0.0 || noise.p_perturb > 1.0 || noise.sigma_pos < 0.0 ||
      noise.sigma_heading < 0.0) {
    throw InvalidArgument("noise parameters out of range");
  }
  AgentConfig agent;
  agent.context_capacity = config.context_capacity;
  agent.ablations = config.ablations;

  std::vector<InstructSample> samples;
  for (int i = 0; i < config.episodes; ++i) {
    if (max_samples != 0 && samples.size() >= max_samples) break;
    const Episode episode = config.episode(i);
    const Scene scene = generate_scene(episode.scene_seed, episode.difficulty);
    Rng rng(noise_seed(episode));
    OracleCache cache;

    const auto hook = [&](const DecisionPoint& dp) {
      if (max_samples != 0 && samples.size() >= max_samples) return;
      PlanarPose pose = dp.pose;
      bool perturbed = false;
      if (rng.uniform() < noise.p_perturb) {
        for (int attempt = 0; attempt < 8 && !perturbed; ++attempt) {
          const PlanarPose p{dp.pose.x + noise.sigma_pos * rng.gaussian(),
                             dp.pose.y + noise.sigma_pos * rng.gaussian(),
                             wrap_angle(dp.pose.theta + noise.sigma_heading * rng.gaussian())};
          if (scene.bounds.contains(p.x, p.y) && scene.disc_free(p.position(), kAgentRadius)) {
            pose = p;
            perturbed = true;
          }
        }
      }
      const Observation obs =
          perturbed ? render(scene, pose.pose(agent.camera_height), agent.K, dp.request.timestep)
                    : dp.obs;
      BrainRequest req = dp.request;
      req.annotated_frame = nullptr;
      req.transcript.clear();
      req.stage = visibility_predicate(obs, episode, agent.K, agent.d_vis, agent.min_vis_pixels)
                      ? Stage::LocalLocalization
                      : Stage::GlobalNavigation;
      req.candidates.clear();
      if (req.stage == Stage::GlobalNavigation && !agent.ablations.disable_waypoint_prompts) {
        req.candidates = prompt_candidates(dp.grid, obs, episode, agent);
      }
      const EpisodeTruth truth{&scene, &episode, &obs, pose, agent.K};
      Dialogue d = run_dialogue(req, truth, cache, agent.skills);
      if (std::holds_alternative<Stop>(d.final)) return;
      if (req.stage == Stage::LocalLocalization && !std::holds_alternative<TargetPixel>(d.final)) {
        return;
      }
      req.perception_allowed = true;
      InstructSample s;
      s.episode = episode;
      s.decision_index = req.decision_index;
      s.pose = pose;
      s.request = req;
      const int first = std::max(0, req.decision_index -
                                        static_cast<int>(agent.context_capacity));
      for (int k = first; k <= req.decision_index; ++k) {
        s.frames.push_back("frame-" + std::to_string(k));
      }
      s.transcript = std::move(d.rounds);
      s.expected = d.final;
      s.perturbed = perturbed;
      s.sigma_pos = perturbed ? noise.sigma_pos : 0.0;
      s.sigma_heading = perturbed ? noise.sigma_heading : 0.0;
      samples.push_back(std::move(s));
    };
    OracleBrain brain;
    run_episode(episode, scene, brain, agent, hook);
  }
  if (max_samples != 0 && samples.size() > max_samples) samples.resize(max_samples);
  return samples;
}

SampleCheck verify_sample(const InstructSample& sample, const AgentConfig& config) {
  SampleCheck check;
  const Episode& episode = sample.episode;
  const Scene scene = generate_scene(episode.scene_seed, episode.difficulty);
  const Observation obs = render(scene, sample.pose.pose(config.camera_height), config.K,
                                 sample.request.timestep);
  const bool visible =
      visibility_predicate(obs, episode, config.K, config.d_vis, config.min_vis_pixels);
  check.stage_ok = visible == (sample.request.stage == Stage::LocalLocalization);

  OracleCache cache;
  const EpisodeTruth truth{&scene, &episode, &obs, sample.pose, config.K};
  const Dialogue d = run_dialogue(sample.request, truth, cache, config.skills);
  std::ostringstream why;
  if (d.rounds.size() != sample.transcript.size()) {
    why << "dialogue has " << d.rounds.size() << " rounds, sample " << sample.transcript.size();
  } else {
    for (std::size_t k = 0; k < d.rounds.size(); ++k) {
      if (query_to_json(d.rounds[k].query) != query_to_json(sample.transcript[k].query) ||
          result_to_json(d.rounds[k].answer) != result_to_json(sample.transcript[k].answer)) {
        why << "round " << k << " differs";
        break;
      }
    }
  }
  if (why.str().empty() && decision_to_json(d.final) != decision_to_json(sample.expected)) {
    why << "expected " << decision_to_json(sample.expected).dump() << ", re-derived "
        << decision_to_json(d.final).dump();
  }
  check.decision_ok = why.str().empty();
  if (!check.stage_ok) {
    if (!why.str().empty()) why << "; ";
    why << "stage disagrees with visibility";
  }
  check.detail = why.str();
  return check;
}

}  // namespace agentvln
