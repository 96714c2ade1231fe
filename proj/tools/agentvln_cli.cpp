// agentvln: suite runner, instruct-corpus generator, renderer, context sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agentvln/errors.hpp"
#include "agentvln/harness.hpp"

using namespace agentvln;

namespace {

struct SuiteFlags {
  std::string config_file;
  std::optional<std::uint64_t> first_seed;
  std::optional<int> episodes;
  std::vector<std::string> mix;
  std::string brain;
  std::string script_dir;
  std::string endpoint;
  std::optional<int> remote_timeout_ms;
  bool disable_fallback = false;
  bool disable_qdpcot = false;
  bool disable_waypoint_prompts = false;
  std::optional<std::size_t> context_capacity;
  std::string output_dir;
  std::optional<int> parallelism;
  bool no_renders = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "Suite config file (JSON)");
    app->add_option("--first-seed", first_seed, "First episode seed");
    app->add_option("--episodes", episodes, "Number of seeds");
    app->add_option("--mix", mix, "Difficulties, cycled over seeds")
        ->delimiter(',')
        ->check(CLI::IsMember({"rooms", "corridor", "occlusion_stress"}));
    app->add_option("--brain", brain, "oracle, scripted or remote")
        ->check(CLI::IsMember({"oracle", "scripted", "remote"}));
    app->add_option("--script-dir", script_dir, "Output dir of the run to replay");
    app->add_option("--endpoint", endpoint,
                    std::string("Remote brain URL (default: $") + kRemoteEndpointEnv + ")");
    app->add_option("--remote-timeout-ms", remote_timeout_ms);
    app->add_flag("--disable-fallback", disable_fallback);
    app->add_flag("--disable-qdpcot", disable_qdpcot);
    app->add_flag("--disable-waypoint-prompts", disable_waypoint_prompts);
    app->add_option("--context-capacity", context_capacity)->check(CLI::PositiveNumber);
    app->add_option("--output-dir", output_dir);
    app->add_option("--parallelism", parallelism)->check(CLI::PositiveNumber);
    app->add_flag("--no-renders", no_renders);
  }

  SuiteConfig build() const {
    SuiteConfig c = config_file.empty() ? SuiteConfig{} : load_suite_config(config_file);
    if (first_seed) c.first_seed = *first_seed;
    if (episodes) c.episodes = *episodes;
    if (!mix.empty()) {
      c.mix.clear();
      for (const auto& m : mix) c.mix.push_back(difficulty_from_string(m));
    }
    if (!brain.empty()) c.brain = brain_kind_from_string(brain);
    if (!script_dir.empty()) c.script_dir = script_dir;
    if (!endpoint.empty()) c.endpoint = endpoint;
    if (remote_timeout_ms) c.remote_timeout_ms = *remote_timeout_ms;
    c.ablations.disable_fallback |= disable_fallback;
    c.ablations.disable_qdpcot |= disable_qdpcot;
    c.ablations.disable_waypoint_prompts |= disable_waypoint_prompts;
    if (context_capacity) c.context_capacity = *context_capacity;
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (parallelism) c.parallelism = *parallelism;
    if (no_renders) c.renders = false;
    return c;
  }
};

void print_report(const SuiteResult& r) {
  std::printf("%s\n%s\n", metrics_header().c_str(), metrics_row(r.aggregate).c_str());
  std::printf("episodes %zu, errors %d, incidents %d, violations %d\n", r.episodes.size(),
              r.failures, r.incidents, r.violations);
  for (const auto& e : r.episodes) {
    if (!e.result) std::fprintf(stderr, "%s: %s\n", e.episode.id.c_str(), e.error.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skill-scheduling navigation agent: suites, corpus, renders"};
  app.require_subcommand(1);

  SuiteFlags run_flags;
  auto* run = app.add_subcommand("run", "Run an episode suite");
  run_flags.attach(run);

  SuiteFlags gen_flags;
  NoiseConfig noise;
  std::size_t max_samples = 0;
  std::string corpus_out = "instruct.jsonl";
  bool verify = false;
  auto* gen = app.add_subcommand("generate-instruct", "Roll out the oracle into a corpus");
  gen_flags.attach(gen);
  gen->add_option("--p-perturb", noise.p_perturb)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--sigma-pos", noise.sigma_pos, "meters");
  gen->add_option("--sigma-heading", noise.sigma_heading, "radians");
  gen->add_option("--max-samples", max_samples, "0 for no limit");
  gen->add_option("--out", corpus_out, "Line-delimited JSON corpus");
  gen->add_flag("--verify", verify, "Re-derive every sample after writing");

  std::string log_path, png_path;
  double ppm = 40.0;
  auto* render = app.add_subcommand("render", "Top-down render of a trajectory log");
  render->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  render->add_option("--out", png_path)->required();
  render->add_option("--pixels-per-meter", ppm)->check(CLI::PositiveNumber);

  SuiteFlags sweep_flags;
  std::vector<std::size_t> capacities = kSweepCapacities;
  auto* sweep = app.add_subcommand("sweep-context", "One suite per context capacity");
  sweep_flags.attach(sweep);
  sweep->add_option("--capacities", capacities)->delimiter(',')->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const SuiteResult r = run_suite(run_flags.build());
      print_report(r);
      return 0;
    }
    if (gen->parsed()) {
      SuiteConfig c = gen_flags.build();
      const auto samples = generate_instruct(c, noise, max_samples);
      std::ofstream out(corpus_out, std::ios::binary);
      if (!out) throw InvalidArgument("cannot write " + corpus_out);
      for (const auto& s : samples) out << sample_to_json(s).dump() << "\n";
      out.close();
      std::printf("%zu samples -> %s\n", samples.size(), corpus_out.c_str());
      if (verify) {
        std::size_t bad = 0;
        std::ifstream in(corpus_out);
        std::string line;
        while (std::getline(in, line)) {
          const auto check = verify_sample(sample_from_json(nlohmann::json::parse(line)));
          if (!check.decision_ok || !check.stage_ok) {
            ++bad;
            std::fprintf(stderr, "bad sample: %s\n", check.detail.c_str());
          }
        }
        std::printf("verified, %zu bad\n", bad);
        return bad == 0 ? 0 : 1;
      }
      return 0;
    }
    if (render->parsed()) {
      const TrajectoryLog log = TrajectoryLog::load(log_path);
      if (log.records().empty()) throw InconsistentLog("empty log has no scene");
      const Episode e = log.records().front().at("episode").get<Episode>();
      write_topdown(render_topdown(log, generate_scene(e.scene_seed, e.difficulty), ppm),
                    png_path);
      return 0;
    }
    if (sweep->parsed()) {
      const auto points = sweep_context(sweep_flags.build(), capacities);
      std::printf("capacity,failures,max_history,%s\n", metrics_header().c_str());
      for (const auto& p : points) {
        std::printf("%zu,%d,%d,%s\n", p.capacity, p.failures, p.max_history,
                    metrics_row(p.metrics).c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
