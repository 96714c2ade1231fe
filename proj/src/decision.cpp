#include "agentvln/decision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "agentvln/errors.hpp"

namespace agentvln {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const ToolSpec* find_tool(const std::string& name) {
  for (const auto& t : skill_catalog()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void check_value(const std::string& key, const nlohmann::json& v,
                 const nlohmann::json& schema) {
  const std::string type = schema.at("type").get<std::string>();
  bool ok = false;
  if (type == "number") {
    ok = v.is_number() && std::isfinite(v.get<double>());
  } else if (type == "integer") {
    ok = v.is_number_integer();
  } else if (type == "string") {
    ok = v.is_string();
  }
  if (ok && schema.contains("minimum")) ok = v.get<double>() >= schema["minimum"].get<double>();
  if (ok && schema.contains("enum")) {
    ok = std::find(schema["enum"].begin(), schema["enum"].end(), v) != schema["enum"].end();
  }
  if (!ok) throw SchemaViolation("argument '" + key + "' does not match its schema");
}

}  // namespace

std::string_view to_string(Stage s) {
  return s == Stage::GlobalNavigation ? "global_navigation" : "local_localization";
}

Stage stage_from_string(std::string_view s) {
  if (s == "global_navigation") return Stage::GlobalNavigation;
  if (s == "local_localization") return Stage::LocalLocalization;
  throw FormatError("unknown stage '" + std::string(s) + "'");
}

nlohmann::json decision_to_json(const Decision& d) {
  return std::visit(
      overloaded{
          [](const SelectWaypoint& s) {
            return nlohmann::json{{"tool", "select_waypoint"}, {"id", s.id}};
          },
          [](const FineStep& f) {
            return nlohmann::json{{"tool", "fine_action"},
                                  {"action", std::string(to_string(f.action))}};
          },
          [](const AskPerception& a) { return query_to_json(a.query); },
          [](const TargetPixel& t) {
            return nlohmann::json{
                {"tool", "target_pixel"}, {"u", t.pixel.u}, {"v", t.pixel.v}};
          },
          [](const Stop&) { return nlohmann::json{{"tool", "stop"}}; },
      },
      d);
}

Decision decision_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaViolation("decision must be an object");
  if (!j.contains("tool") || !j["tool"].is_string()) {
    throw SchemaViolation("decision lacks a tool name");
  }
  const std::string name = j["tool"].get<std::string>();
  const ToolSpec* tool = find_tool(name);
  if (tool == nullptr) throw SchemaViolation("unknown tool '" + name + "'");
  if (tool->kind == "planning") {
    throw SchemaViolation("tool '" + name + "' is not callable by the brain");
  }
  const auto& props = tool->parameters.at("properties");
  for (const auto& key : tool->parameters.at("required")) {
    if (!j.contains(key.get<std::string>())) {
      throw SchemaViolation("tool '" + name + "' missing '" + key.get<std::string>() + "'");
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "tool" || key == "rationale") continue;
    if (!props.contains(key)) {
      throw SchemaViolation("tool '" + name + "' has unexpected '" + key + "'");
    }
    check_value(key, value, props[key]);
  }
  if (name == "select_waypoint") return SelectWaypoint{j["id"].get<int>()};
  if (name == "fine_action") {
    return FineStep{fine_action_from_string(j["action"].get<std::string>())};
  }
  if (name == "target_pixel") {
    return TargetPixel{{j["u"].get<double>(), j["v"].get<double>()}};
  }
  if (name == "stop") return Stop{};
  return AskPerception{perception_query_from_json(j)};
}

std::string summarize(const Decision& d) {
  char buf[128];
  return std::visit(
      overloaded{
          [&](const SelectWaypoint& s) {
            return "select_waypoint " + std::to_string(s.id);
          },
          [&](const FineStep& f) {
            return "fine_action " + std::string(to_string(f.action));
          },
          [&](const AskPerception& a) {
            const auto j = query_to_json(a.query);
            std::string s = "ask " + j["tool"].get<std::string>();
            if (j.contains("u")) {
              std::snprintf(buf, sizeof(buf), "(%.1f, %.1f)", j["u"].get<double>(),
                            j["v"].get<double>());
              s += buf;
            }
            if (j.contains("label")) s += "(" + j["label"].get<std::string>() + ")";
            return s;
          },
          [&](const TargetPixel& t) {
            std::snprintf(buf, sizeof(buf), "target_pixel (%.1f, %.1f)", t.pixel.u,
                          t.pixel.v);
            return std::string(buf);
          },
          [&](const Stop&) { return std::string("stop"); },
      },
      d);
}

FallbackScan advance_scan(FallbackScan scan, FineAction action) {
  if (action == FineAction::Forward) return scan;
  const int dir = action == FineAction::Left ? 1 : -1;
  if (scan.direction == 0) scan.direction = dir;
  scan.accumulated += kTurnAngle;
  if (scan.accumulated >= 2.0 * std::numbers::pi - 1e-9) {
    scan.direction = -scan.direction;
    scan.accumulated = 0.0;
  }
  return scan;
}

HistoryContext::HistoryContext(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw InvalidArgument("context capacity must be >= 1");
}

void HistoryContext::push(HistoryEntry entry) {
  if (!entries_.empty() && entry.timestep < entries_.back().timestep) {
    throw InvalidArgument("history entries must be ordered by timestep");
  }
  entries_.push_back(std::move(entry));
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<std::string> HistoryContext::digest() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.push_back("t=" + std::to_string(e.timestep) + " " + e.summary);
  }
  return out;
}

nlohmann::json request_to_json(const BrainRequest& r) {
  nlohmann::json program = nlohmann::json::array();
  for (const auto& g : r.instruction.program) {
    program.push_back({{"relation", g.relation}, {"object_label", g.object_label}});
  }
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : r.candidates) candidates.push_back(candidate_to_json(c));
  return {{"episode_id", r.episode_id},
          {"instruction", {{"text", r.instruction.text}, {"program", program}}},
          {"stage", to_string(r.stage)},
          {"decision_index", r.decision_index},
          {"timestep", r.timestep},
          {"frame_ref", r.frame_ref},
          {"candidates", candidates},
          {"history_digest", r.history_digest},
          {"transcript", transcript_to_json(r.transcript)},
          {"fallback_scan",
           {{"accumulated", r.fallback_scan.accumulated},
            {"direction", r.fallback_scan.direction},
            {"last_forward_collided", r.fallback_scan.last_forward_collided}}},
          {"perception_allowed", r.perception_allowed},
          {"last_dock_arrived", r.last_dock_arrived}};
}

BrainRequest request_from_json(const nlohmann::json& j) {
  BrainRequest r;
  r.episode_id = j.at("episode_id").get<std::string>();
  r.instruction.text = j.at("instruction").at("text").get<std::string>();
  for (const auto& g : j.at("instruction").at("program")) {
    r.instruction.program.push_back(
        {g.at("relation").get<std::string>(), g.at("object_label").get<std::string>()});
  }
  r.stage = stage_from_string(j.at("stage").get<std::string>());
  r.decision_index = j.at("decision_index").get<int>();
  r.timestep = j.at("timestep").get<int>();
  r.frame_ref = j.at("frame_ref").get<std::string>();
  for (const auto& c : j.at("candidates")) {
    r.candidates.push_back(waypoint_candidate_from_json(c));
  }
  r.history_digest = j.at("history_digest").get<std::vector<std::string>>();
  r.transcript = transcript_from_json(j.at("transcript"));
  r.fallback_scan.accumulated = j.at("fallback_scan").at("accumulated").get<double>();
  r.fallback_scan.direction = j.at("fallback_scan").at("direction").get<int>();
  r.fallback_scan.last_forward_collided =
      j.at("fallback_scan").value("last_forward_collided", false);
  r.perception_allowed = j.at("perception_allowed").get<bool>();
  r.last_dock_arrived = j.at("last_dock_arrived").get<bool>();
  return r;
}

}  // namespace agentvln
