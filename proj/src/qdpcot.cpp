#include "agentvln/qdpcot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <regex>

#include "agentvln/errors.hpp"

namespace agentvln {

Relation parse_relation(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const std::regex canonical(R"(approx_meters\(\s*([0-9]*\.?[0-9]+)\s*\))");
  static const std::regex numeric(R"(([0-9]*\.?[0-9]+)\s*(m|meters?|metres?)\b)");
  static const std::regex worded(
      R"(\b(one|two|three|four|five|six|seven|eight|nine|ten)\s+(meters?|metres?)\b)");
  static const std::map<std::string, double> kWords{
      {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5},
      {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}};
  std::smatch m;
  if (std::regex_search(s, m, canonical) || std::regex_search(s, m, numeric)) {
    return {RelationKind::ApproxMeters, std::stod(m[1].str())};
  }
  if (std::regex_search(s, m, worded)) {
    return {RelationKind::ApproxMeters, kWords.at(m[1].str())};
  }
  const auto has = [&](const char* w) { return s.find(w) != std::string::npos; };
  if (has("farthest") || has("farther") || has("furthest") || has("further")) {
    return {RelationKind::Farthest, 0.0};
  }
  if (has("nearest") || has("nearer") || has("closest") || has("closer")) {
    return {RelationKind::Nearest, 0.0};
  }
  if (has("left")) return {RelationKind::LeftOfView, 0.0};
  if (has("right")) return {RelationKind::RightOfView, 0.0};
  return {RelationKind::Nearest, 0.0};
}

std::string to_string(const Relation& r) {
  switch (r.kind) {
    case RelationKind::Nearest:
      return "nearest";
    case RelationKind::Farthest:
      return "farthest";
    case RelationKind::LeftOfView:
      return "left_of_view";
    case RelationKind::RightOfView:
      return "right_of_view";
    case RelationKind::ApproxMeters: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "approx_meters(%g)", r.meters);
      return buf;
    }
  }
  return "nearest";
}

std::vector<InstanceCluster> label_clusters(const Observation& obs,
                                            std::string_view label) {
  struct Acc {
    double su = 0.0, sv = 0.0;
    int n = 0;
    double best = std::numeric_limits<double>::infinity();
    PixelPoint rep;
  };
  std::map<std::uint16_t, Acc> acc;
  for (int v = 0; v < obs.height; ++v) {
    for (int u = 0; u < obs.width; ++u) {
      const auto code = obs.code_at(u, v);
      if (code < kCodeObjectBase || obs.label_of(code) != label) continue;
      auto& a = acc[code];
      a.su += u;
      a.sv += v;
      ++a.n;
    }
  }
  for (int v = 0; v < obs.height; ++v) {
    for (int u = 0; u < obs.width; ++u) {
      const auto code = obs.code_at(u, v);
      const auto it = acc.find(code);
      if (it == acc.end() || !obs.depth.valid(u, v)) continue;
      auto& a = it->second;
      const double d = std::hypot(u - a.su / a.n, v - a.sv / a.n);
      if (d < a.best) {
        a.best = d;
        a.rep = {static_cast<double>(u), static_cast<double>(v)};
      }
    }
  }
  std::vector<InstanceCluster> out;
  for (const auto& [code, a] : acc) {
    out.push_back({code, a.n, {a.su / a.n, a.sv / a.n}, a.rep});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.pixel_count > y.pixel_count;
  });
  return out;
}

AmbiguityResult detect_ambiguity(const Observation& obs,
                                 std::string_view goal_label,
                                 std::string_view relation) {
  const auto clusters = label_clusters(obs, goal_label);
  if (clusters.empty()) {
    throw LabelNotVisible("no '" + std::string(goal_label) + "' in view");
  }
  const Relation rel = parse_relation(relation);
  if (clusters.size() == 1 && !rel.metric()) {
    return Unambiguous{clusters.front().representative};
  }
  AmbiguitySignal signal;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < clusters.size() && i < kQdMaxRounds; ++i) {
    const PixelPoint p = clusters[i].representative;
    signal.candidate_pixels.push_back(p);
    double d = 0.0;
    if (obs.depth.lookup(p, d)) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  signal.depth_spread = hi >= lo ? hi - lo : 0.0;
  return signal;
}

std::optional<double> transcript_depth(const std::vector<TranscriptEntry>& t,
                                       const PixelPoint& pixel) {
  for (const auto& e : t) {
    const auto* q = std::get_if<DistanceAtPixel>(&e.query);
    const auto* m = std::get_if<Meters>(&e.answer.payload);
    if (q && m && q->pixel.u == pixel.u && q->pixel.v == pixel.v) return m->value;
  }
  return std::nullopt;
}

std::size_t select_candidate(const std::vector<PixelPoint>& pixels,
                             const std::vector<double>& depths,
                             const Relation& relation) {
  if (pixels.empty() || pixels.size() != depths.size()) {
    throw InvalidArgument("select_candidate needs one depth per pixel");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pixels.size(); ++i) {
    switch (relation.kind) {
      case RelationKind::Nearest:
        if (depths[i] < depths[best]) best = i;
        break;
      case RelationKind::Farthest:
        if (depths[i] > depths[best]) best = i;
        break;
      case RelationKind::LeftOfView:
        if (pixels[i].u < pixels[best].u) best = i;
        break;
      case RelationKind::RightOfView:
        if (pixels[i].u > pixels[best].u) best = i;
        break;
      case RelationKind::ApproxMeters:
        if (std::abs(depths[i] - relation.meters) <
            std::abs(depths[best] - relation.meters)) {
          best = i;
        }
        break;
    }
  }
  if (relation.metric() &&
      !(std::abs(depths[best] - relation.meters) < kRelationTolerance)) {
    throw Undecidable("no candidate within " + std::to_string(kRelationTolerance) +
                      " m of " + to_string(relation));
  }
  return best;
}

PixelPoint resolve(const AmbiguitySignal& signal, std::string_view relation,
                   const PerceptionInvoker& perception, CoTState& state) {
  if (signal.candidate_pixels.empty()) {
    throw InvalidArgument("ambiguity signal without candidates");
  }
  const Relation rel = parse_relation(relation);
  std::vector<PixelPoint> pixels;
  std::vector<double> depths;
  for (const auto& p : signal.candidate_pixels) {
    if (state.round >= kQdMaxRounds) break;
    const PerceptionQuery q = DistanceAtPixel{p};
    PerceptionResult answer = perception(q);
    ++state.round;
    const auto* m = std::get_if<Meters>(&answer.payload);
    state.transcript.push_back({q, answer});
    if (m == nullptr) continue;
    pixels.push_back(p);
    depths.push_back(m->value);
  }
  if (pixels.empty()) throw Undecidable("no candidate could be measured");
  const PixelPoint chosen = pixels[select_candidate(pixels, depths, rel)];
  state.resolved = true;
  state.target = chosen;
  return chosen;
}

nlohmann::json transcript_to_json(const std::vector<TranscriptEntry>& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : t) {
    out.push_back({{"query", query_to_json(e.query)},
                   {"answer", result_to_json(e.answer)}});
  }
  return out;
}

std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& j) {
  std::vector<TranscriptEntry> out;
  for (const auto& e : j) {
    out.push_back({perception_query_from_json(e.at("query")),
                   perception_result_from_json(e.at("answer"))});
  }
  return out;
}

}  // namespace agentvln
