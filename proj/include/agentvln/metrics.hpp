#pragma once

// Episode metrics and suite aggregation.

#include <string>
#include <vector>

#include "agentvln/agent.hpp"
#include "agentvln/world.hpp"

namespace agentvln {

// ne in meters; the rest are fractions in [0, 1].
struct MetricReport {
  double ne = 0.0;
  double os = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;

  bool operator==(const MetricReport&) const = default;
};

double path_length(const std::vector<Point2>& path);
// Classic dynamic time warping with euclidean ground distance.
double dtw(const std::vector<Point2>& a, const std::vector<Point2>& b);
double ndtw(const std::vector<Point2>& path, const std::vector<Point2>& reference,
            double success_radius);

// Shortest collision-free route start -> goal, resampled every `spacing`
// meters so it matches the density of a fine-step path.
std::vector<Point2> reference_path(const Scene& scene, const Episode& episode,
                                   double spacing = kForwardStep);

// `path` lists every visited position, start first.
MetricReport compute(const std::vector<Point2>& path, bool stopped,
                     const Episode& episode,
                     const std::vector<Point2>& reference);
MetricReport compute(const TrajectoryLog& trajectory, const Episode& episode,
                     const std::vector<Point2>& reference);

MetricReport aggregate(const std::vector<MetricReport>& reports);

// "NE,OS,SR,SPL,nDTW"
std::string metrics_header();
// NE in meters with two decimals, rates as percentages with one decimal.
std::string metrics_row(const MetricReport& r);

}  // namespace agentvln
