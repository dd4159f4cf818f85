#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inplay/domain.hpp"

namespace inplay {

/// Ranked probability score over the ordered outcomes (home, draw, away).
double rps(const ForecastTriple& forecast, Outcome outcome);

inline constexpr double kLogLossFloor = 1e-12;

/// -ln p_y with p_y floored at 1e-12.
double log_loss(const ForecastTriple& forecast, Outcome outcome);

struct EvaluationPoint {
  std::string match_id;
  int minute = 0;
  std::string model;
  ForecastTriple forecast;
  Outcome outcome = Outcome::Draw;
};

struct MinuteMetric {
  int minute = 0;
  long n = 0;
  double accuracy = 0.0;
  double rps = 0.0;
  double log_loss = 0.0;
  std::optional<double> delta_log_loss;  // model minus benchmark
  std::optional<double> delta_rps;
};

struct MetricReport {
  std::string model;
  long n_points = 0;
  double accuracy = 0.0;
  double rps = 0.0;
  double log_loss = 0.0;
  std::vector<MinuteMetric> per_minute;
};

/// One report per model, in order of first appearance. Every point is
/// weighted equally. With a benchmark, each model must cover exactly the
/// benchmark's (match, minute) grid; otherwise an AlignmentError lists the
/// missing points.
std::vector<MetricReport> evaluate(std::span<const EvaluationPoint> points,
                                   const std::optional<std::string>& benchmark = std::nullopt);

}  // namespace inplay
