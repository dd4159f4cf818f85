#pragma once

#include <span>
#include <vector>

#include "inplay/domain.hpp"

namespace inplay {

// Per-team in-play covariates entering the log expected goal time.
struct CovariateValues {
  double red = 0.0;  // opponent red cards minus own (positive = extra player)
  double dev = 0.0;  // cumulative PSxG (or goals) minus the population baseline
};

// Population-mean trajectory of a cumulative per-team statistic.
struct LinearBaseline {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;

  double at(double minute) const { return intercept + slope * minute; }
};

using PsxgBaseline = LinearBaseline;

enum class DeviationMode { None, Psxg, Goals };

struct CovariatePoint {
  double minute = 0.0;
  CovariateValues home;
  CovariateValues away;

  const CovariateValues& of(Side side) const {
    return side == Side::Home ? home : away;
  }
};

// Right-continuous piecewise-constant covariates. The first point is at
// minute 0; later points sit at event minutes only.
struct CovariatePath {
  DeviationMode mode = DeviationMode::None;
  std::vector<CovariatePoint> points;

  /// Value including events at exactly `minute`.
  const CovariateValues& at(double minute, Side side) const;
  /// Left limit: only events strictly before `minute`.
  const CovariateValues& before(double minute, Side side) const;
};

/// Sum of the team's shot PSxG with minute <= t. No decay or windowing.
double cumulative_psxg(const MatchTimeline& timeline, const TeamId& team,
                       double t);
double cumulative_goals(const MatchTimeline& timeline, const TeamId& team,
                        double t);

/// OLS of cumulative PSxG on minute, sampled at integer minutes 0..90 and
/// pooled over every team-match. Throws DegenerateBaseline without shot data.
LinearBaseline fit_psxg_baseline(std::span<const MatchTimeline> training);

/// Same construction applied to cumulative goals.
LinearBaseline fit_goals_baseline(std::span<const MatchTimeline> training);

CovariatePath covariate_path(const MatchTimeline& timeline,
                             const LinearBaseline& baseline,
                             DeviationMode mode);

/// Path with every covariate zero (the M0 reduction).
CovariatePath zero_path();

}  // namespace inplay
