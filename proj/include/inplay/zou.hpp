#pragma once

#include <array>
#include <span>
#include <vector>

#include "inplay/calibration.hpp"
#include "inplay/domain.hpp"
#include "inplay/intensity_fit.hpp"
#include "inplay/optimize.hpp"

namespace inplay {

// Birth-process model on a nominal 90-minute clock. Stoppage is folded into
// nominal minutes [44, 45] and [89, 90], whose rates are scaled by 1 + U.
struct ZouParams {
  double theta01 = 0.0;  // home goals per minute, first half, tied
  double theta02 = 0.0;  // away
  std::array<double, 3> state_mult{1.0, 1.0, 1.0};  // leading, tied, trailing
  double half2_mult = 1.0;
  double stoppage1 = 3.1;
  double stoppage2 = 6.2;

  /// Prior strengths: expected goals by half-time under the tied prior.
  double r1() const { return theta01 * (45.0 + stoppage1); }
  double r2() const { return theta02 * (45.0 + stoppage1); }
  /// Rate multiplier at nominal minute n for a team in `state`.
  double multiplier(double nominal, ScoreState state) const;
  void validate() const;
};

struct ZouState {
  double nominal = 0.0;  // nominal minute in [0, 90]
  int home_goals = 0;
  int away_goals = 0;
  double exposure_home = 0.0;  // integral of the home multiplier so far
  double exposure_away = 0.0;
};

double zou_nominal_minute(double minute, int half, const ZouParams& params);

/// State strictly before `minute`, with prior exposures along the observed
/// score path.
ZouState zou_state(const MatchTimeline& timeline, double minute,
                   const ZouParams& params);

/// (r + X) / (r + E) * theta0.
double zou_posterior_update(double theta0, double r, double goals,
                            double expected);

struct ZouForecast {
  ForecastTriple probs;
  std::array<double, 5> over{};
  double overflow = 0.0;  // mass beyond the lattice cap
  int cap = 15;
};

/// Exact forward propagation of the score lattice by uniformisation.
ZouForecast zou_outcome_probs(const ZouState& state, const ZouParams& params);

struct ZouModel {
  IntensityFit intensity;
  ZouParams shared;  // multipliers and stoppage; theta fields unused

  ZouParams for_match(const TeamId& home, const TeamId& away) const;
};

/// Piecewise-constant Poisson regression of goal rates on home, half and
/// lead/trail indicators; stoppage means from the same matches.
ZouModel zou_fit(std::span<const MatchTimeline> training);

struct ZouCalibration {
  ZouParams params;
  double loss = 0.0;
  int iterations = 0;
  bool poor_fit = false;
};

/// Fits (theta01, theta02) to a kickoff target with the exact objective.
ZouCalibration zou_calibrate(const CalibrationTarget& target,
                             const ZouParams& init,
                             const PowellOptions& options = {1e-14, 200, 0.1, 1e-9});

}  // namespace inplay
