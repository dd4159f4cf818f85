#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "inplay/calibration.hpp"
#include "inplay/covariates.hpp"
#include "inplay/domain.hpp"
#include "inplay/optimize.hpp"
#include "inplay/rng.hpp"
#include "inplay/simulator.hpp"

namespace inplay {

// Poisson regression for added time given the half's events.
struct StoppageModel {
  double intercept = 0.0;
  double red = 0.0;
  double goals = 0.0;
  double close = 0.0;  // |goal difference| <= 1 at the end of normal time

  double mean(int reds, int goals_in_half, bool close_match) const;
};

// Log composite scoring rates log(alpha_H beta_A e^delta), log(alpha_A beta_H).
struct MaiaComposite {
  double home = 0.0;
  double away = 0.0;
};

struct MaiaParams {
  double intercept = 0.0;
  double home = 0.0;  // delta
  std::map<TeamId, double> attack;   // log alpha relative to the intercept
  std::map<TeamId, double> defence;  // log beta
  double xi_half = 0.0;
  double xi_gd = 0.0;
  double xi_rc = 0.0;
  double xi_psxg = 0.0;
  double red_scale = 0.0;  // per-team red-card intensity a t^b
  double red_power = 0.0;
  StoppageModel stoppage1;
  StoppageModel stoppage2;
  LinearBaseline psxg_baseline;
  std::vector<std::string> warnings;

  double alpha(const TeamId& team) const;
  double beta(const TeamId& team) const;
  MaiaComposite composite(const TeamId& home_team, const TeamId& away_team) const;
};

struct MaiaState {
  double minute = 0.0;
  int half = 1;
  int home_goals = 0;
  int away_goals = 0;
  int home_reds = 0;
  int away_reds = 0;
  int half_goals = 0;  // in the current half
  int half_reds = 0;
  double psxg_home = 0.0;  // deviation covariates, frozen when forecasting
  double psxg_away = 0.0;
};

/// State strictly before `minute`.
MaiaState maia_state(const MatchTimeline& timeline, const CovariatePath& path,
                     double minute);

double maia_intensity(const MaiaState& state, const MaiaParams& params, Side side,
                      const MaiaComposite& composite);

/// Goal, red-card and stoppage processes fitted to the training matches.
MaiaParams maia_fit(std::span<const MatchTimeline> training, bool use_psxg = true);

/// Thinning simulation of goals and red cards with simulated added time.
/// cfg.oracle, when set, replaces the stoppage draws.
SimForecast maia_forecast(const MaiaState& state, const MaiaComposite& composite,
                          const MaiaParams& params, const SimConfig& cfg);

struct MaiaCalibration {
  MaiaComposite composite;
  double loss = 0.0;
  int iterations = 0;
  bool poor_fit = false;
};

MaiaCalibration maia_calibrate(const CalibrationTarget& target,
                               const MaiaComposite& init, const MaiaParams& params,
                               const SimConfig& cfg,
                               const PowellOptions& options = {});

/// Full synthetic match from the fitted processes (no shots).
MatchTimeline maia_generate_match(const MaiaParams& params, const TeamId& home,
                                  const TeamId& away, PathRng& rng);

}  // namespace inplay
