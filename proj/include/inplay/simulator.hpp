#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "inplay/aft.hpp"
#include "inplay/covariates.hpp"
#include "inplay/domain.hpp"
#include "inplay/rng.hpp"

namespace inplay {

struct MatchState {
  double minute = 0.0;
  int home_goals = 0;
  int away_goals = 0;
  double elapsed = 0.0;  // minutes since the last goal or kickoff
  int half = 1;
  CovariateValues x_home;
  CovariateValues x_away;

  void validate() const;
};

/// State of a recorded match just before `minute`: events at that minute are
/// not yet visible. Covariates come from `path`.
MatchState state_at(const MatchTimeline& timeline, const CovariatePath& path,
                    double minute);

struct MatchDurations {
  double first_half_end = 45.0;
  double full_time = 90.0;
};

struct SimConfig {
  int n_paths = 10000;
  std::uint64_t seed = 0;
  double stoppage1 = 3.1;
  double stoppage2 = 6.2;
  std::optional<MatchDurations> oracle;  // true durations instead of means

  MatchDurations durations() const;
  void validate() const;
};

/// Draw of T - s given T > s for S(t) = exp(-lambda t^gamma), by inversion of
/// the uniform u in (0, 1].
double conditional_weibull_sample(double gamma, double lambda, double s, double u);

// Per-team hazard, indexed by the team's score state at spell start.
struct TeamHazard {
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
  std::array<double, 3> lambda{0.0, 0.0, 0.0};

  static TeamHazard constant(double gamma, double lambda) {
    return {{gamma, gamma, gamma}, {lambda, lambda, lambda}};
  }
};

struct Score {
  int home = 0;
  int away = 0;
};

/// Competing-risks goal simulation over t_rem minutes. Ties go to home.
Score simulate_half(Score score, double s, const TeamHazard& home,
                    const TeamHazard& away, double t_rem, PathRng& rng);

inline Score simulate_half(Score score, double s, double gamma, double lambda_h,
                           double lambda_a, double t_rem, PathRng& rng) {
  return simulate_half(score, s, TeamHazard::constant(gamma, lambda_h),
                       TeamHazard::constant(gamma, lambda_a), t_rem, rng);
}

struct SimForecast {
  ForecastTriple probs;
  std::array<double, 6> total_goals{};  // P(0), ..., P(4), P(5 or more)
  std::array<double, 5> over{};         // P(total > g), g in kGoalThresholds
};

/// Monte Carlo match completion from `state`. Covariates are frozen at their
/// state values and folded into eta by the caller.
SimForecast forecast(const MatchState& state, const EtaPair& eta,
                     const ShapeSpec& shape, const SimConfig& cfg);

struct GeneratorConfig {
  double stoppage1 = 3.1;  // Poisson means
  double stoppage2 = 6.2;
  double red_rate = 0.0;   // per team per minute
  double shot_rate = 0.0;  // per team per minute
  double on_target = 0.33;
  double psxg_mean = 0.3;  // mean PSxG of an on-target shot
  LinearBaseline psxg_baseline;
  LinearBaseline goals_baseline;
  double time_resolution = 1.0 / 60.0;  // event times rounded up to this
};

/// Simulates a full match from kickoff under the AFT model. The deviation
/// covariate (goals or PSxG) follows `coeffs`.
MatchTimeline generate_match(const RatingSet& ratings, const ShapeSpec& shape,
                             const CovariateCoeffs& coeffs, const TeamId& home,
                             const TeamId& away, const GeneratorConfig& cfg,
                             PathRng& rng);

}  // namespace inplay
