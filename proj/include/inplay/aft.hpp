#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "inplay/covariates.hpp"
#include "inplay/domain.hpp"

namespace inplay {

enum class ScoreState { Leading = 0, Tied = 1, Trailing = 2 };

inline ScoreState score_state(int own, int opponent) {
  if (own > opponent) return ScoreState::Leading;
  if (own == opponent) return ScoreState::Tied;
  return ScoreState::Trailing;
}

enum class ShapeKind { Single, HalfSpecific, ScoreState };

// Weibull shape parameterisation. Unused gamma slots are ignored.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::HalfSpecific;
  std::array<double, 3> gamma{1.0, 1.0, 1.0};

  static ShapeSpec single(double g) { return {ShapeKind::Single, {g, g, g}}; }
  static ShapeSpec half_specific(double first, double second) {
    return {ShapeKind::HalfSpecific, {first, second, second}};
  }
  static ShapeSpec score_state(double leading, double tied, double trailing) {
    return {ShapeKind::ScoreState, {leading, tied, trailing}};
  }

  int size() const;
  int slot(int half, ScoreState state) const;
  double resolve(int half, ScoreState state) const {
    return gamma[static_cast<std::size_t>(slot(half, state))];
  }
  std::vector<std::string> names() const;
  void validate() const;
};

enum class CovariateModel { M0, M1, M2, M3 };

std::string_view to_string(CovariateModel model);
CovariateModel parse_covariate_model(std::string_view text);
/// Deviation statistic a covariate model needs (None for M0/M1).
DeviationMode deviation_mode(CovariateModel model);

struct CovariateCoeffs {
  std::optional<double> red;
  std::optional<double> goals;
  std::optional<double> psxg;

  static CovariateCoeffs zeros(CovariateModel model);
  CovariateModel model() const;
  double dev() const { return goals ? *goals : psxg.value_or(0.0); }
  void validate() const;
};

inline double covariate_effect(const CovariateCoeffs& c,
                               const CovariateValues& x) {
  return c.red.value_or(0.0) * x.red + c.dev() * x.dev;
}

struct EtaPair {
  double home = 0.0;
  double away = 0.0;
};

struct RatingSet {
  double mu = 0.0;
  double beta_home = 0.0;
  std::map<TeamId, double> attack;
  std::map<TeamId, double> defence;
  Date as_of{};
  double decay_xi = 0.0;

  double attack_of(const TeamId& team) const;
  double defence_of(const TeamId& team) const;
  bool has(const TeamId& team) const { return attack.count(team) != 0; }
};

/// Log expected goal-arrival times, eta = mu (+ beta_home) + a + d + beta'x.
EtaPair expected_log_time(const RatingSet& ratings, const TeamId& home,
                          const TeamId& away, const CovariateValues& x_home = {},
                          const CovariateValues& x_away = {},
                          const CovariateCoeffs& coeffs = {});

/// Weibull rate giving mean exp(eta): (Gamma(1 + 1/gamma) e^-eta)^gamma.
template <typename Scalar>
Scalar rate_from_eta(Scalar eta, Scalar gamma) {
  using std::exp;
  using std::lgamma;
  return exp(gamma * (lgamma(Scalar(1) + Scalar(1) / gamma) - eta));
}

/// Mean of S(t) = exp(-lambda t^gamma).
template <typename Scalar>
Scalar weibull_mean(Scalar lambda, Scalar gamma) {
  using std::pow;
  using std::tgamma;
  return pow(lambda, -Scalar(1) / gamma) * tgamma(Scalar(1) + Scalar(1) / gamma);
}

enum class SpellEnd { Goal, Censored };
enum class BoundaryMode { Continuous, Reset };

std::string_view to_string(BoundaryMode mode);

struct EtaSegment {
  double end = 0.0;  // match minute
  double eta = 0.0;
};

// Waiting time of one team for a goal, from the previous goal (or the start
// of the half) until its goal or censoring.
struct GoalSpell {
  Side side = Side::Home;
  double start = 0.0;
  double end = 0.0;
  SpellEnd terminal = SpellEnd::Censored;
  int half = 1;
  ScoreState state = ScoreState::Tied;
  std::vector<EtaSegment> eta_path;  // partitions [start, end]
};

/// Log-likelihood contribution. Censored spells give -H(start, end); goals
/// are interval-censored to [end - censor_width, end].
double spell_log_likelihood(const GoalSpell& spell, const ShapeSpec& shape,
                            double censor_width = 1.0);

struct CovariateSegment {
  double end = 0.0;
  CovariateValues x;
};

// Spell geometry plus covariates, independent of any parameter values.
struct SpellRecord {
  Side side = Side::Home;
  double start = 0.0;
  double end = 0.0;
  SpellEnd terminal = SpellEnd::Censored;
  int half = 1;
  ScoreState state = ScoreState::Tied;
  std::vector<CovariateSegment> segments;
};

/// Splits a match into home and away goal spells. Reset restarts the clock at
/// half-time; Continuous runs one clock through the interval.
std::vector<SpellRecord> build_spells(const MatchTimeline& timeline,
                                      const CovariatePath& path,
                                      BoundaryMode mode);

GoalSpell attach_eta(const SpellRecord& record, double base_eta,
                     const CovariateCoeffs& coeffs);

/// w = exp(-xi * days / 3.5). Throws InvalidDate for matches after as_of.
std::vector<double> decay_weights(std::span<const Date> match_dates, Date as_of,
                                  double xi);

struct Estimate {
  std::string name;
  double value = 0.0;
  std::optional<double> se;
};

struct FitReport {
  std::string label;
  std::vector<Estimate> estimates;
  double loglik = 0.0;
  int k = 0;
  long n_obs = 0;
  double bic = 0.0;
  std::vector<std::pair<std::string, double>> lrt_p;  // "M0->M1" -> p
  std::vector<std::string> warnings;
  bool converged = false;
  int iterations = 0;

  const Estimate* find(std::string_view name) const;
};

inline double bic(int k, long n_obs, double loglik) {
  return k * std::log(static_cast<double>(n_obs)) - 2.0 * loglik;
}

struct FitOptions {
  BoundaryMode boundary = BoundaryMode::Reset;
  double censor_width = 1.0;
  int max_iterations = 1000;
  bool weighted_stage2 = false;
  bool standard_errors = true;
};

struct RatingsFit {
  RatingSet ratings;
  ShapeSpec shape;
  CovariateCoeffs coeffs;
  FitReport report;
};

/// Stage one: decay-weighted MLE of (mu, beta_home, a, d, shape[, beta]).
/// Sum-to-zero holds by writing the last team's a and d as minus the sum of
/// the others. `paths` is either empty (no covariates) or one per match.
RatingsFit fit_team_ratings(std::span<const MatchTimeline> matches,
                            std::span<const CovariatePath> paths, Date as_of,
                            double xi, const ShapeSpec& shape_init,
                            CovariateModel covariates = CovariateModel::M0,
                            const FitOptions& options = {});

struct ShapeFit {
  ShapeSpec shape;
  CovariateCoeffs coeffs;
  FitReport report;
};

/// Stage two: joint MLE of shape and covariate coefficients with ratings held
/// fixed. When `nested` is given its LRT p-value is recorded in the report.
ShapeFit fit_shape_and_covariates(std::span<const MatchTimeline> matches,
                                  std::span<const CovariatePath> paths,
                                  const RatingSet& ratings,
                                  CovariateModel spec,
                                  const ShapeSpec& shape_init,
                                  const FitOptions& options = {},
                                  const FitReport* nested = nullptr);

/// Upper tail of the chi-square distribution.
double lrt_p_value(double statistic, int df);

struct ComparisonRow {
  std::string label;
  int k = 0;
  double loglik = 0.0;
  double bic = 0.0;
  double delta_bic = 0.0;
  std::optional<double> lrt_p;
};

/// Delta-BIC against reports[baseline]; chi-square LRT for each
/// (restricted, full) pair. Throws IncomparableFits on differing n_obs.
std::vector<ComparisonRow> compare_models(
    std::span<const FitReport> reports, std::size_t baseline = 0,
    std::span<const std::pair<std::size_t, std::size_t>> nested = {});

}  // namespace inplay
