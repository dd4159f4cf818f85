#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inplay/betting.hpp"
#include "inplay/dataset.hpp"
#include "inplay/evaluation.hpp"
#include "inplay/serialize.hpp"

namespace inplay {

struct StoppageConfig {
  double first = 3.1;
  double second = 6.2;
  bool from_training = false;  // recompute from the last `window` training matches
  int window = 240;
  bool oracle = false;  // use each match's true durations
};

struct RunConfig {
  std::string events_csv;
  std::string odds_csv;
  std::string ou_csv;
  std::vector<std::string> models{"weibull", "betfair"};  // weibull|zou|maia|betfair
  CovariateModel covariates = CovariateModel::M3;
  bool calibrate = true;
  ShapeSpec shape = ShapeSpec::half_specific(1.0, 1.0);
  double xi = 0.0065;
  double censor_width = 1.0;
  int n_paths = 10000;
  StoppageConfig stoppage;
  int lag = 2;
  double commission = 0.02;
  double ev_threshold = 0.0;
  std::vector<StakeMode> stake_modes{StakeMode::Unit, StakeMode::Kelly};
  std::uint64_t seed = 0;
  int eval_from_gameweek = 25;
  std::optional<std::string> eval_season;
  bool refit_each_gameweek = true;
  int max_eval_matches = 0;  // 0 = all
};

/// Parses and validates a configuration document. Unknown keys and a missing
/// seed raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// The published JSON schema for configuration documents.
const nlohmann::json& config_schema();

struct Split {
  std::vector<const MatchTimeline*> evaluation;
  std::map<int, Date> gameweek_cutoff;  // first kickoff of each evaluation gameweek
};

Split split_dataset(const Dataset& dataset, const RunConfig& cfg);

/// Matches dated strictly before `cutoff`.
std::vector<MatchTimeline> training_before(const Dataset& dataset, Date cutoff);

/// Stage one (M0 ratings, decay-weighted) then stage two (shape and
/// covariates) on the training matches.
WeibullModel fit_weibull(std::span<const MatchTimeline> training, Date as_of,
                         const RunConfig& cfg);

/// Stage-one ratings, then a stage-two fit of each of M0..M3 on the same
/// spells. Reports come back in that order with LRT p-values against the
/// nested model (M0 for M1, M1 for M2 and M3).
std::vector<FitReport> covariate_model_reports(std::span<const MatchTimeline> training,
                                               Date as_of, const RunConfig& cfg);

/// One Weibull fit per evaluation gameweek from data before its cutoff.
std::map<int, WeibullModel> rolling_refit(const Dataset& dataset, const RunConfig& cfg);

/// Gives teams without history zero attack and defence.
void ensure_team(RatingSet& ratings, const TeamId& team, std::vector<std::string>& warnings);

struct ManifestEntry {
  std::string stage;
  std::string code;
  std::string message;
  std::string match_id;
};

struct ExperimentResult {
  std::vector<EvaluationPoint> points;
  std::vector<MetricReport> metrics;
  std::vector<std::pair<std::string, BettingReport>> betting;  // "model/mode"
  std::vector<ManifestEntry> errors;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
};

/// Fits, calibrates, forecasts every evaluation minute, evaluates and backtests.
/// Writes CSV artefacts and manifest.json to out_dir (when non-empty).
ExperimentResult run_experiment(const RunConfig& cfg, const Dataset& dataset,
                                const std::filesystem::path& out_dir,
                                bool run_betting = true);

struct SynthConfig {
  int n_teams = 20;
  int seasons = 1;
  double mu = 4.09;
  double beta_home = -0.12;
  double team_sd = 0.2;
  ShapeSpec shape = ShapeSpec::half_specific(1.0, 1.1);
  CovariateCoeffs coeffs = {-0.4, std::nullopt, -0.5};
  double red_rate = 0.0008;
  double shot_rate = 0.13;
  double on_target = 0.33;
  double psxg_mean = 0.3;
  double time_resolution = 1.0 / 60.0;
  double overround = 1.03;
  int market_paths = 400;  // 0 = no market files
  std::string start_date = "2024-08-17";
  std::uint64_t seed = 1;
};

struct SynthResult {
  Dataset dataset;
  WeibullModel truth;
};

/// Double round-robin seasons simulated from the AFT model, with exchange
/// prices derived from the true model plus a margin.
SynthResult synthesize(const SynthConfig& cfg);

}  // namespace inplay
