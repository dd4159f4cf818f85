#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inplay/domain.hpp"

namespace inplay {

/// (b p - q) / b with b = odds - 1, clipped below at zero.
double kelly_fraction(double p, double odds);

enum class StakeMode { Unit, Kelly };

struct BetRecord {
  std::string match_id;
  int minute = 0;
  Outcome outcome = Outcome::Home;
  double stake = 0.0;
  double odds = 0.0;
  double p = 0.0;  // model probability
  double q = 0.0;  // market probability
  double ev = 0.0;
  double settled = 0.0;  // stake (odds - 1) if won, -stake otherwise
  bool won = false;
  bool in_goal_window = false;
};

inline constexpr double kEvTolerance = 1e-12;

/// Bets against market probabilities q at odds 1/q. Unit mode backs the
/// single outcome maximising p - q among p > q; Kelly mode backs every
/// positive-EV outcome. Both keep only bets with EV >= ev_threshold.
std::vector<BetRecord> place_bets(const ForecastTriple& model,
                                  const ForecastTriple& market, StakeMode mode,
                                  double ev_threshold);

/// Net P&L of one match: gross minus commission on positive gross. Fills
/// each bet's `won` and `settled` fields.
double settle(std::span<BetRecord> bets, Outcome result, double commission_rate);

struct BacktestPoint {
  int minute = 0;
  ForecastTriple model;
  std::optional<ForecastTriple> market;  // lagged; absent points are skipped
};

struct BacktestMatch {
  std::string match_id;
  Outcome result = Outcome::Draw;
  std::vector<double> goal_minutes;
  std::vector<BacktestPoint> points;
};

struct BettingConfig {
  StakeMode mode = StakeMode::Kelly;
  double ev_threshold = 0.0;
  double commission = 0.02;
  double goal_window = 5.0;  // minutes before the evaluation minute
  std::vector<double> sweep{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
};

struct PnlPoint {
  std::string match_id;
  double net = 0.0;
  double cumulative = 0.0;
};

struct SweepRow {
  double threshold = 0.0;
  long bets = 0;
  double staked = 0.0;
  double net_profit = 0.0;
  double roi_pct = 0.0;
};

struct WindowSplit {
  long bets = 0;
  double staked = 0.0;
  double gross = 0.0;
  double gross_roi_pct = 0.0;
};

struct BettingReport {
  long bets = 0;
  double win_pct = 0.0;
  double staked = 0.0;
  double net_profit = 0.0;
  double roi_pct = 0.0;
  double sharpe = 0.0;  // mean / sd of per-match net, times sqrt(matches)
  std::vector<BetRecord> records;
  std::vector<PnlPoint> pnl_curve;
  std::vector<SweepRow> ev_sweep;
  WindowSplit in_window;
  WindowSplit outside_window;
};

BettingReport run_backtest(std::span<const BacktestMatch> matches,
                           const BettingConfig& config);

}  // namespace inplay
