#include "inplay/betting.hpp"

#include <algorithm>
#include <cmath>

namespace inplay {

double kelly_fraction(double p, double odds) {
  if (!(odds > 1.0)) throw Error(ErrorCode::InvalidOdds, "decimal odds must exceed 1");
  const double b = odds - 1.0;
  return std::max(0.0, (b * p - (1.0 - p)) / b);
}

std::vector<BetRecord> place_bets(const ForecastTriple& model,
                                  const ForecastTriple& market, StakeMode mode,
                                  double ev_threshold) {
  std::vector<BetRecord> bets;
  auto make = [&](Outcome o) {
    BetRecord b;
    b.outcome = o;
    b.p = model[o];
    b.q = market[o];
    b.odds = 1.0 / b.q;
    b.ev = b.p * b.odds - 1.0;
    return b;
  };
  const Outcome all[] = {Outcome::Home, Outcome::Draw, Outcome::Away};
  if (mode == StakeMode::Unit) {
    std::optional<Outcome> best;
    double edge = 0.0;
    for (Outcome o : all) {
      if (!(market[o] > 0.0)) continue;
      const double d = model[o] - market[o];
      if (d > edge) {
        edge = d;
        best = o;
      }
    }
    if (!best) return bets;
    BetRecord b = make(*best);
    if (b.ev > kEvTolerance && b.ev >= ev_threshold) {
      b.stake = 1.0;
      bets.push_back(b);
    }
    return bets;
  }
  for (Outcome o : all) {
    if (!(market[o] > 0.0) || market[o] >= 1.0) continue;
    BetRecord b = make(o);
    if (!(b.ev > kEvTolerance) || b.ev < ev_threshold) continue;
    b.stake = kelly_fraction(b.p, b.odds);
    if (b.stake > 0.0) bets.push_back(b);
  }
  return bets;
}

double settle(std::span<BetRecord> bets, Outcome result, double commission_rate) {
  double gross = 0.0;
  for (auto& b : bets) {
    b.won = b.outcome == result;
    b.settled = b.won ? b.stake * (b.odds - 1.0) : -b.stake;
    gross += b.settled;
  }
  return gross - commission_rate * std::max(gross, 0.0);
}

namespace {

bool goal_in_window(const BacktestMatch& m, int minute, double window) {
  return std::any_of(m.goal_minutes.begin(), m.goal_minutes.end(), [&](double g) {
    return g >= minute - window && g < minute;
  });
}

struct Pass {
  std::vector<BetRecord> records;
  std::vector<double> match_net;
};

Pass run_pass(std::span<const BacktestMatch> matches, const BettingConfig& cfg,
              double threshold) {
  Pass pass;
  for (const auto& m : matches) {
    std::vector<BetRecord> bets;
    for (const auto& pt : m.points) {
      if (!pt.market) continue;
      for (auto& b : place_bets(pt.model, *pt.market, cfg.mode, threshold)) {
        b.match_id = m.match_id;
        b.minute = pt.minute;
        b.in_goal_window = goal_in_window(m, pt.minute, cfg.goal_window);
        bets.push_back(b);
      }
    }
    pass.match_net.push_back(settle(bets, m.result, cfg.commission));
    pass.records.insert(pass.records.end(), bets.begin(), bets.end());
  }
  return pass;
}

double total_stake(const std::vector<BetRecord>& r) {
  double s = 0.0;
  for (const auto& b : r) s += b.stake;
  return s;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

BettingReport run_backtest(std::span<const BacktestMatch> matches,
                           const BettingConfig& config) {
  BettingReport rep;
  Pass main = run_pass(matches, config, config.ev_threshold);
  rep.bets = static_cast<long>(main.records.size());
  rep.staked = total_stake(main.records);
  rep.net_profit = sum(main.match_net);
  rep.roi_pct = rep.staked > 0.0 ? 100.0 * rep.net_profit / rep.staked : 0.0;
  long wins = 0;
  for (const auto& b : main.records) wins += b.won ? 1 : 0;
  rep.win_pct = rep.bets > 0 ? 100.0 * wins / rep.bets : 0.0;

  const std::size_t n = main.match_net.size();
  if (n >= 2) {
    const double mean = rep.net_profit / n;
    double ss = 0.0;
    for (double x : main.match_net) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1));
    rep.sharpe = sd > 0.0 ? mean / sd * std::sqrt(static_cast<double>(n)) : 0.0;
  }

  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum += main.match_net[i];
    rep.pnl_curve.push_back({matches[i].match_id, main.match_net[i], cum});
  }

  for (const auto& b : main.records) {
    WindowSplit& w = b.in_goal_window ? rep.in_window : rep.outside_window;
    ++w.bets;
    w.staked += b.stake;
    w.gross += b.settled;
  }
  for (WindowSplit* w : {&rep.in_window, &rep.outside_window})
    w->gross_roi_pct = w->staked > 0.0 ? 100.0 * w->gross / w->staked : 0.0;

  for (double t : config.sweep) {
    Pass p = run_pass(matches, config, t);
    SweepRow row;
    row.threshold = t;
    row.bets = static_cast<long>(p.records.size());
    row.staked = total_stake(p.records);
    row.net_profit = sum(p.match_net);
    row.roi_pct = row.staked > 0.0 ? 100.0 * row.net_profit / row.staked : 0.0;
    rep.ev_sweep.push_back(row);
  }
  rep.records = std::move(main.records);
  return rep;
}

}  // namespace inplay
