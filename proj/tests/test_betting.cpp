#include <doctest.h>

#include "inplay/betting.hpp"

using namespace inplay;

TEST_CASE("kelly fraction") {
  CHECK(kelly_fraction(0.5, 2.2) == doctest::Approx(1.0 / 12.0));
  CHECK(kelly_fraction(0.5, 2.0) == 0.0);
  CHECK(kelly_fraction(1.0, 3.0) == 1.0);
  CHECK(kelly_fraction(0.1, 2.0) == 0.0);
  CHECK_THROWS_AS(kelly_fraction(0.5, 1.0), Error);
}

TEST_CASE("bet selection") {
  const ForecastTriple market{0.5, 0.3, 0.2};
  CHECK(place_bets(market, market, StakeMode::Unit, 0.0).empty());
  CHECK(place_bets(market, market, StakeMode::Kelly, 0.0).empty());

  const auto unit = place_bets({0.6, 0.25, 0.15}, market, StakeMode::Unit, 0.0);
  REQUIRE(unit.size() == 1);
  CHECK(unit[0].outcome == Outcome::Home);
  CHECK(unit[0].odds == doctest::Approx(2.0));
  CHECK(unit[0].ev == doctest::Approx(0.2));
  CHECK(unit[0].stake == 1.0);

  CHECK(place_bets({0.6, 0.25, 0.15}, market, StakeMode::Unit, 0.25).empty());

  const auto kelly = place_bets({0.55, 0.35, 0.10}, market, StakeMode::Kelly, 0.0);
  REQUIRE(kelly.size() == 2);
  CHECK(kelly[0].outcome == Outcome::Home);
  CHECK(kelly[1].outcome == Outcome::Draw);
  CHECK(kelly[0].stake == doctest::Approx(kelly_fraction(0.55, 2.0)));
}

TEST_CASE("settlement with commission on net winnings") {
  std::vector<BetRecord> win{{"m", 0, Outcome::Home, 1.0, 2.0}};
  CHECK(settle(win, Outcome::Home, 0.02) == doctest::Approx(0.98));
  CHECK(win[0].won);
  std::vector<BetRecord> lose{{"m", 0, Outcome::Home, 1.0, 2.0}};
  CHECK(settle(lose, Outcome::Away, 0.02) == -1.0);
  std::vector<BetRecord> offset{{"m", 0, Outcome::Home, 1.0, 2.0},
                                {"m", 1, Outcome::Away, 1.0, 2.0}};
  CHECK(settle(offset, Outcome::Home, 0.02) == 0.0);
}

TEST_CASE("backtest against the market itself places nothing") {
  std::vector<BacktestMatch> matches;
  for (int i = 0; i < 5; ++i) {
    BacktestMatch m{"m" + std::to_string(i), Outcome::Home, {30.0}, {}};
    for (int t = 0; t < 90; ++t) {
      const ForecastTriple q{0.4 + 0.001 * t, 0.3, 0.3 - 0.001 * t};
      m.points.push_back({t, q, q});
    }
    matches.push_back(m);
  }
  for (StakeMode mode : {StakeMode::Unit, StakeMode::Kelly}) {
    BettingConfig cfg;
    cfg.mode = mode;
    const auto r = run_backtest(matches, cfg);
    CHECK(r.bets == 0);
    CHECK(r.net_profit == 0.0);
    CHECK(r.staked == 0.0);
  }
}

TEST_CASE("goal window split and sweep") {
  BacktestMatch m{"m", Outcome::Home, {20.0}, {}};
  for (int t = 0; t < 40; ++t) m.points.push_back({t, {0.6, 0.2, 0.2}, ForecastTriple{0.5, 0.25, 0.25}});
  BettingConfig cfg;
  cfg.mode = StakeMode::Unit;
  const auto r = run_backtest(std::vector<BacktestMatch>{m}, cfg);
  CHECK(r.bets == 40);
  // Minutes 21..25 have the goal in [M - 5, M).
  CHECK(r.in_window.bets == 5);
  CHECK(r.outside_window.bets == 35);
  CHECK(r.net_profit == doctest::Approx(40 * 0.98));
  CHECK(r.ev_sweep.front().bets == 40);
  CHECK(r.ev_sweep.back().bets == 0);
}
