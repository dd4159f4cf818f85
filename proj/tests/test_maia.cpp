#include <doctest.h>

#include <cmath>

#include "inplay/maia.hpp"
#include "oracle.hpp"

using namespace inplay;

namespace {

MaiaParams truth_params() {
  MaiaParams p;
  p.intercept = std::log(0.0165);
  p.home = 0.12;
  for (int i = 0; i < 10; ++i) {
    const std::string t = "T" + std::to_string(i);
    p.attack[t] = 0.04 * (i - 4.5);
    p.defence[t] = -0.03 * (i - 4.5);
  }
  p.xi_half = 0.15;
  p.xi_gd = -0.12;
  p.xi_rc = 0.4;
  p.red_scale = 0.0004;
  p.red_power = 0.8;
  p.stoppage1.intercept = std::log(2.5);
  p.stoppage2.intercept = std::log(5.0);
  return p;
}

}  // namespace

TEST_CASE("composite intensity") {
  const MaiaParams p = truth_params();
  const MaiaComposite c = p.composite("T1", "T2");
  CHECK(std::exp(c.home) == doctest::Approx(p.alpha("T1") * p.beta("T2") * std::exp(p.home)));
  CHECK(maia_intensity(MaiaState{}, p, Side::Home, c) == doctest::Approx(std::exp(c.home)));

  MaiaState red;
  red.home_reds = 1;
  const double drop = 1.0 - maia_intensity(red, p, Side::Home, c) / std::exp(c.home);
  CHECK(drop == doctest::Approx(1.0 - std::exp(-0.4)));
  MaiaState behind;
  behind.away_goals = 1;
  CHECK(maia_intensity(behind, p, Side::Home, c) / std::exp(c.home) ==
        doctest::Approx(std::exp(0.12)));
}

TEST_CASE("constant rates match the Poisson oracle") {
  MaiaParams p;
  p.attack = {{"H", 0.0}, {"A", 0.0}};
  p.defence = p.attack;
  const MaiaComposite c{std::log(0.019), std::log(0.016)};
  SimConfig cfg;
  cfg.n_paths = 100000;
  cfg.seed = 4;
  cfg.oracle = MatchDurations{47.0, 96.0};
  const SimForecast f = maia_forecast(MaiaState{}, c, p, cfg);
  const auto q = oracle::poisson_outcome(96.0 * 0.019, 96.0 * 0.016);
  CHECK(std::abs(f.probs.home - q[0]) < 0.01);
  CHECK(std::abs(f.probs.draw - q[1]) < 0.01);

  MaiaState end;
  end.minute = 96.0;
  end.half = 2;
  end.away_goals = 1;
  CHECK(maia_forecast(end, c, p, cfg).probs.away == 1.0);
}

TEST_CASE("fit recovers the generating processes") {
  const MaiaParams truth = truth_params();
  std::vector<MatchTimeline> matches;
  int id = 0;
  for (int season = 0; season < 8; ++season)
    for (const auto& [h, ah] : truth.attack)
      for (const auto& [a, aa] : truth.attack) {
        if (h == a) continue;
        PathRng rng(31, static_cast<std::uint64_t>(id));
        MatchTimeline m = maia_generate_match(truth, h, a, rng);
        m.match_id = "m" + std::to_string(id++);
        matches.push_back(std::move(m));
      }
  const MaiaParams fit = maia_fit(matches, false);
  INFO("xi_half " << fit.xi_half << " xi_gd " << fit.xi_gd << " xi_rc " << fit.xi_rc);
  CHECK(std::abs(fit.xi_half - truth.xi_half) < 0.1);
  CHECK(std::abs(fit.xi_gd - truth.xi_gd) < 0.1);
  CHECK(std::abs(fit.home - truth.home) < 0.1);
  CHECK(std::abs(fit.red_power - truth.red_power) < 0.3);
  CHECK(std::abs(std::exp(fit.stoppage1.intercept) - 2.5) < 0.15);
  CHECK(std::abs(std::exp(fit.stoppage2.intercept) - 5.0) < 0.25);
  CHECK(std::abs(fit.stoppage1.red) < 0.3);
}
