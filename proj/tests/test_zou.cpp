#include <doctest.h>

#include <cmath>

#include "inplay/zou.hpp"
#include "oracle.hpp"

using namespace inplay;

namespace {

ZouParams flat(double th, double ta) {
  ZouParams p;
  p.theta01 = th;
  p.theta02 = ta;
  p.stoppage1 = 0.0;
  p.stoppage2 = 0.0;
  return p;
}

}  // namespace

TEST_CASE("posterior rate updates") {
  const double theta0 = 0.015;
  const double r = theta0 * 48.1;
  CHECK(zou_posterior_update(theta0, r, 0.0, r) == doctest::Approx(0.5 * theta0));
  CHECK(zou_posterior_update(theta0, r, 1.7, 1.7) == doctest::Approx(theta0));
  const double e = r * (1.0 / 0.7 - 1.0);
  CHECK(zou_posterior_update(theta0, r, 0.0, e) == doctest::Approx(0.7 * theta0));
  CHECK_THROWS_AS(zou_posterior_update(theta0, 0.0, 0.0, 1.0), Error);
}

TEST_CASE("nominal clock") {
  ZouParams p;
  p.stoppage1 = 3.0;
  p.stoppage2 = 5.0;
  CHECK(zou_nominal_minute(30.0, 1, p) == 30.0);
  CHECK(zou_nominal_minute(46.0, 1, p) == doctest::Approx(44.5));
  CHECK(zou_nominal_minute(50.0, 1, p) == 45.0);
  CHECK(zou_nominal_minute(47.0, 2, p) == 47.0);
  CHECK(zou_nominal_minute(92.0, 2, p) == doctest::Approx(89.5));
  CHECK(zou_nominal_minute(99.0, 2, p) == 90.0);
  CHECK(p.multiplier(44.5, ScoreState::Tied) == doctest::Approx(4.0));
  CHECK(p.multiplier(89.5, ScoreState::Tied) == doctest::Approx(6.0));
}

TEST_CASE("lattice matches the Poisson oracle") {
  for (auto [th, ta] : {std::pair{0.0188, 0.0167}, std::pair{0.03, 0.01}, std::pair{0.06, 0.05}}) {
    const ZouForecast z = zou_outcome_probs(ZouState{}, flat(th, ta));
    const auto p = oracle::poisson_outcome(90.0 * th, 90.0 * ta, 0, 0, 60);
    CHECK(std::abs(z.probs.home - p[0]) < 1e-8);
    CHECK(std::abs(z.probs.draw - p[1]) < 1e-8);
    CHECK(std::abs(z.probs.away - p[2]) < 1e-8);
    double p0 = oracle::poisson_pmf(0, 90.0 * (th + ta));
    CHECK(std::abs(z.over[0] - (1.0 - p0)) < 1e-8);
  }
  ZouState mid;
  mid.nominal = 60.0;
  mid.home_goals = 2;
  mid.away_goals = 1;
  // Exposure equal to realised goals leaves the rates at their priors.
  ZouParams p = flat(0.02, 0.01);
  mid.exposure_home = 2.0 / p.theta01;
  mid.exposure_away = 1.0 / p.theta02;
  const ZouForecast z = zou_outcome_probs(mid, p);
  const auto q = oracle::poisson_outcome(30.0 * 0.02, 30.0 * 0.01, 2, 1, 60);
  CHECK(std::abs(z.probs.home - q[0]) < 1e-8);
  CHECK(std::abs(z.probs.draw - q[1]) < 1e-8);
}

TEST_CASE("lattice degenerate and symmetric cases") {
  ZouState st;
  st.nominal = 50.0;
  st.home_goals = 1;
  const ZouForecast zero = zou_outcome_probs(st, flat(0.0, 0.0));
  CHECK(zero.probs.home == 1.0);
  const ZouForecast sym = zou_outcome_probs(ZouState{}, flat(0.02, 0.02));
  CHECK(std::abs(sym.probs.home - sym.probs.away) < 1e-12);
  const ZouForecast hot = zou_outcome_probs(ZouState{}, flat(0.5, 0.5));
  CHECK(hot.cap > 15);
  CHECK(hot.overflow <= 1e-12);
}

TEST_CASE("exact calibration round trip") {
  ZouParams truth;
  truth.theta01 = 0.0195;
  truth.theta02 = 0.0142;
  truth.state_mult = {0.9, 1.0, 1.15};
  truth.half2_mult = 1.1;
  const ZouForecast f = zou_outcome_probs(ZouState{}, truth);
  CalibrationTarget t;
  t.p_mkt = f.probs;
  for (std::size_t g = 0; g < kGoalThresholds.size(); ++g) t.p_over[kGoalThresholds[g]] = f.over[g];
  ZouParams init = truth;
  init.theta01 = 0.015;
  init.theta02 = 0.015;
  const ZouCalibration c = zou_calibrate(t, init);
  CHECK(std::abs(c.params.theta01 - truth.theta01) < 1e-4);
  CHECK(std::abs(c.params.theta02 - truth.theta02) < 1e-4);
  CHECK(c.loss < 1e-12);

  // More over-2.5 mass calls for higher rates.
  CalibrationTarget goals = t;
  goals.p_over[2.5] += 0.1;
  goals.p_over[3.5] += 0.1;
  const ZouCalibration g = zou_calibrate(goals, init);
  CHECK(g.params.theta01 + g.params.theta02 > c.params.theta01 + c.params.theta02);
}
