#include <doctest.h>

#include <cmath>
#include <numbers>

#include "inplay/aft.hpp"
#include "inplay/pipeline.hpp"

using namespace inplay;

namespace {

// Composite Simpson rule, the reference integrator for these checks.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("linear predictor") {
  RatingSet r;
  r.mu = 4.09;
  r.beta_home = -0.12;
  r.attack = {{"H", 0.0}, {"A", 0.0}};
  r.defence = r.attack;
  const EtaPair eta = expected_log_time(r, "H", "A");
  CHECK(eta.home == doctest::Approx(3.97));
  CHECK(eta.away == doctest::Approx(4.09));

  CovariateCoeffs c;
  c.red = -0.36;
  const EtaPair with_red = expected_log_time(r, "H", "A", {1.0, 0.0}, {-1.0, 0.0}, c);
  CHECK(with_red.home == doctest::Approx(3.97 - 0.36));

  RatingSet zero;
  zero.attack = {{"H", 0.0}, {"A", 0.0}};
  zero.defence = zero.attack;
  CHECK(expected_log_time(zero, "H", "A").home == 0.0);
  CHECK(expected_log_time(zero, "H", "A").away == 0.0);
  CHECK_THROWS_AS(expected_log_time(zero, "H", "X"), Error);
}

TEST_CASE("rate from expected log time") {
  CHECK(rate_from_eta(4.09, 1.0) == doctest::Approx(std::exp(-4.09)));
  CHECK(rate_from_eta(4.09, 1.0) == doctest::Approx(0.01672).epsilon(1e-3));
  CHECK(rate_from_eta(0.0, 2.0) == doctest::Approx(std::numbers::pi / 4.0));
}

TEST_CASE("Weibull mean matches exp(eta) by quadrature") {
  for (double g : {0.98, 1.4, 2.0})
    for (double eta : {2.0, 4.09}) {
      const double lambda = rate_from_eta(eta, g);
      const double upper = 40.0 * std::exp(eta);
      const double mean =
          simpson([&](double t) { return std::exp(-lambda * std::pow(t, g)); }, 0.0, upper, 2000000);
      CHECK(std::abs(mean / std::exp(eta) - 1.0) < 1e-6);
      CHECK(weibull_mean(lambda, g) == doctest::Approx(std::exp(eta)).epsilon(1e-12));
    }
}

TEST_CASE("spell contributions, exponential case") {
  const ShapeSpec shape = ShapeSpec::single(1.0);
  const double lambda = std::exp(-4.09);
  GoalSpell censored{Side::Home, 5.0, 35.0, SpellEnd::Censored, 1, ScoreState::Tied, {{35.0, 4.09}}};
  CHECK(spell_log_likelihood(censored, shape) == doctest::Approx(-30.0 * lambda));

  GoalSpell goal{Side::Home, 0.0, 11.0, SpellEnd::Goal, 1, ScoreState::Tied, {{11.0, 4.09}}};
  CHECK(spell_log_likelihood(goal, shape) ==
        doctest::Approx(std::log(std::exp(-lambda * 10.0) - std::exp(-lambda * 11.0))));
  CHECK(spell_log_likelihood(goal, shape) == doctest::Approx(-4.265750277311521));
}

TEST_CASE("piecewise eta integrates the hazard") {
  const double g = 1.4;
  const ShapeSpec shape = ShapeSpec::single(g);
  // Red card for the opponent at minute 30 shortens expected goal time.
  GoalSpell s{Side::Home, 10.0, 70.0, SpellEnd::Censored, 1, ScoreState::Tied,
              {{30.0, 4.1}, {70.0, 3.74}}};
  // Substituting t = 10 + v^2 removes the singular derivative at the spell start.
  auto cum = [&](double a, double b) {
    const double eta = a < 30.0 ? 4.1 : 3.74;
    auto hazard = [&](double v) {
      return g * rate_from_eta(eta, g) * std::pow(v * v, g - 1.0) * 2.0 * v;
    };
    return simpson(hazard, std::sqrt(a - 10.0), std::sqrt(b - 10.0), 20000);
  };
  const double h = cum(10.0, 30.0) + cum(30.0, 70.0);
  CHECK(spell_log_likelihood(s, shape) == doctest::Approx(-h).epsilon(1e-8));

  s.terminal = SpellEnd::Goal;
  const double h_lo = cum(10.0, 30.0) + cum(30.0, 69.0);
  CHECK(spell_log_likelihood(s, shape) ==
        doctest::Approx(std::log(std::exp(-h_lo) - std::exp(-h))).epsilon(1e-8));
}

TEST_CASE("spell construction resets at half-time") {
  MatchTimeline m;
  m.home = "H";
  m.away = "A";
  m.first_half_end = 47.0;
  m.full_time = 95.0;
  m.events = {{20.0, 1, EventKind::Goal, "H", 0.0}, {60.0, 2, EventKind::RedCard, "A", 0.0}};
  m.home_goals = 1;
  const auto spells = build_spells(m, covariate_path(m, {}, DeviationMode::None), BoundaryMode::Reset);
  int goals = 0;
  double exposure = 0.0;
  for (const auto& s : spells) {
    goals += s.terminal == SpellEnd::Goal;
    exposure += s.end - s.start;
    CHECK(s.end > s.start);
    if (s.half == 2) CHECK(s.start >= 47.0);
  }
  CHECK(goals == 1);
  CHECK(exposure == doctest::Approx(2 * 95.0));
  // The home spell after the red card carries the player advantage.
  bool saw_red = false;
  for (const auto& s : spells)
    for (const auto& seg : s.segments)
      if (s.side == Side::Home && seg.x.red == 1.0) saw_red = true;
  CHECK(saw_red);
}

TEST_CASE("time-decay weights") {
  const Date as_of = parse_date("2024-06-01");
  const Date dates[] = {as_of, as_of - std::chrono::days(373)};
  const auto w = decay_weights(dates, as_of, 0.0065);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(0.5002164942790777));
  const auto flat = decay_weights(dates, as_of, 0.0);
  CHECK(flat[1] == 1.0);
  const Date future[] = {as_of + std::chrono::days(1)};
  CHECK_THROWS_AS(decay_weights(future, as_of, 0.0065), Error);
}

TEST_CASE("likelihood-ratio p-values") {
  CHECK(lrt_p_value(3.841458820694124, 1) == doctest::Approx(0.05));
  CHECK(lrt_p_value(5.991464547107979, 2) == doctest::Approx(0.05));
  CHECK(lrt_p_value(47.8, 1) == doctest::Approx(4.7199203517642916e-12).epsilon(1e-6));
  CHECK(lrt_p_value(47.02743371763134, 1) == doctest::Approx(7.0e-12).epsilon(1e-6));
}

TEST_CASE("BIC comparison") {
  FitReport a;
  a.label = "a";
  a.k = 3;
  a.n_obs = 1000;
  a.loglik = -500.0;
  a.bic = bic(a.k, a.n_obs, a.loglik);
  FitReport b = a;
  b.label = "b";
  b.k = 4;
  b.bic = bic(b.k, b.n_obs, b.loglik);
  const FitReport same[] = {a, a};
  CHECK(compare_models(same)[1].delta_bic == 0.0);
  const FitReport pair[] = {a, b};
  CHECK(compare_models(pair)[1].delta_bic == doctest::Approx(std::log(1000.0)));
  FitReport c = b;
  c.n_obs = 999;
  const FitReport bad[] = {a, c};
  CHECK_THROWS_AS(compare_models(bad), Error);
}

TEST_CASE("two-stage fit recovers a synthetic league") {
  SynthConfig sc;
  sc.n_teams = 20;
  sc.seasons = 2;
  sc.coeffs = {-0.36, std::nullopt, std::nullopt};
  sc.shape = ShapeSpec::half_specific(0.983, 1.395);
  sc.market_paths = 0;
  sc.seed = 11;
  const SynthResult synth = synthesize(sc);
  const auto& matches = synth.dataset.timelines;
  REQUIRE(matches.size() == 760);

  RunConfig cfg;
  cfg.seed = 1;
  cfg.xi = 0.0;
  cfg.covariates = CovariateModel::M1;
  // Goal times are exact to the second, so the censoring window matches.
  cfg.censor_width = sc.time_resolution;
  const Date as_of = matches.back().date + std::chrono::days(1);
  const WeibullModel fit = fit_weibull(matches, as_of, cfg);
  const FitReport& r1 = fit.reports[0];
  const FitReport& r2 = fit.reports[1];
  CHECK(r1.converged);
  CHECK(r2.converged);
  auto within = [](const FitReport& r, const char* name, double truth) {
    const Estimate* e = r.find(name);
    REQUIRE(e != nullptr);
    REQUIRE(e->se);
    INFO(name << " = " << e->value << " se " << *e->se);
    CHECK(std::abs(e->value - truth) < 3.0 * *e->se);
  };
  within(r1, "mu", 4.09);
  within(r1, "beta_home", -0.12);
  within(r2, "beta_red", -0.36);

  // Lower attack means shorter waits: the best attack in truth is fitted below zero.
  std::string best;
  double lowest = 1e9;
  for (const auto& [team, a] : synth.truth.ratings.attack)
    if (a < lowest) {
      lowest = a;
      best = team;
    }
  CHECK(fit.ratings.attack.at(best) < 0.0);
  double sum = 0.0;
  for (const auto& [team, a] : fit.ratings.attack) sum += a;
  CHECK(std::abs(sum) < 1e-9);
}
