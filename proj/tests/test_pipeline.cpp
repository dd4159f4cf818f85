#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "inplay/pipeline.hpp"

using namespace inplay;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kHeader =
    "match_id,date,season,gameweek,home,away,minute,half,kind,team,psxg,first_half_end,full_time\n";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inplay_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("ingest events") {
  std::istringstream events(std::string(kHeader) +
                            "m1,2024-01-06,S,20,Arsenal,Everton,12.5,1,shot,Arsenal,0.3,47,96\n"
                            "m1,2024-01-06,S,20,Arsenal,Everton,47.2,2,goal,Everton,,47,96\n"
                            "m2,2024-01-07,S,20,Spurs,Villa,,,none,,,46,95\n"
                            "m3,2024-01-07,S,20,Leeds,Wolves,30,1,goal,Leeds,,,95\n");
  const Dataset d = ingest(events);
  REQUIRE(d.timelines.size() == 2);
  const MatchTimeline* m1 = d.find("m1");
  REQUIRE(m1 != nullptr);
  REQUIRE(m1->events.size() == 2);
  CHECK(m1->events[1].kind == EventKind::Goal);
  CHECK(m1->events[1].team == "Everton");
  CHECK(m1->events[1].minute == doctest::Approx(47.2));
  CHECK(m1->events[1].half == 2);
  CHECK(m1->away_goals == 1);
  CHECK(d.find("m2")->events.empty());
  REQUIRE(d.excluded.size() == 1);
  CHECK(d.excluded[0] == "m3");
  CHECK_FALSE(d.warnings.empty());
}

TEST_CASE("ingest edge cases") {
  std::istringstream empty(kHeader);
  const Dataset d = ingest(empty);
  CHECK(d.timelines.empty());
  CHECK_FALSE(d.warnings.empty());

  std::istringstream bad(std::string(kHeader) +
                         "m1,2024-01-06,S,20,A,B,12.5,1,goal,A,,47,96\n"
                         "m1,2024-01-06,S,20,A,B,abc,1,goal,A,,47,96\n");
  try {
    ingest(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }

  std::istringstream events(std::string(kHeader) + "m1,2024-01-06,S,20,A,B,,,none,,,47,96\n");
  std::istringstream odds("match_id,minute,odds_home,odds_draw,odds_away\nm1,0,0.99,3.0,4.0\n");
  try {
    ingest(events, &odds);
    FAIL("expected InvalidOdds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidOdds);
  }
}

TEST_CASE("CSV writers round-trip through ingest") {
  SynthConfig sc;
  sc.n_teams = 4;
  sc.market_paths = 50;
  const SynthResult s = synthesize(sc);
  std::stringstream ev, od, ou;
  write_events_csv(ev, s.dataset.timelines);
  write_odds_csv(od, s.dataset.markets);
  write_over_under_csv(ou, s.dataset.markets);
  const Dataset back = ingest(ev, &od, &ou);
  REQUIRE(back.timelines.size() == s.dataset.timelines.size());
  for (std::size_t i = 0; i < back.timelines.size(); ++i) {
    const auto& a = back.timelines[i];
    const auto& b = s.dataset.timelines[i];
    CHECK(a.match_id == b.match_id);
    CHECK(a.events.size() == b.events.size());
    CHECK(a.home_goals == b.home_goals);
    CHECK(a.full_time == doctest::Approx(b.full_time));
    CHECK(has_complete_market(a, &back.markets.at(a.match_id), 2));
  }
}

TEST_CASE("configuration") {
  CHECK_THROWS_AS(parse_config(json::object()), Error);
  const RunConfig c = parse_config(json{{"seed", 5}});
  CHECK(c.seed == 5);
  CHECK(c.xi == 0.0065);
  CHECK(c.n_paths == 10000);
  CHECK(c.stoppage.first == 3.1);
  CHECK(c.stoppage.second == 6.2);
  CHECK(c.lag == 2);
  CHECK(c.commission == 0.02);

  CHECK_THROWS_AS(parse_config(json{{"seed", 5}, {"bogus", 1}}), Error);
  CHECK_THROWS_AS(parse_config(json{{"seed", 5}, {"models", {"elo"}}}), Error);
  CHECK_THROWS_AS(parse_config(json{{"seed", 5}, {"shape", {{"kind", "single"}, {"gamma", {1.0, 2.0}}}}}),
                  Error);
  const RunConfig k = parse_config(
      json{{"seed", 1}, {"covariates", "M1"}, {"betting", {{"modes", {"kelly"}}}}});
  CHECK(k.covariates == CovariateModel::M1);
  REQUIRE(k.stake_modes.size() == 1);
  CHECK(k.stake_modes[0] == StakeMode::Kelly);

  const fs::path dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"seed": 1, "data": {"events": "missing.csv"}})";
  CHECK_THROWS_AS(load_config(dir / "c.json"), Error);
  std::ofstream(dir / "events.csv") << kHeader;
  std::ofstream(dir / "c.json") << R"({"seed": 1, "data": {"events": "events.csv"}})";
  CHECK(load_config(dir / "c.json").events_csv == (dir / "events.csv").string());
}

TEST_CASE("published schema matches the embedded copy") {
  const fs::path here = fs::path(__FILE__).parent_path();
  std::ifstream in(here.parent_path() / "docs" / "config.schema.json");
  REQUIRE(in);
  CHECK(json::parse(in) == config_schema());
}

TEST_CASE("fitted models survive JSON") {
  SynthConfig sc;
  sc.n_teams = 6;
  sc.seasons = 2;
  sc.market_paths = 0;
  const SynthResult s = synthesize(sc);
  RunConfig cfg;
  cfg.seed = 1;
  const Date as_of = s.dataset.timelines.back().date + std::chrono::days(1);
  const WeibullModel w = fit_weibull(s.dataset.timelines, as_of, cfg);
  const WeibullModel w2 = weibull_from_json(json::parse(to_json(w).dump()));
  CHECK(w2.ratings.mu == w.ratings.mu);
  CHECK(w2.ratings.attack == w.ratings.attack);
  CHECK(w2.shape.gamma == w.shape.gamma);
  CHECK(w2.coeffs.psxg == w.coeffs.psxg);
  CHECK(w2.baseline.slope == w.baseline.slope);

  const ZouModel z = zou_fit(s.dataset.timelines);
  const ZouModel z2 = zou_from_json(json::parse(to_json(z).dump()));
  CHECK(z2.for_match("T01", "T02").theta01 == z.for_match("T01", "T02").theta01);

  const MaiaParams m = maia_fit(s.dataset.timelines);
  const MaiaParams m2 = maia_from_json(json::parse(to_json(m).dump()));
  CHECK(m2.xi_gd == m.xi_gd);
  CHECK(m2.red_power == m.red_power);
  CHECK_THROWS_AS(zou_from_json(to_json(m)), Error);
}

TEST_CASE("new teams start at zero") {
  RatingSet r;
  r.attack["A"] = 0.1;
  r.defence["A"] = -0.1;
  std::vector<std::string> warnings;
  ensure_team(r, "A", warnings);
  ensure_team(r, "Promoted", warnings);
  CHECK(r.attack_of("Promoted") == 0.0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("refits never see their own gameweek") {
  SynthConfig sc;
  sc.n_teams = 6;
  sc.seasons = 2;
  sc.market_paths = 0;
  const SynthResult s = synthesize(sc);
  RunConfig cfg;
  cfg.seed = 1;
  cfg.eval_from_gameweek = 8;
  cfg.eval_season = "S2";
  const auto fits = rolling_refit(s.dataset, cfg);
  REQUIRE(fits.size() == 3);

  Dataset truncated = s.dataset;
  const Split split = split_dataset(s.dataset, cfg);
  const Date cutoff = split.gameweek_cutoff.at(9);
  std::erase_if(truncated.timelines, [&](const MatchTimeline& m) { return m.date >= cutoff; });
  const auto again = rolling_refit(truncated, cfg);
  // Gameweek 8 is unaffected by removing gameweek 9 onwards.
  REQUIRE(again.count(8) == 1);
  CHECK(again.at(8).ratings.mu == fits.at(8).ratings.mu);
  CHECK(again.at(8).ratings.attack == fits.at(8).ratings.attack);
  CHECK(again.at(8).shape.gamma == fits.at(8).shape.gamma);
}

TEST_CASE("betfair-only experiment") {
  SynthConfig sc;
  sc.n_teams = 4;
  sc.market_paths = 50;
  const SynthResult s = synthesize(sc);
  RunConfig cfg;
  cfg.seed = 2;
  cfg.models = {"betfair"};
  cfg.eval_from_gameweek = 6;
  const fs::path out = scratch("betfair");
  const ExperimentResult r = run_experiment(cfg, s.dataset, out);
  CHECK(r.errors.empty());
  REQUIRE(r.metrics.size() == 1);
  long expected = 0;
  for (const auto& m : s.dataset.timelines)
    if (m.gameweek >= 6) expected += m.evaluation_minutes();
  CHECK(r.metrics[0].n_points == expected);
  CHECK(r.betting.empty());
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(json::parse(slurp(out / "manifest.json"))["status"] == "ok");
}

TEST_CASE("experiments are deterministic") {
  SynthConfig sc;
  sc.n_teams = 4;
  sc.market_paths = 100;
  sc.seed = 8;
  const SynthResult s = synthesize(sc);
  RunConfig cfg;
  cfg.seed = 3;
  cfg.models = {"weibull", "zou", "betfair"};
  cfg.n_paths = 300;
  cfg.eval_from_gameweek = 6;
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const ExperimentResult ra = run_experiment(cfg, s.dataset, a);
  const ExperimentResult rb = run_experiment(cfg, s.dataset, b);
  CHECK(ra.errors.empty());
  REQUIRE_FALSE(ra.outputs.empty());
  for (const auto& f : ra.outputs) CHECK(slurp(a / f) == slurp(b / f));
}
