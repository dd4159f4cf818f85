// Command-line front end: ingest, fit, calibrate, forecast, evaluate, bet,
// synth and report.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "inplay/calibration.hpp"
#include "inplay/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace inplay;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

struct Failure {
  int exit_code;
  std::string code;
  std::string message;
};

void write_json(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream(p) << j.dump(2) << "\n";
}

void write_error_manifest(const fs::path& dir, const std::string& command, const Failure& f) {
  json m;
  m["status"] = "error";
  m["command"] = command;
  m["errors"] = json::array({{{"stage", command}, {"code", f.code}, {"message", f.message}}});
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
}

RunConfig config_for(const Globals& g) {
  if (g.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  RunConfig c = load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  return c;
}

Dataset dataset_for(const RunConfig& c) {
  if (c.events_csv.empty()) throw Error(ErrorCode::ConfigError, "config has no data.events");
  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<fs::path>(s);
  };
  return ingest_files(c.events_csv, opt(c.odds_csv), opt(c.ou_csv));
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

int finish(const ExperimentResult& r) {
  for (const auto& o : r.outputs) std::cout << "wrote " << o << "\n";
  for (const auto& e : r.errors)
    std::cerr << "error [" << e.code << "] " << e.match_id << ": " << e.message << "\n";
  return r.errors.empty() ? 0 : 1;
}

// --- subcommands -----------------------------------------------------------

int cmd_ingest(const Globals& g, const std::string& events, const std::string& odds,
               const std::string& ou) {
  Dataset d;
  if (!events.empty()) {
    auto opt = [](const std::string& s) {
      return s.empty() ? std::nullopt : std::optional<fs::path>(s);
    };
    d = ingest_files(events, opt(odds), opt(ou));
  } else {
    d = dataset_for(config_for(g));
  }
  json j;
  j["matches"] = d.timelines.size();
  j["markets"] = d.markets.size();
  j["excluded"] = d.excluded;
  j["warnings"] = d.warnings;
  long complete = 0;
  for (const auto& m : d.timelines) {
    const auto it = d.markets.find(m.match_id);
    if (has_complete_market(m, it == d.markets.end() ? nullptr : &it->second, 0)) ++complete;
  }
  j["complete_market_coverage"] = complete;
  write_json(fs::path(g.out_dir) / "dataset_summary.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fit(const Globals& g, const std::string& as_of_text) {
  const RunConfig cfg = config_for(g);
  const Dataset d = dataset_for(cfg);
  Date as_of;
  if (!as_of_text.empty()) {
    as_of = parse_date(as_of_text);
  } else {
    const Split s = split_dataset(d, cfg);
    if (s.gameweek_cutoff.empty()) throw Error(ErrorCode::DataGap, "no evaluation gameweeks");
    as_of = s.gameweek_cutoff.begin()->second;
  }
  const auto training = training_before(d, as_of);
  if (training.empty()) throw Error(ErrorCode::DataGap, "no matches before " + format_date(as_of));
  json fits;
  fits["as_of"] = format_date(as_of);
  fits["training_matches"] = training.size();
  const std::set<std::string> models(cfg.models.begin(), cfg.models.end());
  if (models.count("weibull")) fits["weibull"] = to_json(fit_weibull(training, as_of, cfg));
  if (models.count("zou")) fits["zou"] = to_json(zou_fit(training));
  if (models.count("maia")) fits["maia"] = to_json(maia_fit(training, true));
  const fs::path out(g.out_dir);
  write_json(out / "fits.json", fits);

  if (models.count("weibull")) {
    const auto reports = covariate_model_reports(training, as_of, cfg);
    const std::pair<std::size_t, std::size_t> nested[] = {{0, 1}, {1, 2}, {1, 3}};
    const auto rows = compare_models(reports, 0, nested);
    std::ostringstream s;
    s << "model,k,loglik,bic,delta_bic,lrt_p\n";
    for (const auto& r : rows)
      s << r.label << "," << r.k << "," << fmt(r.loglik) << "," << fmt(r.bic) << ","
        << fmt(r.delta_bic) << "," << (r.lrt_p ? fmt(*r.lrt_p) : "") << "\n";
    std::ofstream(out / "model_comparison.csv") << s.str();
    std::cout << s.str();
  }
  std::cout << "wrote fits.json\n";
  return 0;
}

int cmd_calibrate(const Globals& g) {
  RunConfig cfg = config_for(g);
  cfg.calibrate = true;
  const Dataset d = dataset_for(cfg);
  const Split split = split_dataset(d, cfg);
  std::map<int, WeibullModel> fits = rolling_refit(d, cfg);
  std::ostringstream s;
  s << "match_id,eta_init_H,eta_init_A,eta_kappa_H,eta_kappa_A,shift_H,shift_A,loss,"
       "iterations,poor_fit\n";
  int failures = 0;
  for (const MatchTimeline* m : split.evaluation) {
    try {
      const auto it = d.markets.find(m->match_id);
      if (it == d.markets.end()) throw Error(ErrorCode::DataGap, "no market for " + m->match_id);
      WeibullModel wm = fits.at(m->gameweek);
      std::vector<std::string> warnings;
      ensure_team(wm.ratings, m->home, warnings);
      ensure_team(wm.ratings, m->away, warnings);
      SimConfig sim;
      sim.n_paths = cfg.n_paths;
      sim.stoppage1 = cfg.stoppage.first;
      sim.stoppage2 = cfg.stoppage.second;
      sim.seed = derive_seed(cfg.seed, stable_hash("calibrate:" + m->match_id));
      const EtaPair base = expected_log_time(wm.ratings, m->home, m->away);
      const CalibrationResult c =
          calibrate_match(base, target_from_market(it->second, 0), wm.shape, sim);
      s << m->match_id << "," << fmt(base.home) << "," << fmt(base.away) << ","
        << fmt(c.eta_kappa.home) << "," << fmt(c.eta_kappa.away) << "," << fmt(c.shift.home)
        << "," << fmt(c.shift.away) << "," << fmt(c.loss) << "," << c.iterations << ","
        << (c.poor_fit ? 1 : 0) << "\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << "error [" << to_string(e.code()) << "] " << m->match_id << ": " << e.what()
                << "\n";
    }
  }
  fs::create_directories(g.out_dir);
  std::ofstream(fs::path(g.out_dir) / "calibration.csv") << s.str();
  std::cout << "wrote calibration.csv\n";
  return failures == 0 ? 0 : 1;
}

struct ForecastArgs {
  std::string model;
  std::string home, away;
  double minute = 0.0;
  int home_goals = 0, away_goals = 0;
  double elapsed = -1.0;
  int red_home = 0, red_away = 0;
  double dev_home = 0.0, dev_away = 0.0;
  int n_paths = 10000;
  double stoppage1 = 3.1, stoppage2 = 6.2;
};

int cmd_forecast(const Globals& g, const ForecastArgs& a) {
  std::ifstream in(a.model);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open model file " + a.model);
  json j = json::parse(in);
  if (j.contains("weibull")) j = j["weibull"];
  const WeibullModel wm = weibull_from_json(j);
  if (!wm.ratings.has(a.home)) throw Error(ErrorCode::MissingTeam, "unknown team " + a.home);
  if (!wm.ratings.has(a.away)) throw Error(ErrorCode::MissingTeam, "unknown team " + a.away);
  SimConfig sim;
  sim.n_paths = a.n_paths;
  sim.stoppage1 = a.stoppage1;
  sim.stoppage2 = a.stoppage2;
  sim.seed = g.seed.value_or(0);
  MatchState st;
  st.minute = a.minute;
  st.half = a.minute < sim.durations().first_half_end ? 1 : 2;
  st.home_goals = a.home_goals;
  st.away_goals = a.away_goals;
  st.elapsed = a.elapsed >= 0.0 ? a.elapsed : a.minute - (st.half == 1 ? 0.0 : 45.0 + a.stoppage1);
  st.elapsed = std::max(0.0, st.elapsed);
  st.x_home = {static_cast<double>(a.red_away - a.red_home), a.dev_home};
  st.x_away = {static_cast<double>(a.red_home - a.red_away), a.dev_away};
  const EtaPair eta = expected_log_time(wm.ratings, a.home, a.away, st.x_home, st.x_away, wm.coeffs);
  const SimForecast f = forecast(st, eta, wm.shape, sim);
  json out{{"home", f.probs.home}, {"draw", f.probs.draw}, {"away", f.probs.away},
           {"over", f.over}, {"total_goals", f.total_goals}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const Globals& g, bool betting, bool with_fits) {
  const RunConfig cfg = config_for(g);
  const Dataset d = dataset_for(cfg);
  const fs::path out(g.out_dir);
  if (with_fits) {
    json fits = json::object();
    const std::set<std::string> models(cfg.models.begin(), cfg.models.end());
    if (models.count("weibull"))
      for (const auto& [gw, wm] : rolling_refit(d, cfg)) fits[std::to_string(gw)] = to_json(wm);
    write_json(out / "fits.json", fits);
  }
  return finish(run_experiment(cfg, d, out, betting));
}

int cmd_synth(const Globals& g, SynthConfig sc) {
  if (!g.config.empty()) sc.seed = load_config(g.config).seed;
  if (g.seed) sc.seed = *g.seed;
  const SynthResult r = synthesize(sc);
  const fs::path out(g.out_dir);
  fs::create_directories(out);
  {
    std::ofstream f(out / "events.csv");
    write_events_csv(f, r.dataset.timelines);
  }
  if (sc.market_paths > 0) {
    std::ofstream o(out / "odds.csv");
    write_odds_csv(o, r.dataset.markets);
    std::ofstream u(out / "ou.csv");
    write_over_under_csv(u, r.dataset.markets);
  }
  write_json(out / "truth.json", to_json(r.truth));
  // A runnable configuration; the censor width matches the recording grid.
  json cfg = {{"seed", sc.seed},
              {"data", {{"events", "events.csv"}}},
              {"censor_width", sc.time_resolution},
              {"split",
               {{"eval_from_gameweek", std::max(1, 2 * (sc.n_teams - 1) - 1)},
                {"season", "S" + std::to_string(sc.seasons)}}}};
  if (sc.market_paths > 0) {
    cfg["data"]["odds"] = "odds.csv";
    cfg["data"]["ou"] = "ou.csv";
  } else {
    cfg["models"] = json::array({"weibull"});
  }
  write_json(out / "config.json", cfg);
  std::cout << "wrote " << r.dataset.timelines.size() << " matches to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"In-play football forecasting with a Weibull AFT goal model"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  std::string events, odds, ou;
  auto* ingest = app.add_subcommand("ingest", "Validate CSV inputs and summarise coverage");
  ingest->add_option("--events", events);
  ingest->add_option("--odds", odds);
  ingest->add_option("--ou", ou);

  std::string as_of;
  auto* fit = app.add_subcommand("fit", "Fit the configured models and compare covariate specs");
  fit->add_option("--as-of", as_of, "Fit date (default: first evaluation gameweek)");

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate kickoff rates to the market");

  ForecastArgs fa;
  auto* fc = app.add_subcommand("forecast", "Forecast one match state from a fitted model");
  fc->add_option("--model", fa.model, "fits.json or truth.json")->required();
  fc->add_option("--home", fa.home)->required();
  fc->add_option("--away", fa.away)->required();
  fc->add_option("--minute", fa.minute);
  fc->add_option("--home-goals", fa.home_goals);
  fc->add_option("--away-goals", fa.away_goals);
  fc->add_option("--elapsed", fa.elapsed, "Minutes since the last goal or half start");
  fc->add_option("--red-home", fa.red_home);
  fc->add_option("--red-away", fa.red_away);
  fc->add_option("--dev-home", fa.dev_home);
  fc->add_option("--dev-away", fa.dev_away);
  fc->add_option("--paths", fa.n_paths);
  fc->add_option("--stoppage1", fa.stoppage1);
  fc->add_option("--stoppage2", fa.stoppage2);

  auto* evaluate = app.add_subcommand("evaluate", "Forecast every evaluation minute and score it");
  auto* bet = app.add_subcommand("bet", "Evaluate and run the betting backtest");
  auto* report = app.add_subcommand("report", "Fits, evaluation and betting artefacts");

  SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic league with market prices");
  synth->add_option("--teams", sc.n_teams)->capture_default_str();
  synth->add_option("--seasons", sc.seasons)->capture_default_str();
  synth->add_option("--market-paths", sc.market_paths, "0 disables market files")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (ingest->parsed()) return cmd_ingest(g, events, odds, ou);
    if (fit->parsed()) return cmd_fit(g, as_of);
    if (calibrate->parsed()) return cmd_calibrate(g);
    if (fc->parsed()) return cmd_forecast(g, fa);
    if (evaluate->parsed()) return cmd_experiment(g, false, false);
    if (bet->parsed()) return cmd_experiment(g, true, false);
    if (report->parsed()) return cmd_experiment(g, true, true);
    if (synth->parsed()) return cmd_synth(g, sc);
  } catch (const Error& e) {
    const Failure f{2, std::string(to_string(e.code())), e.what()};
    std::cerr << "error [" << f.code << "]: " << f.message << "\n";
    write_error_manifest(g.out_dir, command, f);
    return f.exit_code;
  } catch (const std::exception& e) {
    const Failure f{3, "Internal", e.what()};
    std::cerr << "error: " << f.message << "\n";
    write_error_manifest(g.out_dir, command, f);
    return f.exit_code;
  }
  return 0;
}
