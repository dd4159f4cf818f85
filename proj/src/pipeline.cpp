#include "inplay/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "inplay/calibration.hpp"
#include "inplay/config_schema.hpp"
#include "inplay/simulator.hpp"

namespace inplay {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

const json& config_schema() {
  static const json schema = json::parse(kConfigSchema);
  return schema;
}

namespace {

// Checks the subset of JSON Schema used by the published config schema.
void validate_against(const json& v, const json& schema, const std::string& where) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ConfigError, "config " + where + ": " + why);
  };
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) fail("value " + v.dump() + " not allowed");
  }
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    const bool ok = (t == "object" && v.is_object()) || (t == "array" && v.is_array()) ||
                    (t == "string" && v.is_string()) || (t == "boolean" && v.is_boolean()) ||
                    (t == "integer" && v.is_number_integer()) ||
                    (t == "number" && v.is_number());
    if (!ok) fail("expected " + t);
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) fail("below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) fail("above maximum");
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
      fail("must exceed " + schema["exclusiveMinimum"].dump());
  }
  if (v.is_object()) {
    const json props = schema.value("properties", json::object());
    for (const auto& r : schema.value("required", json::array()))
      if (!v.contains(r.get<std::string>())) fail("missing required key '" + r.get<std::string>() + "'");
    for (const auto& [k, sub] : v.items()) {
      if (!props.contains(k)) {
        if (schema.value("additionalProperties", true) == false) fail("unknown key '" + k + "'");
        continue;
      }
      validate_against(sub, props[k], where + "." + k);
    }
  }
  if (v.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i)
      validate_against(v[i], schema["items"], where + "[" + std::to_string(i) + "]");
}

ShapeSpec parse_shape(const json& j) {
  const std::string kind = j.at("kind");
  const auto g = j.at("gamma").get<std::vector<double>>();
  const std::size_t need = kind == "single" ? 1 : kind == "half_specific" ? 2 : 3;
  if (g.size() != need)
    throw Error(ErrorCode::ConfigError, "shape '" + kind + "' needs " + std::to_string(need) +
                                            " gamma values");
  if (kind == "single") return ShapeSpec::single(g[0]);
  if (kind == "half_specific") return ShapeSpec::half_specific(g[0], g[1]);
  return ShapeSpec::score_state(g[0], g[1], g[2]);
}

}  // namespace

RunConfig parse_config(const json& j) {
  validate_against(j, config_schema(), "$");
  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("data")) {
    const auto& d = j["data"];
    c.events_csv = d.value("events", "");
    c.odds_csv = d.value("odds", "");
    c.ou_csv = d.value("ou", "");
  }
  if (j.contains("models")) c.models = j["models"].get<std::vector<std::string>>();
  if (j.contains("covariates")) c.covariates = parse_covariate_model(j["covariates"].get<std::string>());
  c.calibrate = j.value("calibrate", c.calibrate);
  if (j.contains("shape")) c.shape = parse_shape(j["shape"]);
  c.xi = j.value("xi", c.xi);
  c.censor_width = j.value("censor_width", c.censor_width);
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    c.n_paths = s.value("n_paths", c.n_paths);
    if (s.contains("stoppage")) {
      const auto& st = s["stoppage"];
      c.stoppage.first = st.value("first", c.stoppage.first);
      c.stoppage.second = st.value("second", c.stoppage.second);
      c.stoppage.from_training = st.value("from_training", c.stoppage.from_training);
      c.stoppage.window = st.value("window", c.stoppage.window);
      c.stoppage.oracle = st.value("oracle", c.stoppage.oracle);
    }
  }
  if (j.contains("betting")) {
    const auto& b = j["betting"];
    c.lag = b.value("lag", c.lag);
    c.commission = b.value("commission", c.commission);
    c.ev_threshold = b.value("ev_threshold", c.ev_threshold);
    if (b.contains("modes")) {
      c.stake_modes.clear();
      for (const auto& m : b["modes"])
        c.stake_modes.push_back(m == "unit" ? StakeMode::Unit : StakeMode::Kelly);
    }
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    c.eval_from_gameweek = s.value("eval_from_gameweek", c.eval_from_gameweek);
    if (s.contains("season")) c.eval_season = s["season"].get<std::string>();
    c.refit_each_gameweek = s.value("refit_each_gameweek", c.refit_each_gameweek);
    c.max_eval_matches = s.value("max_eval_matches", c.max_eval_matches);
  }
  c.shape.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "config is not valid JSON: " + std::string(e.what()));
  }
  RunConfig c = parse_config(j);
  const auto base = path.parent_path();
  for (std::string* p : {&c.events_csv, &c.odds_csv, &c.ou_csv}) {
    if (p->empty()) continue;
    std::filesystem::path f(*p);
    if (f.is_relative()) f = base / f;
    if (!std::filesystem::exists(f))
      throw Error(ErrorCode::ConfigError, "referenced file does not exist: " + f.string());
    *p = f.string();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Splitting and fitting

Split split_dataset(const Dataset& dataset, const RunConfig& cfg) {
  Split s;
  for (const auto& m : dataset.timelines) {
    if (m.gameweek < cfg.eval_from_gameweek) continue;
    if (cfg.eval_season && m.season != *cfg.eval_season) continue;
    s.evaluation.push_back(&m);
  }
  if (cfg.max_eval_matches > 0 &&
      s.evaluation.size() > static_cast<std::size_t>(cfg.max_eval_matches))
    s.evaluation.resize(static_cast<std::size_t>(cfg.max_eval_matches));
  for (const MatchTimeline* m : s.evaluation) {
    auto it = s.gameweek_cutoff.find(m->gameweek);
    if (it == s.gameweek_cutoff.end() || m->date < it->second)
      s.gameweek_cutoff[m->gameweek] = m->date;
  }
  return s;
}

std::vector<MatchTimeline> training_before(const Dataset& dataset, Date cutoff) {
  std::vector<MatchTimeline> out;
  for (const auto& m : dataset.timelines)
    if (m.date < cutoff) out.push_back(m);
  return out;
}

WeibullModel fit_weibull(std::span<const MatchTimeline> training, Date as_of,
                         const RunConfig& cfg) {
  WeibullModel model;
  const DeviationMode mode = deviation_mode(cfg.covariates);
  if (mode == DeviationMode::Psxg) model.baseline = fit_psxg_baseline(training);
  if (mode == DeviationMode::Goals) model.baseline = fit_goals_baseline(training);
  std::vector<CovariatePath> paths;
  paths.reserve(training.size());
  for (const auto& m : training) paths.push_back(covariate_path(m, model.baseline, mode));

  FitOptions opt;
  opt.censor_width = cfg.censor_width;
  RatingsFit stage1 =
      fit_team_ratings(training, paths, as_of, cfg.xi, cfg.shape, CovariateModel::M0, opt);
  ShapeFit stage2 =
      fit_shape_and_covariates(training, paths, stage1.ratings, cfg.covariates, stage1.shape, opt);
  model.ratings = stage1.ratings;
  model.shape = stage2.shape;
  model.coeffs = stage2.coeffs;
  model.reports = {stage1.report, stage2.report};
  for (const auto& r : model.reports)
    model.warnings.insert(model.warnings.end(), r.warnings.begin(), r.warnings.end());
  return model;
}

std::vector<FitReport> covariate_model_reports(std::span<const MatchTimeline> training,
                                               Date as_of, const RunConfig& cfg) {
  FitOptions opt;
  opt.censor_width = cfg.censor_width;
  const RatingsFit stage1 = fit_team_ratings(training, {}, as_of, cfg.xi, cfg.shape,
                                             CovariateModel::M0, opt);
  std::vector<FitReport> reports;
  reports.reserve(4);
  for (CovariateModel spec :
       {CovariateModel::M0, CovariateModel::M1, CovariateModel::M2, CovariateModel::M3}) {
    const DeviationMode mode = deviation_mode(spec);
    LinearBaseline baseline;
    if (mode == DeviationMode::Psxg) baseline = fit_psxg_baseline(training);
    if (mode == DeviationMode::Goals) baseline = fit_goals_baseline(training);
    std::vector<CovariatePath> paths;
    paths.reserve(training.size());
    for (const auto& m : training) paths.push_back(covariate_path(m, baseline, mode));
    const FitReport* nested = reports.empty() ? nullptr
                              : spec == CovariateModel::M1 ? &reports[0]
                                                           : &reports[1];
    reports.push_back(fit_shape_and_covariates(training, paths, stage1.ratings, spec,
                                               stage1.shape, opt, nested)
                          .report);
  }
  return reports;
}

std::map<int, WeibullModel> rolling_refit(const Dataset& dataset, const RunConfig& cfg) {
  const Split split = split_dataset(dataset, cfg);
  std::map<int, WeibullModel> fits;
  std::optional<WeibullModel> single;
  for (const auto& [gw, cutoff] : split.gameweek_cutoff) {
    if (!cfg.refit_each_gameweek && single) {
      fits[gw] = *single;
      continue;
    }
    const auto training = training_before(dataset, cutoff);
    fits[gw] = fit_weibull(training, cutoff, cfg);
    if (!cfg.refit_each_gameweek) single = fits[gw];
  }
  return fits;
}

void ensure_team(RatingSet& ratings, const TeamId& team, std::vector<std::string>& warnings) {
  if (ratings.has(team)) return;
  ratings.attack[team] = 0.0;
  ratings.defence[team] = 0.0;
  warnings.push_back("team '" + team + "' has no history; ratings set to 0");
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::uint64_t point_seed(std::uint64_t seed, const std::string& id, int minute) {
  return derive_seed(seed, stable_hash(id + ":" + std::to_string(minute)));
}

struct CalibrationRow {
  std::string match_id;
  std::string model;
  double init_h = 0.0, init_a = 0.0, kappa_h = 0.0, kappa_a = 0.0, loss = 0.0;
  int iterations = 0;
  bool poor_fit = false;
};

std::pair<double, double> training_stoppage(const Dataset& ds, Date cutoff, int window) {
  std::vector<const MatchTimeline*> before;
  for (const auto& m : ds.timelines)
    if (m.date < cutoff) before.push_back(&m);
  if (before.empty()) throw Error(ErrorCode::DataGap, "no matches before the evaluation period");
  const std::size_t n = std::min(before.size(), static_cast<std::size_t>(window));
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = before.size() - n; i < before.size(); ++i) {
    s1 += before[i]->first_half_end - 45.0;
    s2 += before[i]->full_time - 90.0;
  }
  return {s1 / n, s2 / n};
}

void write_file(const std::filesystem::path& p, const std::string& text,
                std::vector<std::string>& outputs) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  outputs.push_back(p.filename().string());
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, const Dataset& dataset,
                                const std::filesystem::path& out_dir, bool run_betting) {
  ExperimentResult res;
  auto record = [&](const std::string& stage, const Error& e, const std::string& id) {
    res.errors.push_back({stage, std::string(to_string(e.code())), e.what(), id});
  };
  const std::set<std::string> models(cfg.models.begin(), cfg.models.end());
  for (const auto& m : models)
    if (m != "weibull" && m != "zou" && m != "maia" && m != "betfair")
      throw Error(ErrorCode::ConfigError, "unknown model '" + m + "'");

  std::vector<CalibrationRow> calib_rows;
  std::map<std::string, std::vector<BacktestPoint>> backtest_points;  // model -> filled per match
  std::map<std::string, std::vector<BacktestMatch>> backtests;

  try {
    const Split split = split_dataset(dataset, cfg);
    if (split.evaluation.empty()) res.warnings.push_back("no evaluation matches");

    double u1 = cfg.stoppage.first;
    double u2 = cfg.stoppage.second;
    if (cfg.stoppage.from_training && !split.gameweek_cutoff.empty())
      std::tie(u1, u2) =
          training_stoppage(dataset, split.gameweek_cutoff.begin()->second, cfg.stoppage.window);

    std::map<int, WeibullModel> weibull;
    std::map<int, ZouModel> zou;
    std::map<int, MaiaParams> maia;
    for (const auto& [gw, cutoff] : split.gameweek_cutoff) {
      const bool reuse = !cfg.refit_each_gameweek && gw != split.gameweek_cutoff.begin()->first;
      const int first = split.gameweek_cutoff.begin()->first;
      std::vector<MatchTimeline> training;
      if (!reuse) training = training_before(dataset, cutoff);
      if (reuse && models.count("weibull")) weibull[gw] = weibull[first];
      if (reuse && models.count("zou")) zou[gw] = zou[first];
      if (reuse && models.count("maia")) maia[gw] = maia[first];
      if (reuse) continue;
      if (training.empty())
        throw Error(ErrorCode::DataGap, "no training data before gameweek " + std::to_string(gw));
      if (models.count("weibull")) weibull[gw] = fit_weibull(training, cutoff, cfg);
      if (models.count("zou")) {
        zou[gw] = zou_fit(training);
        zou[gw].shared.stoppage1 = u1;
        zou[gw].shared.stoppage2 = u2;
      }
      if (models.count("maia")) maia[gw] = maia_fit(training, true);
    }

    for (const MatchTimeline* mp : split.evaluation) {
      const MatchTimeline& m = *mp;
      const auto mit = dataset.markets.find(m.match_id);
      const MarketSnapshot* market = mit == dataset.markets.end() ? nullptr : &mit->second;
      std::vector<EvaluationPoint> pts;
      std::map<std::string, std::vector<BacktestPoint>> bt;
      std::vector<CalibrationRow> cal;
      try {
        if (!has_complete_market(m, market, cfg.lag) || !has_complete_market(m, market, 0))
          throw Error(ErrorCode::DataGap, "incomplete market data for match " + m.match_id);
        const int minutes = m.evaluation_minutes();
        const Outcome y = m.outcome();
        CalibrationTarget target;
        if (cfg.calibrate) target = target_from_market(*market, 0);
        SimConfig sim;
        sim.n_paths = cfg.n_paths;
        sim.stoppage1 = u1;
        sim.stoppage2 = u2;
        if (cfg.stoppage.oracle) sim.oracle = MatchDurations{m.first_half_end, m.full_time};
        SimConfig calib_sim = sim;
        calib_sim.oracle.reset();
        calib_sim.seed = derive_seed(cfg.seed, stable_hash("calibrate:" + m.match_id));

        auto push = [&](const std::string& model, int minute, const ForecastTriple& f) {
          pts.push_back({m.match_id, minute, model, f, y});
          if (model != "betfair")
            bt[model].push_back(
                {minute, f, implied_probabilities(price_at(*market, minute, cfg.lag))});
        };

        if (models.count("betfair"))
          for (int t = 0; t < minutes; ++t)
            push("betfair", t, implied_probabilities(price_at(*market, t, 0)));

        if (models.count("weibull")) {
          WeibullModel wm = weibull.at(m.gameweek);
          ensure_team(wm.ratings, m.home, res.warnings);
          ensure_team(wm.ratings, m.away, res.warnings);
          EtaPair base = expected_log_time(wm.ratings, m.home, m.away);
          if (cfg.calibrate) {
            const CalibrationResult c = calibrate_match(base, target, wm.shape, calib_sim);
            cal.push_back({m.match_id, "weibull", base.home, base.away, c.eta_kappa.home,
                           c.eta_kappa.away, c.loss, c.iterations, c.poor_fit});
            base = c.eta_kappa;
          }
          const CovariatePath path = covariate_path(m, wm.baseline, deviation_mode(wm.covariates()));
          for (int t = 0; t < minutes; ++t) {
            const MatchState st = state_at(m, path, t);
            const EtaPair eta{base.home + covariate_effect(wm.coeffs, st.x_home),
                              base.away + covariate_effect(wm.coeffs, st.x_away)};
            SimConfig s = sim;
            s.seed = point_seed(cfg.seed, m.match_id, t);
            push("weibull", t, forecast(st, eta, wm.shape, s).probs);
          }
        }

        if (models.count("zou")) {
          ZouParams zp = zou.at(m.gameweek).for_match(m.home, m.away);
          if (cfg.calibrate) {
            const ZouCalibration c = zou_calibrate(target, zp);
            cal.push_back({m.match_id, "zou", std::log(zp.theta01), std::log(zp.theta02),
                           std::log(c.params.theta01), std::log(c.params.theta02), c.loss,
                           c.iterations, c.poor_fit});
            zp = c.params;
          }
          for (int t = 0; t < minutes; ++t)
            push("zou", t, zou_outcome_probs(zou_state(m, t, zp), zp).probs);
        }

        if (models.count("maia")) {
          MaiaParams mp2 = maia.at(m.gameweek);
          for (const TeamId* team : {&m.home, &m.away})
            if (!mp2.attack.count(*team)) {
              mp2.attack[*team] = 0.0;
              mp2.defence[*team] = 0.0;
              res.warnings.push_back("team '" + *team + "' has no Maia history");
            }
          MaiaComposite comp = mp2.composite(m.home, m.away);
          if (cfg.calibrate) {
            const MaiaCalibration c = maia_calibrate(target, comp, mp2, calib_sim);
            cal.push_back({m.match_id, "maia", comp.home, comp.away, c.composite.home,
                           c.composite.away, c.loss, c.iterations, c.poor_fit});
            comp = c.composite;
          }
          const CovariatePath path = covariate_path(m, mp2.psxg_baseline, DeviationMode::Psxg);
          for (int t = 0; t < minutes; ++t) {
            SimConfig s = sim;
            s.seed = point_seed(cfg.seed, m.match_id, t);
            push("maia", t, maia_forecast(maia_state(m, path, t), comp, mp2, s).probs);
          }
        }
      } catch (const Error& e) {
        record("forecast", e, m.match_id);
        continue;
      }
      res.points.insert(res.points.end(), pts.begin(), pts.end());
      calib_rows.insert(calib_rows.end(), cal.begin(), cal.end());
      std::vector<double> goals;
      for (const auto& e : m.events)
        if (e.kind == EventKind::Goal) goals.push_back(e.minute);
      for (auto& [model, points] : bt)
        backtests[model].push_back({m.match_id, m.outcome(), goals, std::move(points)});
    }

    if (!res.points.empty()) {
      const std::optional<std::string> bench =
          models.count("betfair") ? std::optional<std::string>("betfair") : std::nullopt;
      res.metrics = evaluate(res.points, bench);
    }
    if (run_betting)
      for (const auto& [model, matches] : backtests)
        for (StakeMode mode : cfg.stake_modes) {
          BettingConfig bc;
          bc.mode = mode;
          bc.commission = cfg.commission;
          bc.ev_threshold = cfg.ev_threshold;
          res.betting.emplace_back(model + "/" + (mode == StakeMode::Unit ? "unit" : "kelly"),
                                   run_backtest(matches, bc));
        }
  } catch (const Error& e) {
    record("experiment", e, "");
  }

  if (out_dir.empty()) return res;
  std::filesystem::create_directories(out_dir);
  {
    std::ostringstream s;
    s << "match_id,minute,model,p_home,p_draw,p_away,outcome\n";
    for (const auto& p : res.points)
      s << p.match_id << "," << p.minute << "," << p.model << "," << fmt(p.forecast.home) << ","
        << fmt(p.forecast.draw) << "," << fmt(p.forecast.away) << "," << outcome_code(p.outcome)
        << "\n";
    write_file(out_dir / "forecasts.csv", s.str(), res.outputs);
  }
  if (!res.metrics.empty()) {
    std::ostringstream agg, pre, curve;
    agg << "model,accuracy,rps,log_loss,n_points\n";
    pre << "model,accuracy,rps,log_loss,n_points\n";
    curve << "minute,model,n,accuracy,mean_rps,mean_log_loss,delta_log_loss,delta_rps\n";
    for (const auto& r : res.metrics) {
      agg << r.model << "," << fmt(r.accuracy) << "," << fmt(r.rps) << "," << fmt(r.log_loss)
          << "," << r.n_points << "\n";
      for (const auto& mm : r.per_minute) {
        if (mm.minute == 0)
          pre << r.model << "," << fmt(mm.accuracy) << "," << fmt(mm.rps) << ","
              << fmt(mm.log_loss) << "," << mm.n << "\n";
        curve << mm.minute << "," << r.model << "," << mm.n << "," << fmt(mm.accuracy) << ","
              << fmt(mm.rps) << "," << fmt(mm.log_loss) << ","
              << (mm.delta_log_loss ? fmt(*mm.delta_log_loss) : "") << ","
              << (mm.delta_rps ? fmt(*mm.delta_rps) : "") << "\n";
      }
    }
    write_file(out_dir / "metrics.csv", agg.str(), res.outputs);
    write_file(out_dir / "prematch.csv", pre.str(), res.outputs);
    write_file(out_dir / "per_minute.csv", curve.str(), res.outputs);
  }
  if (!calib_rows.empty()) {
    std::ostringstream s;
    s << "match_id,model,eta_init_H,eta_init_A,eta_kappa_H,eta_kappa_A,shift_H,shift_A,loss,"
         "iterations,poor_fit\n";
    for (const auto& c : calib_rows)
      s << c.match_id << "," << c.model << "," << fmt(c.init_h) << "," << fmt(c.init_a) << ","
        << fmt(c.kappa_h) << "," << fmt(c.kappa_a) << "," << fmt(c.kappa_h - c.init_h) << ","
        << fmt(c.kappa_a - c.init_a) << "," << fmt(c.loss) << "," << c.iterations << ","
        << (c.poor_fit ? 1 : 0) << "\n";
    write_file(out_dir / "calibration.csv", s.str(), res.outputs);
  }
  if (!res.betting.empty()) {
    std::ostringstream summary, bets, pnl, sweep;
    summary << "model,mode,bets,win_pct,staked,net_profit,roi_pct,sharpe,window_bets,"
               "window_gross_roi_pct,outside_bets,outside_gross_roi_pct\n";
    bets << "model,mode,match_id,minute,outcome,stake,odds,p_model,q_market,ev,settled,won,"
            "in_goal_window\n";
    pnl << "model,mode,match_id,net,cumulative\n";
    sweep << "model,mode,ev_threshold,bets,staked,net_profit,roi_pct\n";
    for (const auto& [label, r] : res.betting) {
      const auto slash = label.find('/');
      const std::string tag = label.substr(0, slash) + "," + label.substr(slash + 1);
      summary << tag << "," << r.bets << "," << fmt(r.win_pct) << "," << fmt(r.staked) << ","
              << fmt(r.net_profit) << "," << fmt(r.roi_pct) << "," << fmt(r.sharpe) << ","
              << r.in_window.bets << "," << fmt(r.in_window.gross_roi_pct) << ","
              << r.outside_window.bets << "," << fmt(r.outside_window.gross_roi_pct) << "\n";
      for (const auto& b : r.records)
        bets << tag << "," << b.match_id << "," << b.minute << "," << outcome_code(b.outcome)
             << "," << fmt(b.stake) << "," << fmt(b.odds) << "," << fmt(b.p) << "," << fmt(b.q)
             << "," << fmt(b.ev) << "," << fmt(b.settled) << "," << (b.won ? 1 : 0) << ","
             << (b.in_goal_window ? 1 : 0) << "\n";
      for (const auto& p : r.pnl_curve)
        pnl << tag << "," << p.match_id << "," << fmt(p.net) << "," << fmt(p.cumulative) << "\n";
      for (const auto& row : r.ev_sweep)
        sweep << tag << "," << fmt(row.threshold) << "," << row.bets << "," << fmt(row.staked)
              << "," << fmt(row.net_profit) << "," << fmt(row.roi_pct) << "\n";
    }
    write_file(out_dir / "betting_summary.csv", summary.str(), res.outputs);
    write_file(out_dir / "bets.csv", bets.str(), res.outputs);
    write_file(out_dir / "pnl_curve.csv", pnl.str(), res.outputs);
    write_file(out_dir / "ev_sweep.csv", sweep.str(), res.outputs);
  }
  json manifest;
  manifest["status"] = res.errors.empty() ? "ok" : "partial";
  manifest["errors"] = json::array();
  for (const auto& e : res.errors)
    manifest["errors"].push_back(
        {{"stage", e.stage}, {"code", e.code}, {"message", e.message}, {"match_id", e.match_id}});
  manifest["warnings"] = res.warnings;
  manifest["outputs"] = res.outputs;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  return res;
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

double normal(PathRng& rng) {
  return std::sqrt(-2.0 * std::log(rng.uniform())) * std::cos(6.283185307179586 * rng.uniform());
}

std::string two_digits(int v) {
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << v;
  return s.str();
}

// Circle-method single round robin: rounds of (home, away) index pairs.
std::vector<std::vector<std::pair<int, int>>> round_robin(int n) {
  std::vector<int> ring(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ring[static_cast<std::size_t>(i)] = i;
  std::vector<std::vector<std::pair<int, int>>> rounds;
  for (int r = 0; r < n - 1; ++r) {
    std::vector<std::pair<int, int>> games;
    for (int i = 0; i < n / 2; ++i) {
      int a = ring[static_cast<std::size_t>(i)];
      int b = ring[static_cast<std::size_t>(n - 1 - i)];
      if ((r + i) % 2 == 1) std::swap(a, b);
      games.emplace_back(a, b);
    }
    rounds.push_back(games);
    std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
  }
  return rounds;
}

OddsTriple odds_from(const ForecastTriple& p, double overround) {
  auto o = [&](double x) { return std::max(1.01, 1.0 / (std::max(x, 0.002) * overround)); };
  return {o(p.home), o(p.draw), o(p.away)};
}

}  // namespace

SynthResult synthesize(const SynthConfig& cfg) {
  if (cfg.n_teams < 2 || cfg.n_teams % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "synthetic leagues need an even number of teams");
  SynthResult out;
  WeibullModel& truth = out.truth;
  truth.shape = cfg.shape;
  truth.coeffs = cfg.coeffs;
  truth.ratings.mu = cfg.mu;
  truth.ratings.beta_home = cfg.beta_home;
  PathRng team_rng(cfg.seed, 0xfeedULL);
  std::vector<TeamId> teams;
  double sa = 0.0, sd = 0.0;
  for (int i = 0; i < cfg.n_teams; ++i) {
    teams.push_back("T" + two_digits(i + 1));
    truth.ratings.attack[teams.back()] = cfg.team_sd * normal(team_rng);
    truth.ratings.defence[teams.back()] = cfg.team_sd * normal(team_rng);
    sa += truth.ratings.attack[teams.back()];
    sd += truth.ratings.defence[teams.back()];
  }
  for (const auto& t : teams) {
    truth.ratings.attack[t] -= sa / cfg.n_teams;
    truth.ratings.defence[t] -= sd / cfg.n_teams;
  }
  const double slope = cfg.shot_rate * cfg.on_target * cfg.psxg_mean;
  truth.baseline = {slope, 0.0, 0};

  GeneratorConfig gen;
  gen.red_rate = cfg.red_rate;
  gen.shot_rate = cfg.shot_rate;
  gen.on_target = cfg.on_target;
  gen.psxg_mean = cfg.psxg_mean;
  gen.psxg_baseline = truth.baseline;
  gen.goals_baseline = {slope, 0.0, 0};
  gen.time_resolution = cfg.time_resolution;

  const auto single = round_robin(cfg.n_teams);
  const Date start = parse_date(cfg.start_date);
  const DeviationMode mode = cfg.coeffs.goals  ? DeviationMode::Goals
                             : cfg.coeffs.psxg ? DeviationMode::Psxg
                                               : DeviationMode::None;
  for (int s = 0; s < cfg.seasons; ++s) {
    const int rounds = static_cast<int>(single.size());
    for (int gw = 1; gw <= 2 * rounds; ++gw) {
      const auto& games = single[static_cast<std::size_t>((gw - 1) % rounds)];
      const Date date = start + std::chrono::days(365 * s + 7 * (gw - 1));
      for (auto [h, a] : games) {
        if (gw > rounds) std::swap(h, a);
        const TeamId& home = teams[static_cast<std::size_t>(h)];
        const TeamId& away = teams[static_cast<std::size_t>(a)];
        const std::string id =
            "S" + std::to_string(s + 1) + "-GW" + two_digits(gw) + "-" + home + "-" + away;
        PathRng rng(derive_seed(cfg.seed, stable_hash(id)), 0);
        MatchTimeline m = generate_match(truth.ratings, truth.shape, truth.coeffs, home, away, gen, rng);
        m.match_id = id;
        m.date = date;
        m.season = "S" + std::to_string(s + 1);
        m.gameweek = gw;
        m.validate();

        if (cfg.market_paths > 0) {
          MarketSnapshot snap;
          const CovariatePath path = covariate_path(m, mode == DeviationMode::Goals ? gen.goals_baseline : truth.baseline, mode);
          const EtaPair base = expected_log_time(truth.ratings, home, away);
          SimConfig sim;
          sim.n_paths = cfg.market_paths;
          sim.oracle = MatchDurations{m.first_half_end, m.full_time};
          const int last = m.evaluation_minutes() + 2;
          for (int t = 0; t <= last; ++t) {
            const MatchState st = state_at(m, path, t);
            sim.seed = derive_seed(cfg.seed, stable_hash("market:" + id));
            const EtaPair eta{base.home + covariate_effect(truth.coeffs, st.x_home),
                              base.away + covariate_effect(truth.coeffs, st.x_away)};
            const SimForecast f = forecast(st, eta, truth.shape, sim);
            snap.by_minute[t] = odds_from(f.probs, cfg.overround);
            if (t == 0)
              for (std::size_t g = 0; g < kGoalThresholds.size(); ++g) {
                const double po = f.over[g];
                auto o = [&](double x) { return std::max(1.01, 1.0 / (std::max(x, 0.002) * cfg.overround)); };
                snap.over_under[kGoalThresholds[g]] = {o(po), o(1.0 - po)};
              }
          }
          out.dataset.markets[id] = std::move(snap);
        }
        out.dataset.timelines.push_back(std::move(m));
      }
    }
  }
  std::sort(out.dataset.timelines.begin(), out.dataset.timelines.end(),
            [](const MatchTimeline& a, const MatchTimeline& b) {
              return std::tie(a.date, a.match_id) < std::tie(b.date, b.match_id);
            });
  return out;
}

}  // namespace inplay
