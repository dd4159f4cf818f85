#include "inplay/serialize.hpp"

namespace inplay {

using nlohmann::json;

namespace {

void expect_tag(const json& j, const char* tag) {
  if (!j.is_object() || j.value("model", std::string()) != tag)
    throw Error(ErrorCode::ConfigError, std::string("expected a '") + tag + "' model document");
}

json shape_json(const ShapeSpec& s) {
  const char* kind = s.kind == ShapeKind::Single         ? "single"
                     : s.kind == ShapeKind::HalfSpecific ? "half_specific"
                                                         : "score_state";
  json g = json::array();
  for (int i = 0; i < s.size(); ++i) g.push_back(s.gamma[static_cast<std::size_t>(i)]);
  return {{"kind", kind}, {"gamma", g}};
}

ShapeSpec shape_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto g = j.at("gamma").get<std::vector<double>>();
  auto need = [&](std::size_t n) {
    if (g.size() != n) throw Error(ErrorCode::ConfigError, "shape '" + kind + "' needs " +
                                                               std::to_string(n) + " values");
  };
  if (kind == "single") {
    need(1);
    return ShapeSpec::single(g[0]);
  }
  if (kind == "half_specific") {
    need(2);
    return ShapeSpec::half_specific(g[0], g[1]);
  }
  if (kind == "score_state") {
    need(3);
    return ShapeSpec::score_state(g[0], g[1], g[2]);
  }
  throw Error(ErrorCode::ConfigError, "unknown shape kind '" + kind + "'");
}

json coeffs_json(const CovariateCoeffs& c) {
  json j = json::object();
  if (c.red) j["red"] = *c.red;
  if (c.goals) j["goals"] = *c.goals;
  if (c.psxg) j["psxg"] = *c.psxg;
  return j;
}

CovariateCoeffs coeffs_from(const json& j) {
  CovariateCoeffs c;
  if (j.contains("red")) c.red = j["red"].get<double>();
  if (j.contains("goals")) c.goals = j["goals"].get<double>();
  if (j.contains("psxg")) c.psxg = j["psxg"].get<double>();
  c.validate();
  return c;
}

json baseline_json(const LinearBaseline& b) {
  return {{"slope", b.slope}, {"intercept", b.intercept}, {"n_points", b.n_points}};
}

LinearBaseline baseline_from(const json& j) {
  return {j.at("slope").get<double>(), j.at("intercept").get<double>(),
          j.value("n_points", std::size_t{0})};
}

json stoppage_json(const StoppageModel& s) {
  return {{"intercept", s.intercept}, {"red", s.red}, {"goals", s.goals}, {"close", s.close}};
}

StoppageModel stoppage_from(const json& j) {
  return {j.at("intercept").get<double>(), j.at("red").get<double>(),
          j.at("goals").get<double>(), j.value("close", 0.0)};
}

}  // namespace

json to_json(const FitReport& r) {
  json est = json::array();
  for (const auto& e : r.estimates) {
    json x = {{"name", e.name}, {"value", e.value}};
    x["se"] = e.se ? json(*e.se) : json(nullptr);
    est.push_back(x);
  }
  json lrt = json::object();
  for (const auto& [k, p] : r.lrt_p) lrt[k] = p;
  return {{"label", r.label},       {"estimates", est},      {"loglik", r.loglik},
          {"k", r.k},               {"n_obs", r.n_obs},      {"bic", r.bic},
          {"lrt_p", lrt},           {"warnings", r.warnings}, {"converged", r.converged},
          {"iterations", r.iterations}};
}

json to_json(const WeibullModel& m) {
  json reports = json::array();
  for (const auto& r : m.reports) reports.push_back(to_json(r));
  return {{"model", "weibull"},
          {"mu", m.ratings.mu},
          {"beta_home", m.ratings.beta_home},
          {"attack", m.ratings.attack},
          {"defence", m.ratings.defence},
          {"as_of", format_date(m.ratings.as_of)},
          {"decay_xi", m.ratings.decay_xi},
          {"shape", shape_json(m.shape)},
          {"coefficients", coeffs_json(m.coeffs)},
          {"psxg_baseline", baseline_json(m.baseline)},
          {"reports", reports},
          {"warnings", m.warnings}};
}

WeibullModel weibull_from_json(const json& j) {
  expect_tag(j, "weibull");
  WeibullModel m;
  m.ratings.mu = j.at("mu").get<double>();
  m.ratings.beta_home = j.at("beta_home").get<double>();
  m.ratings.attack = j.at("attack").get<std::map<TeamId, double>>();
  m.ratings.defence = j.at("defence").get<std::map<TeamId, double>>();
  m.ratings.as_of = parse_date(j.at("as_of").get<std::string>());
  m.ratings.decay_xi = j.at("decay_xi").get<double>();
  m.shape = shape_from(j.at("shape"));
  m.coeffs = coeffs_from(j.at("coefficients"));
  m.baseline = baseline_from(j.at("psxg_baseline"));
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

json to_json(const ZouModel& z) {
  json coef = json::object();
  for (std::size_t i = 0; i < z.intensity.names.size(); ++i)
    coef[z.intensity.names[i]] = z.intensity.coef[static_cast<Eigen::Index>(i)];
  return {{"model", "zou"},
          {"intercept", z.intensity.intercept},
          {"attack", z.intensity.attack},
          {"defence", z.intensity.defence},
          {"coefficients", coef},
          {"state_mult", z.shared.state_mult},
          {"half2_mult", z.shared.half2_mult},
          {"stoppage1", z.shared.stoppage1},
          {"stoppage2", z.shared.stoppage2}};
}

ZouModel zou_from_json(const json& j) {
  expect_tag(j, "zou");
  ZouModel z;
  z.intensity.intercept = j.at("intercept").get<double>();
  z.intensity.attack = j.at("attack").get<std::map<TeamId, double>>();
  z.intensity.defence = j.at("defence").get<std::map<TeamId, double>>();
  const auto coef = j.at("coefficients").get<std::map<std::string, double>>();
  z.intensity.coef.resize(static_cast<Eigen::Index>(coef.size()));
  Eigen::Index i = 0;
  for (const auto& [name, v] : coef) {
    z.intensity.names.push_back(name);
    z.intensity.coef[i++] = v;
  }
  z.shared.state_mult = j.at("state_mult").get<std::array<double, 3>>();
  z.shared.half2_mult = j.at("half2_mult").get<double>();
  z.shared.stoppage1 = j.at("stoppage1").get<double>();
  z.shared.stoppage2 = j.at("stoppage2").get<double>();
  return z;
}

json to_json(const MaiaParams& p) {
  return {{"model", "maia"},
          {"intercept", p.intercept},
          {"home", p.home},
          {"attack", p.attack},
          {"defence", p.defence},
          {"xi_half", p.xi_half},
          {"xi_gd", p.xi_gd},
          {"xi_rc", p.xi_rc},
          {"xi_psxg", p.xi_psxg},
          {"red_scale", p.red_scale},
          {"red_power", p.red_power},
          {"stoppage1", stoppage_json(p.stoppage1)},
          {"stoppage2", stoppage_json(p.stoppage2)},
          {"psxg_baseline", baseline_json(p.psxg_baseline)},
          {"warnings", p.warnings}};
}

MaiaParams maia_from_json(const json& j) {
  expect_tag(j, "maia");
  MaiaParams p;
  p.intercept = j.at("intercept").get<double>();
  p.home = j.at("home").get<double>();
  p.attack = j.at("attack").get<std::map<TeamId, double>>();
  p.defence = j.at("defence").get<std::map<TeamId, double>>();
  p.xi_half = j.at("xi_half").get<double>();
  p.xi_gd = j.at("xi_gd").get<double>();
  p.xi_rc = j.at("xi_rc").get<double>();
  p.xi_psxg = j.at("xi_psxg").get<double>();
  p.red_scale = j.at("red_scale").get<double>();
  p.red_power = j.at("red_power").get<double>();
  p.stoppage1 = stoppage_from(j.at("stoppage1"));
  p.stoppage2 = stoppage_from(j.at("stoppage2"));
  p.psxg_baseline = baseline_from(j.at("psxg_baseline"));
  p.warnings = j.value("warnings", std::vector<std::string>{});
  return p;
}

}  // namespace inplay
