#include "inplay/aft.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unsupported/Eigen/SpecialFunctions>

#include "inplay/optimize.hpp"

namespace inplay {

int ShapeSpec::size() const {
  switch (kind) {
    case ShapeKind::Single: return 1;
    case ShapeKind::HalfSpecific: return 2;
    case ShapeKind::ScoreState: return 3;
  }
  return 1;
}

int ShapeSpec::slot(int half, ScoreState state) const {
  switch (kind) {
    case ShapeKind::Single: return 0;
    case ShapeKind::HalfSpecific: return half == 1 ? 0 : 1;
    case ShapeKind::ScoreState: return static_cast<int>(state);
  }
  return 0;
}

std::vector<std::string> ShapeSpec::names() const {
  switch (kind) {
    case ShapeKind::Single: return {"gamma"};
    case ShapeKind::HalfSpecific: return {"gamma_1H", "gamma_2H"};
    case ShapeKind::ScoreState:
      return {"gamma_leading", "gamma_tied", "gamma_trailing"};
  }
  return {};
}

void ShapeSpec::validate() const {
  for (int i = 0; i < size(); ++i)
    if (!(gamma[static_cast<std::size_t>(i)] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "Weibull shape must be positive");
}

std::string_view to_string(CovariateModel model) {
  switch (model) {
    case CovariateModel::M0: return "M0";
    case CovariateModel::M1: return "M1";
    case CovariateModel::M2: return "M2";
    case CovariateModel::M3: return "M3";
  }
  return "M0";
}

CovariateModel parse_covariate_model(std::string_view text) {
  if (text == "M0") return CovariateModel::M0;
  if (text == "M1") return CovariateModel::M1;
  if (text == "M2") return CovariateModel::M2;
  if (text == "M3") return CovariateModel::M3;
  throw Error(ErrorCode::ConfigError,
              "unknown covariate model '" + std::string(text) + "'");
}

DeviationMode deviation_mode(CovariateModel model) {
  switch (model) {
    case CovariateModel::M2: return DeviationMode::Goals;
    case CovariateModel::M3: return DeviationMode::Psxg;
    default: return DeviationMode::None;
  }
}

std::string_view to_string(BoundaryMode mode) {
  return mode == BoundaryMode::Reset ? "reset" : "continuous";
}

CovariateCoeffs CovariateCoeffs::zeros(CovariateModel model) {
  CovariateCoeffs c;
  if (model != CovariateModel::M0) c.red = 0.0;
  if (model == CovariateModel::M2) c.goals = 0.0;
  if (model == CovariateModel::M3) c.psxg = 0.0;
  return c;
}

CovariateModel CovariateCoeffs::model() const {
  if (goals) return CovariateModel::M2;
  if (psxg) return CovariateModel::M3;
  if (red) return CovariateModel::M1;
  return CovariateModel::M0;
}

void CovariateCoeffs::validate() const {
  if (goals && psxg)
    throw Error(ErrorCode::InvalidArgument,
                "goals and PSxG deviation coefficients are exclusive");
}

double RatingSet::attack_of(const TeamId& team) const {
  auto it = attack.find(team);
  if (it == attack.end())
    throw Error(ErrorCode::MissingTeam, "no rating for team '" + team + "'");
  return it->second;
}

double RatingSet::defence_of(const TeamId& team) const {
  auto it = defence.find(team);
  if (it == defence.end())
    throw Error(ErrorCode::MissingTeam, "no rating for team '" + team + "'");
  return it->second;
}

EtaPair expected_log_time(const RatingSet& ratings, const TeamId& home,
                          const TeamId& away, const CovariateValues& x_home,
                          const CovariateValues& x_away,
                          const CovariateCoeffs& coeffs) {
  EtaPair eta;
  eta.home = ratings.mu + ratings.beta_home + ratings.attack_of(home) +
             ratings.defence_of(away) + covariate_effect(coeffs, x_home);
  eta.away = ratings.mu + ratings.attack_of(away) + ratings.defence_of(home) +
             covariate_effect(coeffs, x_away);
  return eta;
}

// ---------------------------------------------------------------------------
// Spell construction

namespace {

void append_segments(std::vector<CovariateSegment>& out,
                     const CovariatePath& path, Side side, double start,
                     double end) {
  CovariateValues current = path.at(start, side);
  for (const auto& p : path.points) {
    if (p.minute <= start) continue;
    if (p.minute >= end) break;
    const CovariateValues& next = p.of(side);
    if (next.red == current.red && next.dev == current.dev) continue;
    out.push_back({p.minute, current});
    current = next;
  }
  out.push_back({end, current});
}

}  // namespace

std::vector<SpellRecord> build_spells(const MatchTimeline& timeline,
                                      const CovariatePath& path,
                                      BoundaryMode mode) {
  struct Goal {
    double minute;
    Side side;
    int half;
  };
  std::vector<Goal> goals;
  for (const auto& e : timeline.events)
    if (e.kind == EventKind::Goal)
      goals.push_back({e.minute, timeline.side_of(e.team), e.half});

  std::vector<SpellRecord> spells;
  int score[2] = {0, 0};

  auto emit = [&](double start, double end, int half,
                  std::optional<Side> scorer) {
    for (Side side : {Side::Home, Side::Away}) {
      const bool scored = scorer && *scorer == side;
      // A zero-length censored spell carries no information.
      if (end <= start && !scored) continue;
      SpellRecord r;
      r.side = side;
      r.start = start;
      r.end = std::max(end, start);
      r.terminal = scored ? SpellEnd::Goal : SpellEnd::Censored;
      r.half = half;
      r.state = score_state(score[index(side)], score[index(other(side))]);
      append_segments(r.segments, path, side, start, r.end);
      spells.push_back(std::move(r));
    }
  };

  auto run = [&](double begin, double finish, int half, auto in_range) {
    double start = begin;
    for (const auto& g : goals) {
      if (!in_range(g)) continue;
      emit(start, g.minute, mode == BoundaryMode::Reset ? half : timeline.half_at(start), g.side);
      ++score[index(g.side)];
      start = g.minute;
    }
    const double stop = std::max(finish, start);
    if (stop > start)
      emit(start, stop, mode == BoundaryMode::Reset ? half : timeline.half_at(start),
           std::nullopt);
  };

  if (mode == BoundaryMode::Reset) {
    run(0.0, timeline.first_half_end, 1, [](const Goal& g) { return g.half == 1; });
    run(timeline.first_half_end, timeline.full_time, 2,
        [](const Goal& g) { return g.half == 2; });
  } else {
    run(0.0, timeline.full_time, 1, [](const Goal&) { return true; });
  }
  return spells;
}

GoalSpell attach_eta(const SpellRecord& record, double base_eta,
                     const CovariateCoeffs& coeffs) {
  GoalSpell spell;
  spell.side = record.side;
  spell.start = record.start;
  spell.end = record.end;
  spell.terminal = record.terminal;
  spell.half = record.half;
  spell.state = record.state;
  for (const auto& seg : record.segments)
    spell.eta_path.push_back({seg.end, base_eta + covariate_effect(coeffs, seg.x)});
  return spell;
}

// ---------------------------------------------------------------------------
// Likelihood kernel

namespace {

// Cumulative hazard over elapsed-time window [a, b] of a spell whose
// piecewise-constant log-rates change at `bounds`; the last segment extends
// past its nominal end. Fills d/d(eta_i) (scaled by `mult`) and d/d(gamma).
struct HazardWindow {
  double value = 0.0;
  double dgamma = 0.0;
};

HazardWindow window_hazard(double a, double b, double gamma, double lg, double dc,
                           std::span<const double> bounds,
                           std::span<const double> eta,
                           std::span<const double> rate,
                           double mult, std::span<double> deta) {
  HazardWindow w;
  double lower = 0.0;
  const std::size_t n = bounds.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double upper = i + 1 == n ? std::numeric_limits<double>::infinity() : bounds[i];
    const double lo = std::max(a, lower);
    const double hi = std::min(b, upper);
    lower = upper;
    if (hi <= lo) continue;
    const double p_hi = std::pow(hi, gamma);
    const double p_lo = lo > 0.0 ? std::pow(lo, gamma) : 0.0;
    const double delta = p_hi - p_lo;
    const double h = rate[i] * delta;
    w.value += h;
    if (!deta.empty()) {
      deta[i] += mult * (-gamma * h);
      const double log_term = p_hi * std::log(hi) - (lo > 0.0 ? p_lo * std::log(lo) : 0.0);
      // d(log rate)/d(gamma) = c(gamma) - eta + gamma c'(gamma)
      const double log_rate_dg = lg - eta[i] + dc;
      w.dgamma += rate[i] * (log_rate_dg * delta + log_term);
    }
    if (hi >= b) break;
  }
  return w;
}

struct SpellContribution {
  double value = 0.0;
  double dgamma = 0.0;
};

// `bounds` are elapsed segment ends, the last equal to the spell length.
SpellContribution spell_contribution(bool goal, double length, double gamma,
                                     double censor_width,
                                     std::span<const double> bounds,
                                     std::span<const double> eta,
                                     std::span<const double> rate,
                                     std::span<double> deta) {
  const double lg = std::lgamma(1.0 + 1.0 / gamma);
  const double dc = -Eigen::numext::digamma(1.0 + 1.0 / gamma) / gamma;
  SpellContribution out;
  if (!goal) {
    auto h = window_hazard(0.0, length, gamma, lg, dc, bounds, eta, rate, -1.0, deta);
    out.value = -h.value;
    out.dgamma = -h.dgamma;
    return out;
  }
  const double lo = std::max(0.0, length - censor_width);
  double hi = length;
  if (hi - lo < 1e-9) hi = lo + censor_width;
  // Value pass for the goal window first: its multiplier needs D.
  auto d_val = window_hazard(lo, hi, gamma, lg, dc, bounds, eta, rate, 0.0, {});
  const double d = d_val.value;
  const double dd = 1.0 / std::expm1(d);
  auto h1 = window_hazard(0.0, lo, gamma, lg, dc, bounds, eta, rate, -1.0, deta);
  auto h2 = window_hazard(lo, hi, gamma, lg, dc, bounds, eta, rate, dd, deta);
  out.value = -h1.value + std::log(-std::expm1(-d));
  out.dgamma = -h1.dgamma + dd * h2.dgamma;
  return out;
}

}  // namespace

double spell_log_likelihood(const GoalSpell& spell, const ShapeSpec& shape,
                            double censor_width) {
  shape.validate();
  if (spell.eta_path.empty() || spell.end < spell.start)
    throw Error(ErrorCode::InvalidArgument, "malformed spell");
  const double gamma = shape.resolve(spell.half, spell.state);
  std::vector<double> bounds, eta, rate;
  for (const auto& seg : spell.eta_path) {
    bounds.push_back(seg.end - spell.start);
    eta.push_back(seg.eta);
    rate.push_back(rate_from_eta(seg.eta, gamma));
  }
  const double v = spell_contribution(spell.terminal == SpellEnd::Goal,
                                      spell.end - spell.start, gamma,
                                      censor_width, bounds, eta, rate, {})
                       .value;
  if (!std::isfinite(v))
    throw Error(ErrorCode::NumericOverflow, "spell log-likelihood not finite");
  return v;
}

std::vector<double> decay_weights(std::span<const Date> match_dates, Date as_of,
                                  double xi) {
  std::vector<double> w;
  w.reserve(match_dates.size());
  for (Date d : match_dates) {
    const auto days = (as_of - d).count();
    if (days < 0)
      throw Error(ErrorCode::InvalidDate,
                  "match dated " + format_date(d) + " is after " + format_date(as_of));
    w.push_back(std::exp(-xi * static_cast<double>(days) / 3.5));
  }
  return w;
}

const Estimate* FitReport::find(std::string_view name) const {
  for (const auto& e : estimates)
    if (e.name == name) return &e;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

struct FlatSpell {
  int attack = 0;
  int defence = 0;
  bool home = false;
  int slot = 0;
  bool goal = false;
  double length = 0.0;
  double weight = 1.0;
  std::size_t seg_begin = 0;
  std::size_t seg_end = 0;
};

struct SpellTable {
  std::vector<FlatSpell> spells;
  std::vector<double> bounds;  // elapsed segment ends
  std::vector<double> red;
  std::vector<double> dev;
  std::vector<TeamId> teams;
  int n_slots = 1;
  double censor_width = 1.0;
};

int team_index(const std::vector<TeamId>& teams, const TeamId& t) {
  auto it = std::lower_bound(teams.begin(), teams.end(), t);
  if (it == teams.end() || *it != t)
    throw Error(ErrorCode::MissingTeam, "unknown team '" + t + "'");
  return static_cast<int>(it - teams.begin());
}

SpellTable make_table(std::span<const MatchTimeline> matches,
                      std::span<const CovariatePath> paths,
                      std::span<const double> weights, const ShapeSpec& shape,
                      const FitOptions& options, std::vector<TeamId> teams) {
  if (!paths.empty() && paths.size() != matches.size())
    throw Error(ErrorCode::InvalidArgument, "one covariate path per match required");
  if (shape.kind == ShapeKind::HalfSpecific && options.boundary != BoundaryMode::Reset)
    throw Error(ErrorCode::InvalidArgument,
                "half-specific shapes require the reset boundary mode");
  SpellTable table;
  table.teams = std::move(teams);
  table.n_slots = shape.size();
  table.censor_width = options.censor_width;
  const CovariatePath none = zero_path();
  for (std::size_t m = 0; m < matches.size(); ++m) {
    const auto& match = matches[m];
    const CovariatePath& path = paths.empty() ? none : paths[m];
    const int ih = team_index(table.teams, match.home);
    const int ia = team_index(table.teams, match.away);
    for (const auto& rec : build_spells(match, path, options.boundary)) {
      FlatSpell s;
      const bool home = rec.side == Side::Home;
      s.attack = home ? ih : ia;
      s.defence = home ? ia : ih;
      s.home = home;
      s.slot = shape.slot(rec.half, rec.state);
      s.goal = rec.terminal == SpellEnd::Goal;
      s.length = rec.end - rec.start;
      s.weight = weights.empty() ? 1.0 : weights[m];
      s.seg_begin = table.bounds.size();
      for (const auto& seg : rec.segments) {
        table.bounds.push_back(seg.end - rec.start);
        table.red.push_back(seg.x.red);
        table.dev.push_back(seg.x.dev);
      }
      s.seg_end = table.bounds.size();
      table.spells.push_back(s);
    }
  }
  return table;
}

struct Params {
  double mu = 0.0;
  double beta_home = 0.0;
  Eigen::VectorXd attack;
  Eigen::VectorXd defence;
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
  double beta_red = 0.0;
  double beta_dev = 0.0;
};

struct Gradient {
  double mu = 0.0;
  double beta_home = 0.0;
  Eigen::VectorXd attack;
  Eigen::VectorXd defence;
  std::array<double, 3> gamma{0.0, 0.0, 0.0};
  double beta_red = 0.0;
  double beta_dev = 0.0;
};

double table_loglik(const SpellTable& t, const Params& p, Gradient* g) {
  const int n_teams = static_cast<int>(t.teams.size());
  if (g) {
    *g = Gradient{};
    g->attack = Eigen::VectorXd::Zero(n_teams);
    g->defence = Eigen::VectorXd::Zero(n_teams);
  }
  std::vector<double> eta, rate, deta;
  double total = 0.0;
  for (const auto& s : t.spells) {
    const std::size_t n = s.seg_end - s.seg_begin;
    const double gamma = p.gamma[static_cast<std::size_t>(s.slot)];
    const double base = p.mu + (s.home ? p.beta_home : 0.0) + p.attack[s.attack] +
                        p.defence[s.defence];
    const double lg = std::lgamma(1.0 + 1.0 / gamma);
    eta.resize(n);
    rate.resize(n);
    deta.assign(g ? n : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = s.seg_begin + i;
      eta[i] = base + p.beta_red * t.red[k] + p.beta_dev * t.dev[k];
      rate[i] = std::exp(gamma * (lg - eta[i]));
    }
    const std::span<const double> bounds(t.bounds.data() + s.seg_begin, n);
    auto c = spell_contribution(s.goal, s.length, gamma, t.censor_width, bounds,
                                eta, rate, deta);
    total += s.weight * c.value;
    if (g) {
      g->gamma[static_cast<std::size_t>(s.slot)] += s.weight * c.dgamma;
      for (std::size_t i = 0; i < n; ++i) {
        const double ge = s.weight * deta[i];
        const std::size_t k = s.seg_begin + i;
        g->mu += ge;
        if (s.home) g->beta_home += ge;
        g->attack[s.attack] += ge;
        g->defence[s.defence] += ge;
        g->beta_red += ge * t.red[k];
        g->beta_dev += ge * t.dev[k];
      }
    }
  }
  return total;
}

// Layout of the free parameter vector for either stage.
struct Layout {
  bool ratings = true;  // mu, beta_home, reduced a and d
  int n_teams = 0;
  int n_slots = 1;
  bool red = false;
  bool dev = false;
  bool log_gamma = true;

  int rating_size() const { return ratings ? 2 + 2 * (n_teams - 1) : 0; }
  int size() const { return rating_size() + n_slots + int(red) + int(dev); }
};

Params unpack(const Layout& L, const Eigen::VectorXd& x, const Params& fixed) {
  Params p = fixed;
  int k = 0;
  if (L.ratings) {
    p.mu = x[k++];
    p.beta_home = x[k++];
    const int m = L.n_teams - 1;
    p.attack.resize(L.n_teams);
    p.defence.resize(L.n_teams);
    p.attack.head(m) = x.segment(k, m);
    p.attack[m] = -x.segment(k, m).sum();
    k += m;
    p.defence.head(m) = x.segment(k, m);
    p.defence[m] = -x.segment(k, m).sum();
    k += m;
  }
  for (int s = 0; s < L.n_slots; ++s, ++k)
    p.gamma[static_cast<std::size_t>(s)] = L.log_gamma ? std::exp(x[k]) : x[k];
  if (L.red) p.beta_red = x[k++];
  if (L.dev) p.beta_dev = x[k++];
  return p;
}

Eigen::VectorXd pack(const Layout& L, const Params& p) {
  Eigen::VectorXd x(L.size());
  int k = 0;
  if (L.ratings) {
    const int m = L.n_teams - 1;
    x[k++] = p.mu;
    x[k++] = p.beta_home;
    x.segment(k, m) = p.attack.head(m);
    k += m;
    x.segment(k, m) = p.defence.head(m);
    k += m;
  }
  for (int s = 0; s < L.n_slots; ++s, ++k) {
    const double gm = p.gamma[static_cast<std::size_t>(s)];
    x[k] = L.log_gamma ? std::log(gm) : gm;
  }
  if (L.red) x[k++] = p.beta_red;
  if (L.dev) x[k++] = p.beta_dev;
  return x;
}

Eigen::VectorXd reduce(const Layout& L, const Gradient& g, const Params& p) {
  Eigen::VectorXd out(L.size());
  int k = 0;
  if (L.ratings) {
    const int m = L.n_teams - 1;
    out[k++] = g.mu;
    out[k++] = g.beta_home;
    out.segment(k, m) = g.attack.head(m).array() - g.attack[m];
    k += m;
    out.segment(k, m) = g.defence.head(m).array() - g.defence[m];
    k += m;
  }
  for (int s = 0; s < L.n_slots; ++s, ++k) {
    const double dg = g.gamma[static_cast<std::size_t>(s)];
    out[k] = L.log_gamma ? dg * p.gamma[static_cast<std::size_t>(s)] : dg;
  }
  if (L.red) out[k++] = g.beta_red;
  if (L.dev) out[k++] = g.beta_dev;
  return out;
}

GradientObjective negative_loglik(const SpellTable& table, const Layout& L,
                                  const Params& fixed) {
  return [&table, L, fixed](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Params p = unpack(L, x, fixed);
    for (int s = 0; s < L.n_slots; ++s)
      if (!(p.gamma[static_cast<std::size_t>(s)] > 0.0))
        return std::numeric_limits<double>::infinity();
    Gradient g;
    const double ll = table_loglik(table, p, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    if (grad) *grad = -reduce(L, g, p);
    return -ll;
  };
}

struct Solution {
  Params params;
  double loglik = 0.0;
  MinimizeResult result;
  std::optional<Eigen::MatrixXd> covariance;  // natural coordinates
};

Solution solve(const SpellTable& table, Layout L, const Params& start,
               const FitOptions& options, std::vector<std::string>& warnings) {
  MinimizeOptions mo;
  mo.max_iterations = options.max_iterations;
  L.log_gamma = true;
  auto objective = negative_loglik(table, L, start);
  MinimizeResult r = minimize_bfgs(objective, pack(L, start), mo);
  if (!r.converged) {
    throw Error(ErrorCode::FitFailure,
                "likelihood maximisation did not converge after " +
                    std::to_string(r.iterations) + " iterations (" + r.message +
                    ", max |grad| = " +
                    std::to_string(r.grad.cwiseAbs().maxCoeff()) + ")");
  }
  Solution sol;
  sol.params = unpack(L, r.x, start);
  sol.loglik = -r.f;
  sol.result = r;
  if (options.standard_errors) {
    Layout natural = L;
    natural.log_gamma = false;
    auto nat = negative_loglik(table, natural, start);
    Eigen::MatrixXd h = numerical_hessian(nat, pack(natural, sol.params));
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success || !h.allFinite()) {
      warnings.push_back("singular Hessian at the optimum; standard errors omitted");
    } else {
      Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
      if (cov.diagonal().minCoeff() <= 0.0)
        warnings.push_back("non-positive variance estimate; standard errors omitted");
      else
        sol.covariance = std::move(cov);
    }
  }
  return sol;
}

std::optional<double> se_at(const Solution& s, int k) {
  if (!s.covariance) return std::nullopt;
  return std::sqrt((*s.covariance)(k, k));
}

// SE of the dependent team parameter, -(sum of the free ones).
std::optional<double> se_of_sum(const Solution& s, int begin, int count) {
  if (!s.covariance) return std::nullopt;
  const double v = s.covariance->block(begin, begin, count, count).sum();
  return v > 0.0 ? std::optional<double>(std::sqrt(v)) : std::nullopt;
}

void push_tail_estimates(FitReport& rep, const Solution& sol, const Layout& L,
                         const ShapeSpec& shape, CovariateModel cov) {
  int k = L.rating_size();
  const auto names = shape.names();
  for (int s = 0; s < L.n_slots; ++s, ++k)
    rep.estimates.push_back({names[static_cast<std::size_t>(s)],
                             sol.params.gamma[static_cast<std::size_t>(s)], se_at(sol, k)});
  if (L.red) rep.estimates.push_back({"beta_red", sol.params.beta_red, se_at(sol, k++)});
  if (L.dev)
    rep.estimates.push_back({cov == CovariateModel::M2 ? "beta_goals" : "beta_psxg",
                             sol.params.beta_dev, se_at(sol, k++)});
}

CovariateCoeffs coeffs_from(const Params& p, CovariateModel cov) {
  CovariateCoeffs c;
  if (cov != CovariateModel::M0) c.red = p.beta_red;
  if (cov == CovariateModel::M2) c.goals = p.beta_dev;
  if (cov == CovariateModel::M3) c.psxg = p.beta_dev;
  return c;
}

ShapeSpec shape_from(const ShapeSpec& like, const Params& p) {
  ShapeSpec s = like;
  for (int i = 0; i < s.size(); ++i)
    s.gamma[static_cast<std::size_t>(i)] = p.gamma[static_cast<std::size_t>(i)];
  if (s.kind == ShapeKind::HalfSpecific) s.gamma[2] = s.gamma[1];
  if (s.kind == ShapeKind::Single) s.gamma[1] = s.gamma[2] = s.gamma[0];
  return s;
}

}  // namespace

RatingsFit fit_team_ratings(std::span<const MatchTimeline> matches,
                            std::span<const CovariatePath> paths, Date as_of,
                            double xi, const ShapeSpec& shape_init,
                            CovariateModel covariates,
                            const FitOptions& options) {
  shape_init.validate();
  std::vector<TeamId> teams;
  std::vector<Date> dates;
  for (const auto& m : matches) {
    teams.push_back(m.home);
    teams.push_back(m.away);
    dates.push_back(m.date);
  }
  std::sort(teams.begin(), teams.end());
  teams.erase(std::unique(teams.begin(), teams.end()), teams.end());
  if (teams.size() < 2)
    throw Error(ErrorCode::FitFailure, "at least two distinct teams are required");
  if (deviation_mode(covariates) != DeviationMode::None && paths.empty())
    throw Error(ErrorCode::InvalidArgument, "covariate model needs covariate paths");

  const auto weights = decay_weights(dates, as_of, xi);
  SpellTable table = make_table(matches, paths, weights, shape_init, options, teams);

  Layout L;
  L.n_teams = static_cast<int>(teams.size());
  L.n_slots = shape_init.size();
  L.red = covariates != CovariateModel::M0;
  L.dev = deviation_mode(covariates) != DeviationMode::None;

  Params start;
  start.attack = Eigen::VectorXd::Zero(L.n_teams);
  start.defence = Eigen::VectorXd::Zero(L.n_teams);
  start.gamma = shape_init.gamma;
  double exposure = 0.0;
  double goals = 0.0;
  for (const auto& s : table.spells) {
    exposure += s.weight * s.length;
    goals += s.goal ? s.weight : 0.0;
  }
  start.mu = std::log(goals > 0.0 ? exposure / goals : 90.0);

  RatingsFit out;
  Solution sol = solve(table, L, start, options, out.report.warnings);

  RatingSet& r = out.ratings;
  r.mu = sol.params.mu;
  r.beta_home = sol.params.beta_home;
  r.as_of = as_of;
  r.decay_xi = xi;
  for (int i = 0; i < L.n_teams; ++i) {
    r.attack[teams[static_cast<std::size_t>(i)]] = sol.params.attack[i];
    r.defence[teams[static_cast<std::size_t>(i)]] = sol.params.defence[i];
  }
  out.shape = shape_from(shape_init, sol.params);
  out.coeffs = coeffs_from(sol.params, covariates);

  FitReport& rep = out.report;
  rep.label = "ratings";
  rep.estimates.push_back({"mu", r.mu, se_at(sol, 0)});
  rep.estimates.push_back({"beta_home", r.beta_home, se_at(sol, 1)});
  const int m = L.n_teams - 1;
  for (int i = 0; i < L.n_teams; ++i)
    rep.estimates.push_back({"attack[" + teams[static_cast<std::size_t>(i)] + "]",
                             sol.params.attack[i],
                             i < m ? se_at(sol, 2 + i) : se_of_sum(sol, 2, m)});
  for (int i = 0; i < L.n_teams; ++i)
    rep.estimates.push_back({"defence[" + teams[static_cast<std::size_t>(i)] + "]",
                             sol.params.defence[i],
                             i < m ? se_at(sol, 2 + m + i) : se_of_sum(sol, 2 + m, m)});
  push_tail_estimates(rep, sol, L, shape_init, covariates);
  rep.loglik = sol.loglik;
  rep.k = L.size();
  rep.n_obs = static_cast<long>(table.spells.size());
  rep.bic = bic(rep.k, rep.n_obs, rep.loglik);
  rep.converged = sol.result.converged;
  rep.iterations = sol.result.iterations;
  return out;
}

ShapeFit fit_shape_and_covariates(std::span<const MatchTimeline> matches,
                                  std::span<const CovariatePath> paths,
                                  const RatingSet& ratings, CovariateModel spec,
                                  const ShapeSpec& shape_init,
                                  const FitOptions& options,
                                  const FitReport* nested) {
  shape_init.validate();
  if (deviation_mode(spec) != DeviationMode::None && paths.empty())
    throw Error(ErrorCode::InvalidArgument, "covariate model needs covariate paths");
  std::vector<TeamId> teams;
  for (const auto& [team, _] : ratings.attack) teams.push_back(team);
  std::vector<double> weights;
  if (options.weighted_stage2) {
    std::vector<Date> dates;
    for (const auto& m : matches) dates.push_back(m.date);
    weights = decay_weights(dates, ratings.as_of, ratings.decay_xi);
  }
  SpellTable table = make_table(matches, paths, weights, shape_init, options, teams);

  Layout L;
  L.ratings = false;
  L.n_teams = static_cast<int>(teams.size());
  L.n_slots = shape_init.size();
  L.red = spec != CovariateModel::M0;
  L.dev = deviation_mode(spec) != DeviationMode::None;

  Params fixed;
  fixed.mu = ratings.mu;
  fixed.beta_home = ratings.beta_home;
  fixed.attack.resize(L.n_teams);
  fixed.defence.resize(L.n_teams);
  for (int i = 0; i < L.n_teams; ++i) {
    fixed.attack[i] = ratings.attack_of(teams[static_cast<std::size_t>(i)]);
    fixed.defence[i] = ratings.defence_of(teams[static_cast<std::size_t>(i)]);
  }
  fixed.gamma = shape_init.gamma;

  ShapeFit out;
  Solution sol = solve(table, L, fixed, options, out.report.warnings);
  out.shape = shape_from(shape_init, sol.params);
  out.coeffs = coeffs_from(sol.params, spec);

  FitReport& rep = out.report;
  rep.label = std::string(to_string(spec));
  push_tail_estimates(rep, sol, L, shape_init, spec);
  rep.loglik = sol.loglik;
  rep.k = L.size();
  rep.n_obs = static_cast<long>(table.spells.size());
  rep.bic = bic(rep.k, rep.n_obs, rep.loglik);
  rep.converged = sol.result.converged;
  rep.iterations = sol.result.iterations;
  if (nested) {
    if (nested->n_obs != rep.n_obs)
      throw Error(ErrorCode::IncomparableFits, "nested fit used different data");
    const double stat = std::max(0.0, 2.0 * (rep.loglik - nested->loglik));
    rep.lrt_p.emplace_back(nested->label + "->" + rep.label,
                           lrt_p_value(stat, rep.k - nested->k));
  }
  return out;
}

double lrt_p_value(double statistic, int df) {
  if (df <= 0) throw Error(ErrorCode::InvalidArgument, "LRT needs df >= 1");
  if (statistic <= 0.0) return 1.0;
  return Eigen::numext::igammac(0.5 * df, 0.5 * statistic);
}

std::vector<ComparisonRow> compare_models(
    std::span<const FitReport> reports, std::size_t baseline,
    std::span<const std::pair<std::size_t, std::size_t>> nested) {
  if (reports.empty()) return {};
  if (baseline >= reports.size())
    throw Error(ErrorCode::InvalidArgument, "baseline index out of range");
  for (const auto& r : reports)
    if (r.n_obs != reports.front().n_obs)
      throw Error(ErrorCode::IncomparableFits,
                  "fits '" + reports.front().label + "' and '" + r.label +
                      "' use different observation counts");
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports)
    rows.push_back({r.label, r.k, r.loglik, r.bic, r.bic - reports[baseline].bic,
                    std::nullopt});
  for (auto [restricted, full] : nested) {
    if (restricted >= reports.size() || full >= reports.size())
      throw Error(ErrorCode::InvalidArgument, "nested index out of range");
    const double stat =
        std::max(0.0, 2.0 * (reports[full].loglik - reports[restricted].loglik));
    rows[full].lrt_p = lrt_p_value(stat, reports[full].k - reports[restricted].k);
  }
  return rows;
}

}  // namespace inplay
