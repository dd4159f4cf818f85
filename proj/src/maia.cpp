#include "inplay/maia.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "inplay/intensity_fit.hpp"

namespace inplay {

double StoppageModel::mean(int reds, int goals_in_half, bool close_match) const {
  return std::exp(intercept + red * reds + goals * goals_in_half +
                  (close_match ? close : 0.0));
}

double MaiaParams::alpha(const TeamId& team) const {
  auto it = attack.find(team);
  if (it == attack.end()) throw Error(ErrorCode::MissingTeam, "no rating for '" + team + "'");
  return std::exp(intercept + it->second);
}

double MaiaParams::beta(const TeamId& team) const {
  auto it = defence.find(team);
  if (it == defence.end()) throw Error(ErrorCode::MissingTeam, "no rating for '" + team + "'");
  return std::exp(it->second);
}

MaiaComposite MaiaParams::composite(const TeamId& home_team, const TeamId& away_team) const {
  return {std::log(alpha(home_team) * beta(away_team)) + home,
          std::log(alpha(away_team) * beta(home_team))};
}

MaiaState maia_state(const MatchTimeline& timeline, const CovariatePath& path,
                     double minute) {
  MaiaState st;
  st.minute = minute;
  st.half = timeline.half_at(minute);
  for (const auto& e : timeline.events) {
    if (e.minute >= minute) break;
    const bool home = timeline.side_of(e.team) == Side::Home;
    const bool this_half = e.half == st.half;
    if (e.kind == EventKind::Goal) {
      (home ? st.home_goals : st.away_goals)++;
      if (this_half) ++st.half_goals;
    } else if (e.kind == EventKind::RedCard) {
      (home ? st.home_reds : st.away_reds)++;
      if (this_half) ++st.half_reds;
    }
  }
  st.psxg_home = path.before(minute, Side::Home).dev;
  st.psxg_away = path.before(minute, Side::Away).dev;
  return st;
}

namespace {

double sign(int v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

double maia_intensity(const MaiaState& s, const MaiaParams& p, Side side,
                      const MaiaComposite& c) {
  const bool home = side == Side::Home;
  const int gd = home ? s.home_goals - s.away_goals : s.away_goals - s.home_goals;
  const int adv = home ? s.away_reds - s.home_reds : s.home_reds - s.away_reds;
  const double x = home ? s.psxg_home : s.psxg_away;
  return std::exp((home ? c.home : c.away) + p.xi_half * (s.half == 2 ? 1.0 : 0.0) +
                  p.xi_gd * gd + p.xi_rc * sign(adv) + p.xi_psxg * x);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

constexpr double kRedFloor = 0.5;  // minutes; bounds a t^b for b < 0

struct Recorder {
  MatchTimeline* timeline = nullptr;
  void add(double t, int half, EventKind kind, bool home) {
    if (!timeline) return;
    MatchEvent e;
    e.minute = t;
    e.half = half;
    e.kind = kind;
    e.team = home ? timeline->home : timeline->away;
    timeline->events.push_back(e);
  }
};

double red_rate(const MaiaParams& p, double t) {
  if (p.red_scale <= 0.0) return 0.0;
  return p.red_scale * std::pow(std::max(t, kRedFloor), p.red_power);
}

// Advances the state over clock [s.minute, t1] by thinning.
void run_segment(MaiaState& s, double t1, const MaiaParams& p, const MaiaComposite& c,
                 PathRng& rng, Recorder& rec) {
  while (s.minute < t1) {
    const double lh = maia_intensity(s, p, Side::Home, c);
    const double la = maia_intensity(s, p, Side::Away, c);
    const double rmax = std::max(red_rate(p, s.minute), red_rate(p, t1));
    const double total = lh + la + 2.0 * rmax;
    if (!(total > 0.0)) {
      s.minute = t1;
      return;
    }
    const double t = s.minute + rng.exponential() / total;
    if (t >= t1) {
      s.minute = t1;
      return;
    }
    s.minute = t;
    const double u = rng.uniform() * total;
    if (u <= lh) {
      ++s.home_goals;
      ++s.half_goals;
      rec.add(t, s.half, EventKind::Goal, true);
    } else if (u <= lh + la) {
      ++s.away_goals;
      ++s.half_goals;
      rec.add(t, s.half, EventKind::Goal, false);
    } else {
      const double r = red_rate(p, t);
      const double v = u - lh - la;
      if (v <= r) {
        ++s.home_reds;
        ++s.half_reds;
        rec.add(t, s.half, EventKind::RedCard, true);
      } else if (v > rmax && v <= rmax + r) {
        ++s.away_reds;
        ++s.half_reds;
        rec.add(t, s.half, EventKind::RedCard, false);
      }
    }
  }
}

// Added time for the current half, conditioned on the clock already reached.
double draw_half_end(const MaiaState& s, const MaiaParams& p, PathRng& rng) {
  const double nominal = s.half == 1 ? 45.0 : 90.0;
  const StoppageModel& m = s.half == 1 ? p.stoppage1 : p.stoppage2;
  const bool close = std::abs(s.home_goals - s.away_goals) <= 1;
  const double mean = m.mean(s.half_reds, s.half_goals, s.half == 2 && close);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double end = nominal + rng.poisson(mean);
    if (end >= s.minute) return end;
  }
  return s.minute;
}

void run_match(MaiaState s, const MaiaParams& p, const MaiaComposite& c,
               const std::optional<MatchDurations>& oracle, PathRng& rng,
               Recorder& rec, int& home_goals, int& away_goals,
               double* half_end = nullptr, double* full_time = nullptr) {
  for (int half = s.half; half <= 2; ++half) {
    if (half != s.half) {
      s.half = half;
      s.half_goals = 0;
      s.half_reds = 0;
    }
    double end;
    if (oracle) {
      end = half == 1 ? oracle->first_half_end : oracle->full_time;
      run_segment(s, end, p, c, rng, rec);
    } else {
      run_segment(s, half == 1 ? 45.0 : 90.0, p, c, rng, rec);
      end = draw_half_end(s, p, rng);
      run_segment(s, end, p, c, rng, rec);
    }
    if (half == 1 && half_end) *half_end = end;
    if (half == 2 && full_time) *full_time = end;
    s.minute = std::max(s.minute, end);
  }
  home_goals = s.home_goals;
  away_goals = s.away_goals;
}

}  // namespace

SimForecast maia_forecast(const MaiaState& state, const MaiaComposite& composite,
                          const MaiaParams& params, const SimConfig& cfg) {
  cfg.validate();
  if (state.half != 1 && state.half != 2) throw Error(ErrorCode::StateError, "invalid half");
  long wins = 0;
  long draws = 0;
  std::array<long, 6> buckets{};
  std::array<long, 5> over{};
  Recorder none;
  for (int path = 0; path < cfg.n_paths; ++path) {
    PathRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    int h = 0;
    int a = 0;
    run_match(state, params, composite, cfg.oracle, rng, none, h, a);
    if (h > a) ++wins;
    else if (h == a) ++draws;
    const int total = h + a;
    ++buckets[static_cast<std::size_t>(std::min(total, 5))];
    for (std::size_t g = 0; g < kGoalThresholds.size(); ++g)
      if (total > kGoalThresholds[g]) ++over[g];
  }
  const double n = cfg.n_paths;
  SimForecast out;
  out.probs.home = wins / n;
  out.probs.draw = draws / n;
  out.probs.away = 1.0 - out.probs.home - out.probs.draw;
  for (std::size_t k = 0; k < buckets.size(); ++k) out.total_goals[k] = buckets[k] / n;
  for (std::size_t g = 0; g < over.size(); ++g) out.over[g] = over[g] / n;
  return out;
}

MaiaCalibration maia_calibrate(const CalibrationTarget& target, const MaiaComposite& init,
                               const MaiaParams& params, const SimConfig& cfg,
                               const PowellOptions& options) {
  target.validate();
  auto f = [&](const Eigen::VectorXd& x) {
    const SimForecast s = maia_forecast(MaiaState{}, {x[0], x[1]}, params, cfg);
    return calibration_loss(s.probs, s.over, target);
  };
  const PowellResult r = powell_minimize(f, Eigen::Vector2d(init.home, init.away), options);
  MaiaCalibration out;
  out.composite = {r.x[0], r.x[1]};
  out.loss = r.f;
  out.iterations = r.iterations;
  out.poor_fit = r.f > kPoorFitLoss;
  return out;
}

MatchTimeline maia_generate_match(const MaiaParams& params, const TeamId& home,
                                  const TeamId& away, PathRng& rng) {
  MatchTimeline m;
  m.home = home;
  m.away = away;
  Recorder rec{&m};
  int h = 0;
  int a = 0;
  double end1 = 45.0;
  double end2 = 90.0;
  run_match(MaiaState{}, params, params.composite(home, away), std::nullopt, rng, rec, h,
            a, &end1, &end2);
  m.first_half_end = end1;
  m.full_time = std::max(end2, end1);
  m.home_goals = h;
  m.away_goals = a;
  return m;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

// Profile MLE of a t^b over team-match exposures [0, T_i].
std::pair<double, double> fit_red_process(std::span<const MatchTimeline> training) {
  std::vector<double> times;
  std::vector<double> ends;
  for (const auto& m : training) {
    ends.push_back(m.full_time);
    ends.push_back(m.full_time);
    for (const auto& e : m.events)
      if (e.kind == EventKind::RedCard) times.push_back(std::max(e.minute, kRedFloor));
  }
  const double n = static_cast<double>(times.size());
  if (n == 0.0) return {0.0, 0.0};
  double sum_log = 0.0;
  for (double t : times) sum_log += std::log(t);
  auto s_of = [&](double b) {
    double s = 0.0;
    for (double t : ends) s += std::pow(t, b + 1.0);
    return s;
  };
  auto profile = [&](double b) { return n * std::log(n * (b + 1.0) / s_of(b)) + b * sum_log; };
  double lo = -0.95;
  double hi = 8.0;
  const double g = 0.3819660112501051;
  double x1 = lo + g * (hi - lo);
  double x2 = hi - g * (hi - lo);
  double f1 = profile(x1);
  double f2 = profile(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = hi - g * (hi - lo);
      f2 = profile(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = lo + g * (hi - lo);
      f1 = profile(x1);
    }
  }
  const double b = 0.5 * (lo + hi);
  return {n * (b + 1.0) / s_of(b), b};
}

StoppageModel fit_stoppage(std::span<const MatchTimeline> training, int half) {
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());
  const int cols = half == 1 ? 3 : 4;
  Eigen::MatrixXd x(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = training[static_cast<std::size_t>(i)];
    int reds = 0;
    int goals = 0;
    int gd = 0;
    for (const auto& e : m.events) {
      const int s = m.side_of(e.team) == Side::Home ? 1 : -1;
      if (e.kind == EventKind::Goal && e.minute <= 90.0) gd += s;
      // Added time is announced at the nominal end, so later events are not regressors.
      if (e.half != half || e.minute > (half == 1 ? 45.0 : 90.0)) continue;
      if (e.kind == EventKind::RedCard) ++reds;
      if (e.kind == EventKind::Goal) ++goals;
    }
    x(i, 0) = 1.0;
    x(i, 1) = reds;
    x(i, 2) = goals;
    if (half == 2) x(i, 3) = std::abs(gd) <= 1 ? 1.0 : 0.0;
    y[i] = std::round(half == 1 ? m.first_half_end - 45.0 : m.full_time - 90.0);
  }
  const PoissonGlmFit fit = fit_poisson_glm(x, y, Eigen::VectorXd::Ones(n));
  StoppageModel s;
  s.intercept = fit.coef[0];
  s.red = fit.coef[1];
  s.goals = fit.coef[2];
  if (half == 2) s.close = fit.coef[3];
  return s;
}

}  // namespace

MaiaParams maia_fit(std::span<const MatchTimeline> training, bool use_psxg) {
  if (training.empty()) throw Error(ErrorCode::FitFailure, "no training matches");
  MaiaParams p;
  DeviationMode mode = DeviationMode::None;
  if (use_psxg) {
    try {
      p.psxg_baseline = fit_psxg_baseline(training);
      mode = DeviationMode::Psxg;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateBaseline) throw;
      p.warnings.push_back("no shot data; PSxG coefficient fixed at 0");
    }
  }

  IntensityData data;
  for (const auto& m : training) {
    data.teams.push_back(m.home);
    data.teams.push_back(m.away);
  }
  std::sort(data.teams.begin(), data.teams.end());
  data.teams.erase(std::unique(data.teams.begin(), data.teams.end()), data.teams.end());
  data.names = {"home", "half2", "gd", "rc", "psxg"};
  auto idx = [&](const TeamId& t) {
    return static_cast<int>(std::lower_bound(data.teams.begin(), data.teams.end(), t) -
                            data.teams.begin());
  };
  bool any_red = false;
  for (const auto& m : training) {
    const CovariatePath path = covariate_path(m, p.psxg_baseline, mode);
    const int ih = idx(m.home);
    const int ia = idx(m.away);
    for (const auto& piece : exposure_pieces(m, path)) {
      const bool home = piece.side == Side::Home;
      IntensityRow r;
      r.attack = home ? ih : ia;
      r.defence = home ? ia : ih;
      r.exposure = piece.end - piece.start;
      r.events = piece.goals_at_end;
      r.x = {home ? 1.0 : 0.0, piece.half == 2 ? 1.0 : 0.0,
             static_cast<double>(piece.own_goals - piece.opp_goals),
             sign(piece.opp_reds - piece.own_reds), piece.dev};
      any_red = any_red || piece.own_reds + piece.opp_reds > 0;
      data.rows.push_back(std::move(r));
    }
  }
  if (!any_red) p.warnings.push_back("no red cards in training data; xi_rc fixed at 0");
  const IntensityFit fit = fit_intensity(data);
  p.intercept = fit.intercept;
  p.attack = fit.attack;
  p.defence = fit.defence;
  p.home = fit.coefficient("home");
  p.xi_half = fit.coefficient("half2");
  p.xi_gd = fit.coefficient("gd");
  p.xi_rc = fit.coefficient("rc");
  p.xi_psxg = fit.coefficient("psxg");

  std::tie(p.red_scale, p.red_power) = fit_red_process(training);
  p.stoppage1 = fit_stoppage(training, 1);
  p.stoppage2 = fit_stoppage(training, 2);
  return p;
}

}  // namespace inplay
