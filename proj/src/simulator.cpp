#include "inplay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inplay {

void MatchState::validate() const {
  if (!(minute >= 0.0)) throw Error(ErrorCode::StateError, "negative minute");
  if (home_goals < 0 || away_goals < 0)
    throw Error(ErrorCode::StateError, "negative score");
  if (half != 1 && half != 2) throw Error(ErrorCode::StateError, "half must be 1 or 2");
  if (!(elapsed >= 0.0) || elapsed > minute + 1e-9)
    throw Error(ErrorCode::StateError, "elapsed time outside [0, minute]");
}

MatchState state_at(const MatchTimeline& timeline, const CovariatePath& path,
                    double minute) {
  MatchState st;
  st.minute = minute;
  st.half = timeline.half_at(minute);
  double spell_start = st.half == 1 ? 0.0 : timeline.first_half_end;
  for (const auto& e : timeline.events) {
    if (e.minute >= minute) break;
    if (e.kind != EventKind::Goal) continue;
    (timeline.side_of(e.team) == Side::Home ? st.home_goals : st.away_goals)++;
    spell_start = std::max(spell_start, e.minute);
  }
  st.elapsed = std::max(0.0, minute - spell_start);
  st.x_home = path.before(minute, Side::Home);
  st.x_away = path.before(minute, Side::Away);
  return st;
}

MatchDurations SimConfig::durations() const {
  if (oracle) return *oracle;
  return {45.0 + stoppage1, 90.0 + stoppage2};
}

void SimConfig::validate() const {
  if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
  if (!(stoppage1 >= 0.0) || !(stoppage2 >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "stoppage means must be >= 0");
}

double conditional_weibull_sample(double gamma, double lambda, double s, double u) {
  if (!(u > 0.0) || u > 1.0)
    throw Error(ErrorCode::InvalidArgument, "uniform draw must lie in (0, 1]");
  if (!(lambda > 0.0)) return std::numeric_limits<double>::infinity();
  const double e = -std::log(u);
  if (gamma == 1.0) return e / lambda;
  const double base = s > 0.0 ? std::pow(s, gamma) : 0.0;
  return std::max(0.0, std::pow(base + e / lambda, 1.0 / gamma) - s);
}

Score simulate_half(Score score, double s, const TeamHazard& home,
                    const TeamHazard& away, double t_rem, PathRng& rng) {
  while (t_rem > 0.0) {
    const auto sh = static_cast<std::size_t>(score_state(score.home, score.away));
    const auto sa = static_cast<std::size_t>(score_state(score.away, score.home));
    const double tau_h =
        conditional_weibull_sample(home.gamma[sh], home.lambda[sh], s, rng.uniform());
    const double tau_a =
        conditional_weibull_sample(away.gamma[sa], away.lambda[sa], s, rng.uniform());
    const double tau = std::min(tau_h, tau_a);
    if (tau > t_rem) break;
    if (tau_h <= tau_a) ++score.home;
    else ++score.away;
    t_rem -= tau;
    s = 0.0;
  }
  return score;
}

namespace {

TeamHazard hazard_for(double eta, const ShapeSpec& shape, int half) {
  TeamHazard h;
  for (std::size_t k = 0; k < 3; ++k) {
    const double g = shape.resolve(half, static_cast<ScoreState>(k));
    h.gamma[k] = g;
    h.lambda[k] = std::isinf(eta) && eta > 0.0 ? 0.0 : rate_from_eta(eta, g);
  }
  return h;
}

}  // namespace

SimForecast forecast(const MatchState& state, const EtaPair& eta,
                     const ShapeSpec& shape, const SimConfig& cfg) {
  state.validate();
  cfg.validate();
  shape.validate();
  const MatchDurations d = cfg.durations();
  const TeamHazard h1 = hazard_for(eta.home, shape, 1);
  const TeamHazard a1 = hazard_for(eta.away, shape, 1);
  const TeamHazard h2 = hazard_for(eta.home, shape, 2);
  const TeamHazard a2 = hazard_for(eta.away, shape, 2);

  const double m = state.minute;
  const bool first_half_left = state.half == 1 && m < d.first_half_end;
  const double t1 = first_half_left ? d.first_half_end - m : 0.0;
  const double t2 = state.half == 1
                        ? std::max(0.0, d.full_time - std::max(m, d.first_half_end))
                        : std::max(0.0, d.full_time - m);
  const double s2 = state.half == 2 ? state.elapsed : 0.0;

  long wins = 0;
  long draws = 0;
  std::array<long, 6> buckets{};
  std::array<long, 5> over{};
  for (int p = 0; p < cfg.n_paths; ++p) {
    PathRng rng(cfg.seed, static_cast<std::uint64_t>(p));
    Score sc{state.home_goals, state.away_goals};
    if (first_half_left) sc = simulate_half(sc, state.elapsed, h1, a1, t1, rng);
    sc = simulate_half(sc, s2, h2, a2, t2, rng);
    if (sc.home > sc.away) ++wins;
    else if (sc.home == sc.away) ++draws;
    const int total = sc.home + sc.away;
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

// ---------------------------------------------------------------------------

namespace {

double round_up(double t, double resolution) {
  if (resolution <= 0.0) return t;
  return std::ceil(t / resolution - 1e-9) * resolution;
}

void insert_event(MatchTimeline& m, MatchEvent e) {
  auto it = std::upper_bound(m.events.begin(), m.events.end(), e.minute,
                             [](double t, const MatchEvent& x) { return t < x.minute; });
  m.events.insert(it, std::move(e));
}

// Poisson-process auxiliary events of one kind for one team over a half.
void add_auxiliary(MatchTimeline& m, const TeamId& team, EventKind kind,
                   double rate, double begin, double end, int half,
                   const GeneratorConfig& cfg, PathRng& rng) {
  if (rate <= 0.0) return;
  double t = begin;
  while (true) {
    t += rng.exponential() / rate;
    if (t >= end) break;
    MatchEvent e;
    e.minute = std::min(round_up(t, cfg.time_resolution), end);
    e.half = half;
    e.kind = kind;
    e.team = team;
    if (kind == EventKind::Shot && rng.uniform() <= cfg.on_target)
      e.psxg = std::min(1.0, 2.0 * cfg.psxg_mean * rng.uniform());
    insert_event(m, std::move(e));
  }
}

}  // namespace

MatchTimeline generate_match(const RatingSet& ratings, const ShapeSpec& shape,
                             const CovariateCoeffs& coeffs, const TeamId& home,
                             const TeamId& away, const GeneratorConfig& cfg,
                             PathRng& rng) {
  shape.validate();
  coeffs.validate();
  MatchTimeline m;
  m.home = home;
  m.away = away;
  m.first_half_end = 45.0 + rng.poisson(cfg.stoppage1);
  m.full_time = std::max(90.0 + rng.poisson(cfg.stoppage2), m.first_half_end + 1.0);

  const double bounds[3] = {0.0, m.first_half_end, m.full_time};
  for (int half = 1; half <= 2; ++half)
    for (const TeamId* team : {&home, &away}) {
      add_auxiliary(m, *team, EventKind::RedCard, cfg.red_rate, bounds[half - 1],
                    bounds[half], half, cfg, rng);
      add_auxiliary(m, *team, EventKind::Shot, cfg.shot_rate, bounds[half - 1],
                    bounds[half], half, cfg, rng);
    }

  const DeviationMode mode = coeffs.goals   ? DeviationMode::Goals
                             : coeffs.psxg ? DeviationMode::Psxg
                                           : DeviationMode::None;
  const LinearBaseline& baseline =
      mode == DeviationMode::Goals ? cfg.goals_baseline : cfg.psxg_baseline;
  const EtaPair base = expected_log_time(ratings, home, away);
  const double base_eta[2] = {base.home, base.away};
  const TeamId* teams[2] = {&home, &away};

  for (int half = 1; half <= 2; ++half) {
    const double end = bounds[half];
    double start = bounds[half - 1];
    while (start < end) {
      // Goals change the covariate path only in goals-deviation mode, but
      // rebuilding per spell keeps one code path.
      const CovariatePath path = covariate_path(m, baseline, mode);
      std::vector<double> breaks;
      for (const auto& p : path.points)
        if (p.minute > start && p.minute < end) breaks.push_back(p.minute);
      breaks.push_back(end);

      double gamma[2];
      double target[2];
      double hazard[2] = {0.0, 0.0};
      const int goals[2] = {m.home_goals, m.away_goals};
      for (int k = 0; k < 2; ++k) {
        gamma[k] = shape.resolve(half, score_state(goals[k], goals[1 - k]));
        target[k] = rng.exponential();
      }
      double goal_time = std::numeric_limits<double>::infinity();
      int scorer = -1;
      double lo = start;
      for (double hi : breaks) {
        for (int k = 0; k < 2; ++k) {
          const Side side = k == 0 ? Side::Home : Side::Away;
          const double eta = base_eta[k] + covariate_effect(coeffs, path.at(lo, side));
          const double lambda = rate_from_eta(eta, gamma[k]);
          const double p_lo = std::pow(lo - start, gamma[k]);
          const double inc = lambda * (std::pow(hi - start, gamma[k]) - p_lo);
          if (hazard[k] + inc >= target[k]) {
            const double t =
                start + std::pow(p_lo + (target[k] - hazard[k]) / lambda, 1.0 / gamma[k]);
            if (t < goal_time) {
              goal_time = t;
              scorer = k;
            }
          }
          hazard[k] += inc;
        }
        if (scorer >= 0) break;
        lo = hi;
      }
      if (scorer < 0) break;
      MatchEvent e;
      e.minute = std::min(round_up(goal_time, cfg.time_resolution), end);
      e.half = half;
      e.kind = EventKind::Goal;
      e.team = *teams[scorer];
      insert_event(m, std::move(e));
      (scorer == 0 ? m.home_goals : m.away_goals)++;
      start = std::min(round_up(goal_time, cfg.time_resolution), end);
    }
  }
  return m;
}

}  // namespace inplay
