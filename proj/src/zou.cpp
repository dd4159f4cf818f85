#include "inplay/zou.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace inplay {

double ZouParams::multiplier(double nominal, ScoreState state) const {
  double m = state_mult[static_cast<std::size_t>(state)];
  if (nominal >= 45.0) m *= half2_mult;
  if (nominal >= 44.0 && nominal < 45.0) m *= 1.0 + stoppage1;
  if (nominal >= 89.0) m *= 1.0 + stoppage2;
  return m;
}

void ZouParams::validate() const {
  if (!(theta01 >= 0.0) || !(theta02 >= 0.0) || !(half2_mult > 0.0))
    throw Error(ErrorCode::InvalidArgument, "Zou rates must be non-negative");
  for (double m : state_mult)
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "Zou multipliers must be positive");
  if (!(stoppage1 >= 0.0) || !(stoppage2 >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "stoppage means must be >= 0");
}

double zou_nominal_minute(double minute, int half, const ZouParams& p) {
  if (half == 1) {
    if (minute <= 44.0) return std::max(0.0, minute);
    return 44.0 + std::min(1.0, (minute - 44.0) / (1.0 + p.stoppage1));
  }
  const double m = std::max(45.0, minute);
  if (m <= 89.0) return m;
  return 89.0 + std::min(1.0, (m - 89.0) / (1.0 + p.stoppage2));
}

namespace {

constexpr double kBreaks[] = {44.0, 45.0, 89.0, 90.0};

// Integral of the multiplier over nominal [a, b] in a fixed score state.
double exposure(const ZouParams& p, double a, double b, ScoreState state) {
  double total = 0.0;
  double lo = a;
  for (double br : kBreaks) {
    if (br <= lo) continue;
    const double hi = std::min(b, br);
    if (hi > lo) total += (hi - lo) * p.multiplier(lo, state);
    lo = hi;
    if (lo >= b) break;
  }
  return total;
}

}  // namespace

ZouState zou_state(const MatchTimeline& timeline, double minute,
                   const ZouParams& params) {
  ZouState st;
  st.nominal = zou_nominal_minute(minute, timeline.half_at(minute), params);
  double last = 0.0;
  for (const auto& e : timeline.events) {
    if (e.minute >= minute) break;
    if (e.kind != EventKind::Goal) continue;
    const double n = std::min(st.nominal, zou_nominal_minute(e.minute, e.half, params));
    st.exposure_home += exposure(params, last, n, score_state(st.home_goals, st.away_goals));
    st.exposure_away += exposure(params, last, n, score_state(st.away_goals, st.home_goals));
    last = n;
    (timeline.side_of(e.team) == Side::Home ? st.home_goals : st.away_goals)++;
  }
  st.exposure_home += exposure(params, last, st.nominal, score_state(st.home_goals, st.away_goals));
  st.exposure_away += exposure(params, last, st.nominal, score_state(st.away_goals, st.home_goals));
  return st;
}

double zou_posterior_update(double theta0, double r, double goals, double expected) {
  if (!(r > 0.0) || expected < 0.0 || goals < 0.0)
    throw Error(ErrorCode::InvalidArgument, "posterior update needs r > 0, X, E >= 0");
  return (r + goals) / (r + expected) * theta0;
}

namespace {

ZouForecast propagate(const ZouState& st, double th_h, double th_a,
                      const ZouParams& p, int cap) {
  const int n = cap + 1;
  Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(n, n);
  prob(0, 0) = 1.0;
  Eigen::MatrixXd rh(n, n), ra(n, n);
  double overflow = 0.0;

  double lo = st.nominal;
  for (double br : kBreaks) {
    if (br <= lo) continue;
    const double len = br - lo;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int h = st.home_goals + i;
        const int a = st.away_goals + j;
        rh(i, j) = th_h * p.multiplier(lo, score_state(h, a));
        ra(i, j) = th_a * p.multiplier(lo, score_state(a, h));
      }
    const double big = (rh + ra).maxCoeff();
    const double mean = big * len;
    lo = br;
    if (mean <= 0.0) continue;
    const Eigen::MatrixXd stay = 1.0 - (rh + ra).array() / big;
    const Eigen::MatrixXd ph = rh / big;
    const Eigen::MatrixXd pa = ra / big;

    Eigen::MatrixXd v = prob;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    double w = std::exp(-mean);
    double cum = 0.0;
    double out_v = 0.0;  // cumulative escaped mass along the chain
    double out_acc = 0.0;
    const int k_max = static_cast<int>(mean + 40.0 * std::sqrt(mean) + 60.0);
    for (int k = 0; k <= k_max; ++k) {
      acc += w * v;
      out_acc += w * out_v;
      cum += w;
      if (1.0 - cum < 1e-16 && k > mean) break;
      Eigen::MatrixXd next = stay.cwiseProduct(v);
      next.bottomRows(n - 1) += ph.topRows(n - 1).cwiseProduct(v.topRows(n - 1));
      next.rightCols(n - 1) += pa.leftCols(n - 1).cwiseProduct(v.leftCols(n - 1));
      out_v += ph.row(n - 1).dot(v.row(n - 1)) + pa.col(n - 1).dot(v.col(n - 1));
      v.swap(next);
      w *= mean / (k + 1);
    }
    prob = acc;
    overflow += out_acc;
  }

  ZouForecast f;
  f.cap = cap;
  f.overflow = overflow;
  double home = 0.0;
  double draw = 0.0;
  double away = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int h = st.home_goals + i;
      const int a = st.away_goals + j;
      if (h > a) home += prob(i, j);
      else if (h == a) draw += prob(i, j);
      else away += prob(i, j);
      const int total = h + a;
      for (std::size_t g = 0; g < kGoalThresholds.size(); ++g)
        if (total > kGoalThresholds[g]) f.over[g] += prob(i, j);
    }
  // Escaped mass always has more than `cap` extra goals.
  for (std::size_t g = 0; g < kGoalThresholds.size(); ++g) f.over[g] += overflow;
  // Escaped mass is shared out in proportion to the retained mass.
  const double kept = home + draw + away;
  f.probs.home = home / kept;
  f.probs.draw = draw / kept;
  f.probs.away = away / kept;
  return f;
}

}  // namespace

ZouForecast zou_outcome_probs(const ZouState& state, const ZouParams& params) {
  params.validate();
  if (state.home_goals < 0 || state.away_goals < 0 || state.nominal < 0.0 ||
      state.nominal > 90.0)
    throw Error(ErrorCode::StateError, "invalid Zou state");
  const double th_h = params.theta01 > 0.0
                          ? zou_posterior_update(params.theta01, params.r1(), state.home_goals,
                                                 params.theta01 * state.exposure_home)
                          : 0.0;
  const double th_a = params.theta02 > 0.0
                          ? zou_posterior_update(params.theta02, params.r2(), state.away_goals,
                                                 params.theta02 * state.exposure_away)
                          : 0.0;
  int cap = 15;
  for (;;) {
    ZouForecast f = propagate(state, th_h, th_a, params, cap);
    if (f.overflow <= 1e-12 || cap >= 240) return f;
    cap *= 2;
  }
}

ZouParams ZouModel::for_match(const TeamId& home, const TeamId& away) const {
  ZouParams p = shared;
  auto at = [&](const std::map<TeamId, double>& m, const TeamId& t) {
    auto it = m.find(t);
    return it == m.end() ? 0.0 : it->second;
  };
  const double h = intensity.coefficient("home");
  p.theta01 = std::exp(intensity.intercept + h + at(intensity.attack, home) +
                       at(intensity.defence, away));
  p.theta02 = std::exp(intensity.intercept + at(intensity.attack, away) +
                       at(intensity.defence, home));
  return p;
}

ZouModel zou_fit(std::span<const MatchTimeline> training) {
  if (training.empty()) throw Error(ErrorCode::FitFailure, "no training matches");
  IntensityData data;
  for (const auto& m : training) {
    data.teams.push_back(m.home);
    data.teams.push_back(m.away);
  }
  std::sort(data.teams.begin(), data.teams.end());
  data.teams.erase(std::unique(data.teams.begin(), data.teams.end()), data.teams.end());
  data.names = {"home", "half2", "leading", "trailing"};
  auto idx = [&](const TeamId& t) {
    return static_cast<int>(std::lower_bound(data.teams.begin(), data.teams.end(), t) -
                            data.teams.begin());
  };
  const CovariatePath none = zero_path();
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& m : training) {
    s1 += m.first_half_end - 45.0;
    s2 += m.full_time - 90.0;
    const int ih = idx(m.home);
    const int ia = idx(m.away);
    for (const auto& p : exposure_pieces(m, none)) {
      const bool home = p.side == Side::Home;
      IntensityRow r;
      r.attack = home ? ih : ia;
      r.defence = home ? ia : ih;
      r.exposure = p.end - p.start;
      r.events = p.goals_at_end;
      r.x = {home ? 1.0 : 0.0, p.half == 2 ? 1.0 : 0.0,
             p.own_goals > p.opp_goals ? 1.0 : 0.0, p.own_goals < p.opp_goals ? 1.0 : 0.0};
      data.rows.push_back(std::move(r));
    }
  }
  ZouModel model;
  model.intensity = fit_intensity(data);
  const double n = static_cast<double>(training.size());
  model.shared.stoppage1 = s1 / n;
  model.shared.stoppage2 = s2 / n;
  model.shared.half2_mult = std::exp(model.intensity.coefficient("half2"));
  model.shared.state_mult = {std::exp(model.intensity.coefficient("leading")), 1.0,
                             std::exp(model.intensity.coefficient("trailing"))};
  return model;
}

ZouCalibration zou_calibrate(const CalibrationTarget& target, const ZouParams& init,
                             const PowellOptions& options) {
  target.validate();
  init.validate();
  if (!(init.theta01 > 0.0) || !(init.theta02 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "Zou calibration needs positive initial rates");
  auto params_at = [&](const Eigen::VectorXd& x) {
    ZouParams p = init;
    p.theta01 = std::exp(x[0]);
    p.theta02 = std::exp(x[1]);
    return p;
  };
  auto f = [&](const Eigen::VectorXd& x) {
    const ZouForecast z = zou_outcome_probs(ZouState{}, params_at(x));
    return calibration_loss(z.probs, z.over, target);
  };
  const PowellResult r = powell_minimize(
      f, Eigen::Vector2d(std::log(init.theta01), std::log(init.theta02)), options);
  ZouCalibration out;
  out.params = params_at(r.x);
  out.loss = r.f;
  out.iterations = r.iterations;
  out.poor_fit = r.f > kPoorFitLoss;
  return out;
}

}  // namespace inplay
