#include "inplay/covariates.hpp"

#include <Eigen/Dense>
#include <algorithm>

namespace inplay {

namespace {

const CovariatePoint& point_for(const std::vector<CovariatePoint>& points,
                                double minute, bool inclusive) {
  // First point with minute > t (inclusive) or >= t (left limit).
  auto it = inclusive
                ? std::upper_bound(points.begin(), points.end(), minute,
                                   [](double t, const CovariatePoint& p) {
                                     return t < p.minute;
                                   })
                : std::lower_bound(points.begin(), points.end(), minute,
                                   [](const CovariatePoint& p, double t) {
                                     return p.minute < t;
                                   });
  if (it == points.begin()) return points.front();
  return *std::prev(it);
}

double cumulative(const MatchTimeline& timeline, const TeamId& team, double t,
                  EventKind kind) {
  double total = 0.0;
  for (const auto& e : timeline.events) {
    if (e.minute > t) break;
    if (e.kind != kind || e.team != team) continue;
    total += kind == EventKind::Shot ? e.psxg : 1.0;
  }
  return total;
}

LinearBaseline fit_baseline(std::span<const MatchTimeline> training,
                            EventKind kind) {
  if (training.empty())
    throw Error(ErrorCode::DegenerateBaseline, "no training matches");
  Eigen::Matrix2d xtx = Eigen::Matrix2d::Zero();
  Eigen::Vector2d xty = Eigen::Vector2d::Zero();
  std::size_t n = 0;
  for (const auto& m : training) {
    for (const TeamId* team : {&m.home, &m.away}) {
      // Walk events once per team-match rather than re-summing per minute.
      double running = 0.0;
      auto it = m.events.begin();
      for (int t = 0; t <= 90; ++t) {
        while (it != m.events.end() && it->minute <= t) {
          if (it->kind == kind && it->team == *team)
            running += kind == EventKind::Shot ? it->psxg : 1.0;
          ++it;
        }
        Eigen::Vector2d x(1.0, t);
        xtx += x * x.transpose();
        xty += x * running;
        ++n;
      }
    }
  }
  Eigen::Vector2d beta = xtx.ldlt().solve(xty);
  return LinearBaseline{beta[1], beta[0], n};
}

}  // namespace

const CovariateValues& CovariatePath::at(double minute, Side side) const {
  return point_for(points, minute, true).of(side);
}

const CovariateValues& CovariatePath::before(double minute, Side side) const {
  return point_for(points, minute, false).of(side);
}

double cumulative_psxg(const MatchTimeline& timeline, const TeamId& team,
                       double t) {
  return cumulative(timeline, team, t, EventKind::Shot);
}

double cumulative_goals(const MatchTimeline& timeline, const TeamId& team,
                        double t) {
  return cumulative(timeline, team, t, EventKind::Goal);
}

LinearBaseline fit_psxg_baseline(std::span<const MatchTimeline> training) {
  const bool any_shots =
      std::any_of(training.begin(), training.end(), [](const MatchTimeline& m) {
        return std::any_of(m.events.begin(), m.events.end(),
                           [](const MatchEvent& e) { return e.kind == EventKind::Shot; });
      });
  if (!any_shots)
    throw Error(ErrorCode::DegenerateBaseline, "training data has no shots");
  return fit_baseline(training, EventKind::Shot);
}

LinearBaseline fit_goals_baseline(std::span<const MatchTimeline> training) {
  return fit_baseline(training, EventKind::Goal);
}

CovariatePath covariate_path(const MatchTimeline& timeline,
                             const LinearBaseline& baseline,
                             DeviationMode mode) {
  CovariatePath path;
  path.mode = mode;
  double stat_home = 0.0;
  double stat_away = 0.0;
  int reds_home = 0;
  int reds_away = 0;

  auto snapshot = [&](double minute) {
    CovariatePoint p;
    p.minute = minute;
    p.home.red = reds_away - reds_home;
    p.away.red = reds_home - reds_away;
    if (mode != DeviationMode::None) {
      p.home.dev = stat_home - baseline.at(minute);
      p.away.dev = stat_away - baseline.at(minute);
    }
    return p;
  };

  path.points.push_back(snapshot(0.0));
  const auto& events = timeline.events;
  for (std::size_t i = 0; i < events.size();) {
    const double minute = events[i].minute;
    // Apply every event sharing this minute before taking the snapshot.
    for (; i < events.size() && events[i].minute == minute; ++i) {
      const auto& e = events[i];
      const bool home = e.team == timeline.home;
      switch (e.kind) {
        case EventKind::RedCard:
          (home ? reds_home : reds_away)++;
          break;
        case EventKind::Shot:
          if (mode == DeviationMode::Psxg) (home ? stat_home : stat_away) += e.psxg;
          break;
        case EventKind::Goal:
          if (mode == DeviationMode::Goals) (home ? stat_home : stat_away) += 1.0;
          break;
      }
    }
    if (minute == 0.0) path.points.front() = snapshot(0.0);
    else path.points.push_back(snapshot(minute));
  }
  return path;
}

CovariatePath zero_path() {
  CovariatePath path;
  path.points.push_back(CovariatePoint{});
  return path;
}

}  // namespace inplay
