#include "inplay/domain.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace inplay {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidOdds: return "invalid-odds";
    case ErrorCode::DataGap: return "data-gap";
    case ErrorCode::MissingTeam: return "missing-team";
    case ErrorCode::NumericOverflow: return "numeric-overflow";
    case ErrorCode::InvalidDate: return "invalid-date";
    case ErrorCode::FitFailure: return "fit-failure";
    case ErrorCode::IncomparableFits: return "incomparable-fits";
    case ErrorCode::StateError: return "state-error";
    case ErrorCode::CalibrationFailure: return "calibration-failure";
    case ErrorCode::AlignmentError: return "alignment-error";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::DegenerateBaseline: return "degenerate-baseline";
    case ErrorCode::ConfigError: return "config-error";
  }
  return "unknown";
}

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto bad = [&] {
    return Error(ErrorCode::InvalidDate,
                 "malformed date '" + std::string(text) + "'");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  const char* p = text.data();
  if (std::from_chars(p, p + 4, y).ec != std::errc{} ||
      std::from_chars(p + 5, p + 7, m).ec != std::errc{} ||
      std::from_chars(p + 8, p + 10, d).ec != std::errc{})
    throw bad();
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

Outcome outcome_from_score(int home_goals, int away_goals) {
  if (home_goals > away_goals) return Outcome::Home;
  if (home_goals == away_goals) return Outcome::Draw;
  return Outcome::Away;
}

char outcome_code(Outcome o) {
  switch (o) {
    case Outcome::Home: return 'H';
    case Outcome::Draw: return 'D';
    case Outcome::Away: return 'A';
  }
  return '?';
}

Side MatchTimeline::side_of(const TeamId& team) const {
  if (team == home) return Side::Home;
  if (team == away) return Side::Away;
  throw Error(ErrorCode::MissingTeam,
              "team '" + team + "' does not play in match " + match_id);
}

int MatchTimeline::evaluation_minutes() const {
  return static_cast<int>(std::floor(full_time)) + 1;
}

void MatchTimeline::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::StateError, "match " + match_id + ": " + why);
  };
  if (home.empty() || away.empty()) fail("empty team id");
  if (home == away) fail("home and away are the same team");
  if (first_half_end < 45.0) fail("first_half_end < 45");
  if (full_time < 90.0) fail("full_time < 90");
  if (full_time < first_half_end) fail("full_time before first_half_end");
  int hg = 0;
  int ag = 0;
  double last = 0.0;
  for (const auto& e : events) {
    if (e.minute < 0.0 || e.minute < last) fail("event minutes not ordered");
    last = e.minute;
    if (e.half != half_at(e.minute) && !(e.half == 1 && e.minute == first_half_end))
      fail("half marker inconsistent with minute");
    if (e.kind == EventKind::Shot) {
      if (e.psxg < 0.0 || e.psxg > 1.0) fail("psxg outside [0,1]");
    } else if (e.psxg != 0.0) {
      fail("psxg on a non-shot event");
    }
    Side s = side_of(e.team);
    if (e.kind == EventKind::Goal) (s == Side::Home ? hg : ag)++;
  }
  if (hg != home_goals || ag != away_goals)
    fail("final score does not match goal events");
}

void recount_score(MatchTimeline& timeline) {
  timeline.home_goals = 0;
  timeline.away_goals = 0;
  for (const auto& e : timeline.events) {
    if (e.kind != EventKind::Goal) continue;
    if (e.team == timeline.home) ++timeline.home_goals;
    else ++timeline.away_goals;
  }
}

ForecastTriple ForecastTriple::make(double home, double draw, double away) {
  for (double p : {home, draw, away})
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
      throw Error(ErrorCode::InvalidArgument, "probability outside [0,1]");
  if (std::abs(home + draw + away - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "forecast does not sum to one");
  return ForecastTriple{home, draw, away};
}

double ForecastTriple::operator[](Outcome o) const {
  switch (o) {
    case Outcome::Home: return home;
    case Outcome::Draw: return draw;
    case Outcome::Away: return away;
  }
  return 0.0;
}

Outcome ForecastTriple::argmax() const {
  if (home >= draw && home >= away) return Outcome::Home;
  if (draw >= away) return Outcome::Draw;
  return Outcome::Away;
}

double OddsTriple::operator[](Outcome o) const {
  switch (o) {
    case Outcome::Home: return home;
    case Outcome::Draw: return draw;
    case Outcome::Away: return away;
  }
  return 0.0;
}

ForecastTriple implied_probabilities(const OddsTriple& odds) {
  for (double o : {odds.home, odds.draw, odds.away})
    if (!(o > 1.0))
      throw Error(ErrorCode::InvalidOdds, "decimal odds must exceed 1.0");
  const double ih = 1.0 / odds.home;
  const double id = 1.0 / odds.draw;
  const double ia = 1.0 / odds.away;
  const double total = ih + id + ia;
  ForecastTriple p{ih / total, id / total, 0.0};
  p.away = 1.0 - p.home - p.draw;
  return p;
}

double implied_over_probability(const OverUnderOdds& odds) {
  if (!(odds.over > 1.0) || !(odds.under > 1.0))
    throw Error(ErrorCode::InvalidOdds, "decimal odds must exceed 1.0");
  const double io = 1.0 / odds.over;
  const double iu = 1.0 / odds.under;
  return io / (io + iu);
}

OddsTriple price_at(const MarketSnapshot& snapshot, int minute, int lag) {
  auto it = snapshot.by_minute.find(minute + lag);
  if (it == snapshot.by_minute.end())
    throw Error(ErrorCode::DataGap,
                "no 1X2 price at minute " + std::to_string(minute + lag));
  return it->second;
}

}  // namespace inplay
