#pragma once

#include <array>
#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace inplay {

enum class ErrorCode {
  InvalidArgument,
  InvalidOdds,
  DataGap,
  MissingTeam,
  NumericOverflow,
  InvalidDate,
  FitFailure,
  IncomparableFits,
  StateError,
  CalibrationFailure,
  AlignmentError,
  ParseError,
  DegenerateBaseline,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using TeamId = std::string;
using Date = std::chrono::sys_days;

/// Parses an ISO "YYYY-MM-DD" date.
Date parse_date(std::string_view text);
std::string format_date(Date date);

enum class Side { Home = 0, Away = 1 };
enum class Outcome { Home = 0, Draw = 1, Away = 2 };

inline Side other(Side side) {
  return side == Side::Home ? Side::Away : Side::Home;
}
inline int index(Side side) { return static_cast<int>(side); }
inline int index(Outcome o) { return static_cast<int>(o); }

Outcome outcome_from_score(int home_goals, int away_goals);
char outcome_code(Outcome o);

enum class EventKind { Goal, RedCard, Shot };

struct MatchEvent {
  double minute = 0.0;  // continuous match clock
  int half = 1;
  EventKind kind = EventKind::Goal;
  TeamId team;
  double psxg = 0.0;  // shots only; 0 for off-target
};

// Match clock is continuous: the first half runs over [0, first_half_end] and
// the second half over (first_half_end, full_time].
struct MatchTimeline {
  std::string match_id;
  Date date{};
  std::string season;
  int gameweek = 0;
  TeamId home;
  TeamId away;
  std::vector<MatchEvent> events;
  double first_half_end = 45.0;
  double full_time = 90.0;
  int home_goals = 0;
  int away_goals = 0;

  Side side_of(const TeamId& team) const;
  Outcome outcome() const { return outcome_from_score(home_goals, away_goals); }
  int half_at(double minute) const { return minute < first_half_end ? 1 : 2; }
  /// Number of integer evaluation minutes, 0..floor(full_time).
  int evaluation_minutes() const;

  /// Throws StateError when ordering, half markers or the final score are
  /// inconsistent.
  void validate() const;
};

/// Recomputes home_goals/away_goals from goal events.
void recount_score(MatchTimeline& timeline);

// Distribution over (home win, draw, away win).
struct ForecastTriple {
  double home = 1.0 / 3.0;
  double draw = 1.0 / 3.0;
  double away = 1.0 / 3.0;

  static ForecastTriple make(double home, double draw, double away);
  double operator[](Outcome o) const;
  std::array<double, 3> as_array() const { return {home, draw, away}; }
  Outcome argmax() const;
};

struct OddsTriple {
  double home = 0.0;
  double draw = 0.0;
  double away = 0.0;
  double operator[](Outcome o) const;
};

struct OverUnderOdds {
  double over = 0.0;
  double under = 0.0;
};

inline constexpr std::array<double, 5> kGoalThresholds = {0.5, 1.5, 2.5, 3.5,
                                                          4.5};

struct MarketSnapshot {
  std::map<int, OddsTriple> by_minute;         // last traded 1X2 per minute
  std::map<double, OverUnderOdds> over_under;  // kickoff, keyed by threshold
};

ForecastTriple implied_probabilities(const OddsTriple& odds);

/// Over-probability with the over/under overround removed.
double implied_over_probability(const OverUnderOdds& odds);

/// Odds recorded at minute + lag. Throws DataGap when absent.
OddsTriple price_at(const MarketSnapshot& snapshot, int minute, int lag = 2);

}  // namespace inplay
