#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inplay/domain.hpp"

namespace inplay {

struct Dataset {
  std::vector<MatchTimeline> timelines;  // sorted by (date, match_id)
  std::map<std::string, MarketSnapshot> markets;
  std::vector<std::string> warnings;
  std::vector<std::string> excluded;  // match ids dropped for missing fields

  const MatchTimeline* find(const std::string& match_id) const;
};

/// Parses events.csv (required), odds.csv and ou.csv (optional). Columns are
/// matched by header name. A row with kind empty or "none" declares a match
/// without events. Malformed values raise ParseError with the row number;
/// odds not above 1 raise InvalidOdds.
Dataset ingest(std::istream& events, std::istream* odds = nullptr,
               std::istream* over_under = nullptr);

Dataset ingest_files(const std::filesystem::path& events,
                     const std::optional<std::filesystem::path>& odds = std::nullopt,
                     const std::optional<std::filesystem::path>& over_under = std::nullopt);

void write_events_csv(std::ostream& out, std::span<const MatchTimeline> timelines);
void write_odds_csv(std::ostream& out, const std::map<std::string, MarketSnapshot>& markets);
void write_over_under_csv(std::ostream& out,
                          const std::map<std::string, MarketSnapshot>& markets);

/// Kickoff over/under at every threshold and a 1X2 price at minute + lag for
/// every evaluation minute.
bool has_complete_market(const MatchTimeline& timeline, const MarketSnapshot* market,
                         int lag);

}  // namespace inplay
