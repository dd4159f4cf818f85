#include "inplay/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace inplay {

const MatchTimeline* Dataset::find(const std::string& match_id) const {
  for (const auto& t : timelines)
    if (t.match_id == match_id) return &t;
  return nullptr;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

class CsvTable {
 public:
  CsvTable(std::istream& in, const std::string& name,
           const std::vector<std::string>& required)
      : name_(name) {
    std::string line;
    if (!std::getline(in, line)) return;
    const auto header = split_csv_line(line);
    for (std::size_t i = 0; i < header.size(); ++i) columns_[header[i]] = i;
    for (const auto& r : required)
      if (!columns_.count(r))
        throw Error(ErrorCode::ParseError, name_ + ": missing column '" + r + "'");
    long row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      rows_.push_back({row, split_csv_line(line)});
    }
  }

  struct Row {
    long number;
    std::vector<std::string> fields;
  };

  const std::vector<Row>& rows() const { return rows_; }
  bool has(const std::string& col) const { return columns_.count(col) != 0; }

  std::string get(const Row& r, const std::string& col) const {
    auto it = columns_.find(col);
    if (it == columns_.end() || it->second >= r.fields.size()) return {};
    return r.fields[it->second];
  }

  double number(const Row& r, const std::string& col) const {
    const std::string s = get(r, col);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() ||
        !std::isfinite(v))
      throw Error(ErrorCode::ParseError, name_ + " row " + std::to_string(r.number) +
                                             ": column '" + col + "' is not a number: '" +
                                             s + "'");
    return v;
  }

  int integer(const Row& r, const std::string& col) const {
    const double v = number(r, col);
    if (v != std::floor(v))
      throw Error(ErrorCode::ParseError, name_ + " row " + std::to_string(r.number) +
                                             ": column '" + col + "' is not an integer");
    return static_cast<int>(v);
  }

 private:
  std::string name_;
  std::map<std::string, std::size_t> columns_;
  std::vector<Row> rows_;
};

EventKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "goal") return EventKind::Goal;
  if (s == "red") return EventKind::RedCard;
  if (s == "shot") return EventKind::Shot;
  throw Error(ErrorCode::ParseError, where + ": unknown event kind '" + s + "'");
}

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Goal: return "goal";
    case EventKind::RedCard: return "red";
    case EventKind::Shot: return "shot";
  }
  return "goal";
}

double odds_value(const CsvTable& t, const CsvTable::Row& r, const std::string& col,
                  const std::string& name) {
  const double v = t.number(r, col);
  if (!(v > 1.0))
    throw Error(ErrorCode::InvalidOdds, name + " row " + std::to_string(r.number) +
                                            ": decimal odds must exceed 1 (got " +
                                            t.get(r, col) + ")");
  return v;
}

}  // namespace

Dataset ingest(std::istream& events, std::istream* odds, std::istream* over_under) {
  Dataset ds;
  const std::vector<std::string> required = {
      "match_id", "date", "home", "away", "minute", "half", "kind",
      "team", "psxg", "first_half_end", "full_time"};
  CsvTable ev(events, "events.csv", required);
  if (ev.rows().empty()) ds.warnings.push_back("events file has no rows");

  std::map<std::string, MatchTimeline> by_id;
  std::set<std::string> broken;
  std::map<std::string, int> clamped;
  for (const auto& row : ev.rows()) {
    const std::string where = "events.csv row " + std::to_string(row.number);
    const std::string id = ev.get(row, "match_id");
    if (id.empty()) throw Error(ErrorCode::ParseError, where + ": empty match_id");
    bool missing = false;
    for (const char* col : {"date", "home", "away", "first_half_end", "full_time"})
      if (ev.get(row, col).empty()) missing = true;
    const std::string kind = ev.get(row, "kind");
    const bool declaration = kind.empty() || kind == "none";
    if (!declaration)
      for (const char* col : {"minute", "half", "team"})
        if (ev.get(row, col).empty()) missing = true;
    if (missing) {
      if (broken.insert(id).second)
        ds.warnings.push_back(where + ": missing fields; match " + id + " excluded");
      continue;
    }

    auto [it, fresh] = by_id.try_emplace(id);
    MatchTimeline& m = it->second;
    if (fresh) {
      m.match_id = id;
      m.date = parse_date(ev.get(row, "date"));
      m.home = ev.get(row, "home");
      m.away = ev.get(row, "away");
      m.first_half_end = ev.number(row, "first_half_end");
      m.full_time = ev.number(row, "full_time");
      if (ev.has("season")) m.season = ev.get(row, "season");
      if (ev.has("gameweek") && !ev.get(row, "gameweek").empty())
        m.gameweek = ev.integer(row, "gameweek");
    } else if (m.home != ev.get(row, "home") || m.away != ev.get(row, "away")) {
      throw Error(ErrorCode::ParseError, where + ": teams disagree with earlier rows");
    }
    if (declaration) continue;

    MatchEvent e;
    e.kind = parse_kind(kind, where);
    e.minute = ev.number(row, "minute");
    e.half = ev.integer(row, "half");
    e.team = ev.get(row, "team");
    if (e.team != m.home && e.team != m.away)
      throw Error(ErrorCode::ParseError, where + ": team '" + e.team + "' not in match");
    if (e.half != 1 && e.half != 2)
      throw Error(ErrorCode::ParseError, where + ": half must be 1 or 2");
    if (e.kind == EventKind::Shot) {
      const std::string p = ev.get(row, "psxg");
      e.psxg = p.empty() ? 0.0 : ev.number(row, "psxg");
    }
    // Map reported minutes onto the continuous clock.
    const double before = e.minute;
    if (e.half == 2) e.minute = std::max(e.minute, m.first_half_end);
    else e.minute = std::min(e.minute, m.first_half_end);
    e.minute = std::min(e.minute, m.full_time);
    if (e.minute != before) ++clamped[id];
    m.events.push_back(e);
  }

  for (auto& [id, m] : by_id) {
    if (broken.count(id)) continue;
    std::stable_sort(m.events.begin(), m.events.end(),
                     [](const MatchEvent& a, const MatchEvent& b) { return a.minute < b.minute; });
    recount_score(m);
    m.validate();
    if (clamped.count(id))
      ds.warnings.push_back("match " + id + ": " + std::to_string(clamped[id]) +
                            " event minutes moved onto the match clock");
    ds.timelines.push_back(std::move(m));
  }
  ds.excluded.assign(broken.begin(), broken.end());
  std::sort(ds.timelines.begin(), ds.timelines.end(),
            [](const MatchTimeline& a, const MatchTimeline& b) {
              return std::tie(a.date, a.match_id) < std::tie(b.date, b.match_id);
            });

  if (odds) {
    CsvTable t(*odds, "odds.csv", {"match_id", "minute", "odds_home", "odds_draw", "odds_away"});
    for (const auto& row : t.rows()) {
      OddsTriple o{odds_value(t, row, "odds_home", "odds.csv"),
                   odds_value(t, row, "odds_draw", "odds.csv"),
                   odds_value(t, row, "odds_away", "odds.csv")};
      ds.markets[t.get(row, "match_id")].by_minute[t.integer(row, "minute")] = o;
    }
  }
  if (over_under) {
    CsvTable t(*over_under, "ou.csv", {"match_id", "threshold", "odds_over", "odds_under"});
    for (const auto& row : t.rows()) {
      OverUnderOdds o{odds_value(t, row, "odds_over", "ou.csv"),
                      odds_value(t, row, "odds_under", "ou.csv")};
      ds.markets[t.get(row, "match_id")].over_under[t.number(row, "threshold")] = o;
    }
  }
  for (const auto& id : ds.excluded) ds.markets.erase(id);
  return ds;
}

Dataset ingest_files(const std::filesystem::path& events,
                     const std::optional<std::filesystem::path>& odds,
                     const std::optional<std::filesystem::path>& over_under) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + p.string());
    return in;
  };
  std::ifstream ev = open(events);
  std::optional<std::ifstream> od;
  std::optional<std::ifstream> ou;
  if (odds) od = open(*odds);
  if (over_under) ou = open(*over_under);
  return ingest(ev, od ? &*od : nullptr, ou ? &*ou : nullptr);
}

void write_events_csv(std::ostream& out, std::span<const MatchTimeline> timelines) {
  out << "match_id,date,season,gameweek,home,away,minute,half,kind,team,psxg,"
         "first_half_end,full_time\n";
  out << std::setprecision(10);
  for (const auto& m : timelines) {
    const std::string head = m.match_id + "," + format_date(m.date) + "," + m.season + "," +
                             std::to_string(m.gameweek) + "," + m.home + "," + m.away + ",";
    std::ostringstream tail;
    tail << std::setprecision(10) << "," << m.first_half_end << "," << m.full_time << "\n";
    if (m.events.empty()) out << head << ",,none,," << tail.str();
    for (const auto& e : m.events)
      out << head << e.minute << "," << e.half << "," << kind_name(e.kind) << "," << e.team
          << "," << e.psxg << tail.str();
  }
}

void write_odds_csv(std::ostream& out, const std::map<std::string, MarketSnapshot>& markets) {
  out << "match_id,minute,odds_home,odds_draw,odds_away\n" << std::setprecision(10);
  for (const auto& [id, m] : markets)
    for (const auto& [minute, o] : m.by_minute)
      out << id << "," << minute << "," << o.home << "," << o.draw << "," << o.away << "\n";
}

void write_over_under_csv(std::ostream& out,
                          const std::map<std::string, MarketSnapshot>& markets) {
  out << "match_id,threshold,odds_over,odds_under\n" << std::setprecision(10);
  for (const auto& [id, m] : markets)
    for (const auto& [g, o] : m.over_under)
      out << id << "," << g << "," << o.over << "," << o.under << "\n";
}

bool has_complete_market(const MatchTimeline& timeline, const MarketSnapshot* market,
                         int lag) {
  if (!market) return false;
  for (double g : kGoalThresholds)
    if (!market->over_under.count(g)) return false;
  for (int m = 0; m < timeline.evaluation_minutes(); ++m)
    if (!market->by_minute.count(m + lag)) return false;
  return true;
}

}  // namespace inplay
