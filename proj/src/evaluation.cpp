#include "inplay/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace inplay {

double rps(const ForecastTriple& f, Outcome outcome) {
  const auto p = f.as_array();
  const int y = index(outcome);
  double cum_p = 0.0;
  double cum_a = 0.0;
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    cum_p += p[static_cast<std::size_t>(i)];
    cum_a += i == y ? 1.0 : 0.0;
    total += (cum_p - cum_a) * (cum_p - cum_a);
  }
  return 0.5 * total;
}

double log_loss(const ForecastTriple& f, Outcome outcome) {
  return -std::log(std::max(f[outcome], kLogLossFloor));
}

namespace {

using Key = std::pair<std::string, int>;

struct Accumulator {
  long n = 0;
  double hits = 0.0;
  double rps = 0.0;
  double ll = 0.0;

  void add(const EvaluationPoint& p) {
    ++n;
    hits += p.forecast.argmax() == p.outcome ? 1.0 : 0.0;
    rps += inplay::rps(p.forecast, p.outcome);
    ll += log_loss(p.forecast, p.outcome);
  }
};

}  // namespace

std::vector<MetricReport> evaluate(std::span<const EvaluationPoint> points,
                                   const std::optional<std::string>& benchmark) {
  std::vector<std::string> models;
  std::map<std::string, std::map<Key, const EvaluationPoint*>> grid;
  for (const auto& p : points) {
    if (!grid.count(p.model)) models.push_back(p.model);
    grid[p.model][{p.match_id, p.minute}] = &p;
  }

  if (benchmark) {
    auto it = grid.find(*benchmark);
    if (it == grid.end())
      throw Error(ErrorCode::AlignmentError, "benchmark '" + *benchmark + "' has no points");
    const auto& ref = it->second;
    for (const auto& m : models) {
      const auto& g = grid[m];
      std::vector<std::string> missing;
      for (const auto& [k, _] : ref)
        if (!g.count(k)) missing.push_back(m + ":" + k.first + "@" + std::to_string(k.second));
      for (const auto& [k, _] : g)
        if (!ref.count(k))
          missing.push_back(*benchmark + ":" + k.first + "@" + std::to_string(k.second));
      if (!missing.empty()) {
        std::string msg = "evaluation grids differ (" + std::to_string(missing.size()) +
                          " points):";
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i)
          msg += " " + missing[i];
        throw Error(ErrorCode::AlignmentError, msg);
      }
    }
  }

  std::map<int, double> bench_ll;
  std::map<int, double> bench_rps;
  if (benchmark) {
    std::map<int, Accumulator> by_minute;
    for (const auto& [k, p] : grid[*benchmark]) by_minute[k.second].add(*p);
    for (const auto& [minute, a] : by_minute) {
      bench_ll[minute] = a.ll / a.n;
      bench_rps[minute] = a.rps / a.n;
    }
  }

  std::vector<MetricReport> out;
  for (const auto& m : models) {
    Accumulator total;
    std::map<int, Accumulator> by_minute;
    for (const auto& [k, p] : grid[m]) {
      total.add(*p);
      by_minute[k.second].add(*p);
    }
    MetricReport r;
    r.model = m;
    r.n_points = total.n;
    r.accuracy = total.hits / total.n;
    r.rps = total.rps / total.n;
    r.log_loss = total.ll / total.n;
    for (const auto& [minute, a] : by_minute) {
      MinuteMetric mm;
      mm.minute = minute;
      mm.n = a.n;
      mm.accuracy = a.hits / a.n;
      mm.rps = a.rps / a.n;
      mm.log_loss = a.ll / a.n;
      if (benchmark) {
        mm.delta_log_loss = mm.log_loss - bench_ll[minute];
        mm.delta_rps = mm.rps - bench_rps[minute];
      }
      r.per_minute.push_back(mm);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace inplay
