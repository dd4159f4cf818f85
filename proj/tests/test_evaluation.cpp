#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "inplay/evaluation.hpp"

using namespace inplay;

TEST_CASE("ranked probability score") {
  CHECK(rps({1.0, 0.0, 0.0}, Outcome::Home) == 0.0);
  CHECK(rps({1.0 / 3, 1.0 / 3, 1.0 / 3}, Outcome::Home) == doctest::Approx(5.0 / 18.0));
  CHECK(rps({0.0, 0.0, 1.0}, Outcome::Home) == 1.0);
  CHECK(rps({0.0, 1.0, 0.0}, Outcome::Draw) == 0.0);
}

TEST_CASE("log loss with floor") {
  CHECK(log_loss({1.0, 0.0, 0.0}, Outcome::Home) == 0.0);
  CHECK(log_loss({1.0 / 3, 1.0 / 3, 1.0 / 3}, Outcome::Away) == doctest::Approx(std::log(3.0)));
  CHECK(log_loss({1.0, 0.0, 0.0}, Outcome::Away) == doctest::Approx(27.631021115928547));
}

namespace {

std::vector<EvaluationPoint> grid(const std::string& model, double shift) {
  std::vector<EvaluationPoint> pts;
  for (int m = 0; m < 3; ++m)
    for (int t = 0; t < 4; ++t) {
      const double h = std::clamp(0.4 + 0.05 * t + shift, 0.0, 0.9);
      pts.push_back({"m" + std::to_string(m), t, model, {h, 0.9 - h, 0.1},
                     m == 1 ? Outcome::Draw : Outcome::Home});
    }
  return pts;
}

}  // namespace

TEST_CASE("identical model and benchmark give zero deltas") {
  auto pts = grid("betfair", 0.0);
  auto copy = grid("model", 0.0);
  pts.insert(pts.end(), copy.begin(), copy.end());
  const auto reports = evaluate(pts, std::string("betfair"));
  REQUIRE(reports.size() == 2);
  CHECK(reports[1].model == "model");
  CHECK(reports[1].n_points == 12);
  for (const auto& m : reports[1].per_minute) {
    REQUIRE(m.delta_log_loss);
    CHECK(*m.delta_log_loss == 0.0);
    CHECK(*m.delta_rps == 0.0);
  }
}

TEST_CASE("aggregates weight points equally and ignore order") {
  auto pts = grid("a", 0.1);
  double rps_sum = 0.0;
  long hits = 0;
  for (const auto& p : pts) {
    rps_sum += rps(p.forecast, p.outcome);
    hits += p.forecast.argmax() == p.outcome;
  }
  const auto r1 = evaluate(pts);
  std::reverse(pts.begin(), pts.end());
  const auto r2 = evaluate(pts);
  CHECK(r1[0].rps == doctest::Approx(rps_sum / pts.size()));
  CHECK(r1[0].accuracy == doctest::Approx(static_cast<double>(hits) / pts.size()));
  CHECK(r1[0].rps == r2[0].rps);
  CHECK(r1[0].log_loss == r2[0].log_loss);
}

TEST_CASE("misaligned grids are rejected") {
  auto pts = grid("betfair", 0.0);
  auto model = grid("model", 0.0);
  model.pop_back();
  pts.insert(pts.end(), model.begin(), model.end());
  try {
    evaluate(pts, std::string("betfair"));
    FAIL("expected AlignmentError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlignmentError);
    CHECK(std::string(e.what()).find("m2") != std::string::npos);
  }
}
