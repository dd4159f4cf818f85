#include "inplay/calibration.hpp"

#include <cmath>

namespace inplay {

void CalibrationTarget::validate() const {
  for (double p : p_mkt.as_array())
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "target probability outside [0, 1]");
  double last = 1.0;
  for (const auto& [g, p] : p_over) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "over probability outside [0, 1]");
    if (p > last + 1e-12)
      throw Error(ErrorCode::InvalidArgument, "over probabilities must not increase");
    last = p;
  }
}

CalibrationTarget target_from_market(const MarketSnapshot& market, int lag) {
  CalibrationTarget t;
  t.p_mkt = implied_probabilities(price_at(market, 0, lag));
  for (double g : kGoalThresholds) {
    auto it = market.over_under.find(g);
    if (it == market.over_under.end())
      throw Error(ErrorCode::DataGap, "missing over/under odds for threshold " +
                                          std::to_string(g));
    t.p_over[g] = implied_over_probability(it->second);
  }
  return t;
}

double calibration_loss(const ForecastTriple& p,
                        const std::array<double, 5>& p_over,
                        const CalibrationTarget& target) {
  double loss = 0.0;
  for (Outcome o : {Outcome::Home, Outcome::Draw, Outcome::Away}) {
    const double d = p[o] - target.p_mkt[o];
    loss += d * d;
  }
  for (std::size_t i = 0; i < kGoalThresholds.size(); ++i) {
    auto it = target.p_over.find(kGoalThresholds[i]);
    if (it == target.p_over.end()) continue;
    const double d = p_over[i] - it->second;
    loss += d * d;
  }
  return loss;
}

double calibration_objective(const EtaPair& eta, const CalibrationTarget& target,
                             const ShapeSpec& shape, const SimConfig& cfg) {
  const SimForecast f = forecast(MatchState{}, eta, shape, cfg);
  return calibration_loss(f.probs, f.over, target);
}

CalibrationResult calibrate_match(const EtaPair& eta_init,
                                  const CalibrationTarget& target,
                                  const ShapeSpec& shape, const SimConfig& cfg,
                                  const PowellOptions& options) {
  target.validate();
  auto f = [&](const Eigen::VectorXd& x) {
    return calibration_objective({x[0], x[1]}, target, shape, cfg);
  };
  CalibrationResult r;
  r.eta_init = eta_init;
  r.initial_loss = f(Eigen::Vector2d(eta_init.home, eta_init.away));
  const PowellResult p =
      powell_minimize(f, Eigen::Vector2d(eta_init.home, eta_init.away), options);
  r.eta_kappa = {p.x[0], p.x[1]};
  r.loss = p.f;
  r.iterations = p.iterations;
  r.shift = {r.eta_kappa.home - eta_init.home, r.eta_kappa.away - eta_init.away};
  if (!p.converged)
    r.warnings.push_back("Powell stopped at the iteration cap");
  if (r.loss > kPoorFitLoss) {
    r.poor_fit = true;
    r.warnings.push_back("calibration loss " + std::to_string(r.loss) +
                         " exceeds " + std::to_string(kPoorFitLoss));
  }
  return r;
}

}  // namespace inplay
