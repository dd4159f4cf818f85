#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "inplay/aft.hpp"
#include "inplay/optimize.hpp"
#include "inplay/simulator.hpp"

namespace inplay {

struct CalibrationTarget {
  ForecastTriple p_mkt;
  std::map<double, double> p_over;  // threshold -> P(total goals > threshold)

  void validate() const;
};

/// Market target from kickoff 1X2 odds and over/under odds.
CalibrationTarget target_from_market(const MarketSnapshot& market, int lag = 0);

/// Sum of squared differences over the three outcomes and each target
/// threshold present in `target.p_over`.
double calibration_loss(const ForecastTriple& p,
                        const std::array<double, 5>& p_over,
                        const CalibrationTarget& target);

/// Simulated kickoff loss at eta. Every evaluation reuses the same
/// path-indexed draws, so the objective is deterministic in eta.
double calibration_objective(const EtaPair& eta, const CalibrationTarget& target,
                             const ShapeSpec& shape, const SimConfig& cfg);

struct CalibrationResult {
  EtaPair eta_init;
  EtaPair eta_kappa;
  double loss = 0.0;
  double initial_loss = 0.0;
  int iterations = 0;
  EtaPair shift;
  bool poor_fit = false;  // loss above 1e-3 at convergence
  std::vector<std::string> warnings;
};

inline constexpr double kPoorFitLoss = 1e-3;

CalibrationResult calibrate_match(const EtaPair& eta_init,
                                  const CalibrationTarget& target,
                                  const ShapeSpec& shape, const SimConfig& cfg,
                                  const PowellOptions& options = {});

}  // namespace inplay
