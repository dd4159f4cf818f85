#pragma once

#include <json.hpp>
#include <vector>

#include "inplay/aft.hpp"
#include "inplay/maia.hpp"
#include "inplay/zou.hpp"

namespace inplay {

// Everything needed to forecast with the fitted AFT model.
struct WeibullModel {
  RatingSet ratings;
  ShapeSpec shape;
  CovariateCoeffs coeffs;
  LinearBaseline baseline;
  std::vector<FitReport> reports;
  std::vector<std::string> warnings;

  CovariateModel covariates() const { return coeffs.model(); }
};

nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const WeibullModel& model);
nlohmann::json to_json(const ZouModel& model);
nlohmann::json to_json(const MaiaParams& params);

/// Reads a document written by one of the to_json overloads above; the
/// "model" field selects the type. Throws ConfigError on a tag mismatch.
WeibullModel weibull_from_json(const nlohmann::json& j);
ZouModel zou_from_json(const nlohmann::json& j);
MaiaParams maia_from_json(const nlohmann::json& j);

}  // namespace inplay
