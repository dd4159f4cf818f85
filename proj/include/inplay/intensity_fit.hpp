#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "inplay/aft.hpp"
#include "inplay/domain.hpp"

namespace inplay {

struct PoissonGlmFit {
  Eigen::VectorXd coef;            // zero for dropped columns
  Eigen::VectorXd se;              // NaN for dropped columns
  std::vector<bool> dropped;       // columns without variation
  double loglik = 0.0;
  int iterations = 0;
};

/// Poisson regression y ~ Poisson(exposure * exp(X b)) by damped Newton.
/// Column 0 is treated as the intercept; any other constant column is
/// dropped and its coefficient fixed at zero.
PoissonGlmFit fit_poisson_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& exposure);

// One piece of a team's scoring exposure with constant regressors.
struct IntensityRow {
  int attack = 0;
  int defence = 0;
  double exposure = 0.0;
  double events = 0.0;
  std::vector<double> x;
};

struct IntensityData {
  std::vector<TeamId> teams;  // sorted
  std::vector<std::string> names;
  std::vector<IntensityRow> rows;
};

// log rate = intercept + attack[team] + defence[opponent] + coef'x with
// sum-to-zero team effects.
struct IntensityFit {
  double intercept = 0.0;
  std::map<TeamId, double> attack;
  std::map<TeamId, double> defence;
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd coef_se;
  std::vector<bool> dropped;
  double loglik = 0.0;

  double coefficient(const std::string& name) const;
};

IntensityFit fit_intensity(const IntensityData& data);

// Stretch of one team's match time with constant state, split at every event
// and at half-time.
struct ExposurePiece {
  Side side = Side::Home;
  double start = 0.0;
  double end = 0.0;
  int half = 1;
  int own_goals = 0;
  int opp_goals = 0;
  int own_reds = 0;
  int opp_reds = 0;
  double dev = 0.0;  // deviation covariate from `path` at piece start
  int goals_at_end = 0;  // goals by this team at the piece's right end
};

std::vector<ExposurePiece> exposure_pieces(const MatchTimeline& timeline,
                                           const CovariatePath& path);

}  // namespace inplay
