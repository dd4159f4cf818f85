#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "inplay/domain.hpp"

namespace inplay {

/// Objective returning f(x); fills *grad when grad is non-null.
using GradientObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double step_tol = 1e-6;   // max |Δx|
  double rel_f_tol = 1e-9;  // |Δf| / max(1, |f|)
  double grad_tol = 1e-7;   // max |g| / max(1, |f|)
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Quasi-Newton (BFGS, inverse-Hessian form) with Armijo backtracking.
MinimizeResult minimize_bfgs(const GradientObjective& objective,
                             Eigen::VectorXd x0,
                             const MinimizeOptions& options = {});

/// Central differences of the analytic gradient, symmetrised.
Eigen::MatrixXd numerical_hessian(const GradientObjective& objective,
                                  const Eigen::VectorXd& x,
                                  double rel_step = 1e-5);

struct PowellOptions {
  double ftol = 1e-8;
  int max_iterations = 200;
  double initial_step = 0.1;
  double line_tol = 1e-7;
};

struct PowellResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int improving_iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

class OptimizationFailure : public Error {
 public:
  OptimizationFailure(const std::string& what, Eigen::VectorXd last_good,
                      double last_f)
      : Error(ErrorCode::CalibrationFailure, what),
        last_good_(std::move(last_good)),
        last_f_(last_f) {}
  const Eigen::VectorXd& last_good() const { return last_good_; }
  double last_f() const { return last_f_; }

 private:
  Eigen::VectorXd last_good_;
  double last_f_;
};

/// Powell's direction-set method with bracketing and Brent line searches.
/// Stops when the relative improvement of one sweep falls below ftol or after
/// max_iterations sweeps. Throws OptimizationFailure on a non-finite value.
PowellResult powell_minimize(const ScalarObjective& f, Eigen::VectorXd x0,
                             const PowellOptions& options = {});

}  // namespace inplay
