#include "inplay/optimize.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>

namespace inplay {

namespace {

double rel_grad(const Eigen::VectorXd& g, double f) {
  return g.cwiseAbs().maxCoeff() / std::max(1.0, std::abs(f));
}

}  // namespace

MinimizeResult minimize_bfgs(const GradientObjective& objective,
                             Eigen::VectorXd x0,
                             const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  res.grad.resize(n);
  res.f = objective(res.x, &res.grad);
  if (!std::isfinite(res.f) || !res.grad.allFinite())
    throw Error(ErrorCode::FitFailure, "objective not finite at start point");

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  bool reset_once = false;
  Eigen::VectorXd g_new(n);

  for (int it = 0; it < options.max_iterations; ++it) {
    res.iterations = it + 1;
    if (rel_grad(res.grad, res.f) < options.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      return res;
    }
    Eigen::VectorXd dir = -hinv * res.grad;
    double slope = dir.dot(res.grad);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -res.grad;
      slope = dir.dot(res.grad);
    }
    // Keep the first trial step bounded; likelihood surfaces here are on a
    // log scale where unit moves are already large.
    const double max_step = dir.cwiseAbs().maxCoeff();
    double step = max_step > 1.0 ? 1.0 / max_step : 1.0;

    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = res.x + step * dir;
      f_new = objective(x_new, &g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!reset_once) {
        reset_once = true;
        hinv.setIdentity();
        scaled = false;
        continue;
      }
      res.converged = rel_grad(res.grad, res.f) < 1e-4;
      res.message = "line search could not decrease the objective";
      return res;
    }
    reset_once = false;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.grad;
    const double f_old = res.f;
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;

    const double step_inf = s.cwiseAbs().maxCoeff();
    const double rel_change = std::abs(f_old - f_new) / std::max(1.0, std::abs(f_new));
    if (step_inf < options.step_tol && rel_change < options.rel_f_tol) {
      res.converged = true;
      res.message = "step and objective change below tolerance";
      return res;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      // H+ = (I - rho s y')H(I - rho y s') + rho s s'
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
              rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  res.message = "iteration limit reached";
  res.converged = false;
  return res;
}

Eigen::MatrixXd numerical_hessian(const GradientObjective& objective,
                                  const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd gp(n);
  Eigen::VectorXd gm(n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    objective(xp, &gp);
    xp[i] = x[i] - step;
    objective(xp, &gm);
    xp[i] = x[i];
    h.col(i) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

namespace {

constexpr double kGolden = 1.618033988749895;
constexpr double kCGold = 0.3819660112501051;

struct LineFunction {
  const ScalarObjective& f;
  const Eigen::VectorXd& origin;
  const Eigen::VectorXd& dir;
  int& evaluations;
  const Eigen::VectorXd& last_good;
  double last_f;

  double operator()(double t) const {
    ++evaluations;
    const double v = f(origin + t * dir);
    if (!std::isfinite(v))
      throw OptimizationFailure("objective returned a non-finite value",
                                last_good, last_f);
    return v;
  }
};

// Returns (t_min, f_min) along the line; f0 = value at t = 0.
std::pair<double, double> line_minimize(const LineFunction& g, double f0,
                                        double step, double tol) {
  // Bracket: a < b < c (or reversed) with g(b) <= g(a), g(b) <= g(c).
  double a = 0.0;
  double fa = f0;
  double b = step;
  double fb = g(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = b + kGolden * (b - a);
  double fc = g(c);
  int guard = 0;
  while (fb > fc && guard++ < 60) {
    const double r = (b - a) * (fb - fc);
    const double q = (b - c) * (fb - fa);
    double denom = 2.0 * std::copysign(std::max(std::abs(q - r), 1e-20), q - r);
    double u = b - ((b - c) * q - (b - a) * r) / denom;
    const double ulim = b + 100.0 * (c - b);
    double fu;
    if ((b - u) * (u - c) > 0.0) {
      fu = g(u);
      if (fu < fc) {
        a = b; fa = fb; b = u; fb = fu;
        break;
      }
      if (fu > fb) {
        c = u; fc = fu;
        break;
      }
      u = c + kGolden * (c - b);
      fu = g(u);
    } else if ((c - u) * (u - ulim) > 0.0) {
      fu = g(u);
      if (fu < fc) {
        b = c; fb = fc; c = u; fc = fu;
        u = c + kGolden * (c - b);
        fu = g(u);
      }
    } else {
      u = c + kGolden * (c - b);
      fu = g(u);
    }
    a = b; fa = fb; b = c; fb = fc; c = u; fc = fu;
  }

  // Brent on [lo, hi] starting from b.
  double lo = std::min(a, c);
  double hi = std::max(a, c);
  double x = b, w = b, v = b;
  double fx = fb, fw = fb, fv = fb;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double xm = 0.5 * (lo + hi);
    const double tol1 = tol * std::abs(x) + 1e-10;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (hi - lo)) break;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (lo - x) ||
          p >= q * (hi - x)) {
        e = (x >= xm ? lo - x : hi - x);
        d = kCGold * e;
      } else {
        d = p / q;
        const double u = x + d;
        if (u - lo < tol2 || hi - u < tol2) d = std::copysign(tol1, xm - x);
      }
    } else {
      e = (x >= xm ? lo - x : hi - x);
      d = kCGold * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = g(u);
    if (fu <= fx) {
      if (u >= x) lo = x; else hi = x;
      v = w; w = x; x = u;
      fv = fw; fw = fx; fx = fu;
    } else {
      if (u < x) lo = u; else hi = u;
      if (fu <= fw || w == x) {
        v = w; w = u; fv = fw; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (f0 <= fx) return {0.0, f0};
  return {x, fx};
}

}  // namespace

PowellResult powell_minimize(const ScalarObjective& f, Eigen::VectorXd x0,
                             const PowellOptions& options) {
  const Eigen::Index n = x0.size();
  PowellResult res;
  res.x = std::move(x0);
  res.f = f(res.x);
  res.evaluations = 1;
  if (!std::isfinite(res.f))
    throw OptimizationFailure("objective not finite at start point", res.x,
                              res.f);
  if (res.f == 0.0) {
    res.converged = true;
    return res;
  }

  Eigen::MatrixXd dirs = Eigen::MatrixXd::Identity(n, n) * options.initial_step;
  Eigen::VectorXd start = res.x;

  auto minimize_along = [&](const Eigen::VectorXd& dir) {
    LineFunction g{f, res.x, dir, res.evaluations, res.x, res.f};
    auto [t, ft] = line_minimize(g, res.f, 1.0, options.line_tol);
    if (t != 0.0) {
      res.x += t * dir;
      res.f = ft;
    }
    return t * dir;
  };

  const Eigen::MatrixXd basis = dirs;
  bool fresh = true;
  for (int it = 0; it < options.max_iterations; ++it) {
    res.iterations = it + 1;
    const double f_start = res.f;
    Eigen::Index biggest = 0;
    double biggest_drop = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double before = res.f;
      Eigen::VectorXd moved = minimize_along(dirs.col(i));
      // Keep a direction's scale in step with how far the last search went.
      const double len = moved.norm();
      if (len > 1e-12) dirs.col(i) = moved;
      if (before - res.f > biggest_drop) {
        biggest_drop = before - res.f;
        biggest = i;
      }
    }
    if (res.f < f_start) ++res.improving_iterations;
    if (2.0 * (f_start - res.f) <=
            options.ftol * (std::abs(f_start) + std::abs(res.f)) + 1e-25 ||
        res.f == 0.0) {
      // A stalled sweep over a degenerate direction set is not a minimum;
      // only a stall over the coordinate basis counts.
      if (fresh || res.f == 0.0) {
        res.converged = true;
        return res;
      }
      dirs = basis;
      fresh = true;
      start = res.x;
      continue;
    }
    fresh = false;
    const Eigen::VectorXd extrapolated = 2.0 * res.x - start;
    const Eigen::VectorXd net = res.x - start;
    start = res.x;
    ++res.evaluations;
    const double fe = f(extrapolated);
    if (std::isfinite(fe) && fe < f_start) {
      const double t = 2.0 * (f_start - 2.0 * res.f + fe) *
                           std::pow(f_start - res.f - biggest_drop, 2) -
                       biggest_drop * std::pow(f_start - fe, 2);
      if (t < 0.0 && net.norm() > 1e-14) {
        minimize_along(net);
        dirs.col(biggest) = dirs.col(n - 1);
        dirs.col(n - 1) = net;
      }
    }
  }
  return res;
}

}  // namespace inplay
