#include "inplay/intensity_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace inplay {

namespace {

double poisson_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& exposure) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (exposure[i] <= 0.0) continue;
    const double mu = exposure[i] * std::exp(eta[i]);
    ll += (y[i] > 0.0 ? y[i] * std::log(mu) - std::lgamma(y[i] + 1.0) : 0.0) - mu;
  }
  return ll;
}

}  // namespace

PoissonGlmFit fit_poisson_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& exposure) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n || exposure.size() != n || p == 0)
    throw Error(ErrorCode::InvalidArgument, "GLM dimensions disagree");
  if (n == 0) throw Error(ErrorCode::FitFailure, "GLM has no observations");

  PoissonGlmFit out;
  out.dropped.assign(static_cast<std::size_t>(p), false);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool constant = j > 0 && (x.col(j).array() == x(0, j)).all();
    out.dropped[static_cast<std::size_t>(j)] = constant;
    if (!constant) keep.push_back(j);
  }
  const Eigen::Index q = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd z(n, q);
  for (Eigen::Index j = 0; j < q; ++j) z.col(j) = x.col(keep[static_cast<std::size_t>(j)]);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  const double total_y = y.sum();
  const double total_e = exposure.sum();
  if (total_y > 0.0 && total_e > 0.0) b[0] = std::log(total_y / total_e);
  double ll = poisson_loglik(z * b, y, exposure);
  Eigen::MatrixXd info(q, q);

  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd mu = exposure.array() * (z * b).array().exp();
    const Eigen::VectorXd grad = z.transpose() * (y - mu);
    info.noalias() = z.transpose() * mu.asDiagonal() * z;
    info.diagonal().array() += 1e-10;
    Eigen::VectorXd step = info.ldlt().solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      const Eigen::VectorXd cand = b + t * step;
      const double ll_c = poisson_loglik(z * cand, y, exposure);
      if (std::isfinite(ll_c) && ll_c >= ll - 1e-12) {
        b = cand;
        ll = ll_c;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved || (t * step).cwiseAbs().maxCoeff() < 1e-10) break;
  }
  const Eigen::VectorXd mu = exposure.array() * (z * b).array().exp();
  info.noalias() = z.transpose() * mu.asDiagonal() * z;
  Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(q, q));

  out.coef = Eigen::VectorXd::Zero(p);
  out.se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < q; ++j) {
    out.coef[keep[static_cast<std::size_t>(j)]] = b[j];
    out.se[keep[static_cast<std::size_t>(j)]] = std::sqrt(std::max(0.0, cov(j, j)));
  }
  out.loglik = ll;
  return out;
}

double IntensityFit::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return coef[static_cast<Eigen::Index>(i)];
  throw Error(ErrorCode::InvalidArgument, "no coefficient named '" + name + "'");
}

IntensityFit fit_intensity(const IntensityData& data) {
  const int k = static_cast<int>(data.teams.size());
  if (k < 2) throw Error(ErrorCode::FitFailure, "at least two teams are required");
  const int p = static_cast<int>(data.names.size());
  const Eigen::Index n = static_cast<Eigen::Index>(data.rows.size());
  const int cols = 1 + 2 * (k - 1) + p;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, cols);
  Eigen::VectorXd y(n);
  Eigen::VectorXd e(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = data.rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(r.x.size()) != p)
      throw Error(ErrorCode::InvalidArgument, "regressor count mismatch");
    x(i, 0) = 1.0;
    // Sum-to-zero coding: the last team is minus the sum of the others.
    if (r.attack < k - 1) x(i, 1 + r.attack) = 1.0;
    else x.row(i).segment(1, k - 1).setConstant(-1.0);
    if (r.defence < k - 1) x(i, k + r.defence) = 1.0;
    else x.row(i).segment(k, k - 1).setConstant(-1.0);
    for (int j = 0; j < p; ++j) x(i, 2 * k - 1 + j) = r.x[static_cast<std::size_t>(j)];
    y[i] = r.events;
    e[i] = r.exposure;
  }
  const PoissonGlmFit glm = fit_poisson_glm(x, y, e);
  IntensityFit out;
  out.intercept = glm.coef[0];
  const auto a = glm.coef.segment(1, k - 1);
  const auto d = glm.coef.segment(k, k - 1);
  for (int t = 0; t < k; ++t) {
    const TeamId& team = data.teams[static_cast<std::size_t>(t)];
    out.attack[team] = t < k - 1 ? a[t] : -a.sum();
    out.defence[team] = t < k - 1 ? d[t] : -d.sum();
  }
  out.names = data.names;
  out.coef = glm.coef.tail(p);
  out.coef_se = glm.se.tail(p);
  out.dropped.assign(glm.dropped.end() - p, glm.dropped.end());
  out.loglik = glm.loglik;
  return out;
}

std::vector<ExposurePiece> exposure_pieces(const MatchTimeline& timeline,
                                           const CovariatePath& path) {
  std::vector<double> cuts{0.0, timeline.first_half_end, timeline.full_time};
  for (const auto& e : timeline.events) cuts.push_back(e.minute);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<ExposurePiece> out;
  int goals[2] = {0, 0};
  int reds[2] = {0, 0};
  std::size_t next = 0;
  const auto& ev = timeline.events;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c];
    const double hi = cuts[c + 1];
    if (hi > timeline.full_time) break;
    // Apply events at lo (already counted in the previous piece's end).
    while (next < ev.size() && ev[next].minute <= lo) {
      const int s = index(timeline.side_of(ev[next].team));
      if (ev[next].kind == EventKind::Goal) ++goals[s];
      if (ev[next].kind == EventKind::RedCard) ++reds[s];
      ++next;
    }
    int scored[2] = {0, 0};
    for (std::size_t j = next; j < ev.size() && ev[j].minute <= hi; ++j)
      if (ev[j].kind == EventKind::Goal && ev[j].minute == hi)
        ++scored[index(timeline.side_of(ev[j].team))];
    for (Side side : {Side::Home, Side::Away}) {
      const int s = index(side);
      const int o = 1 - s;
      ExposurePiece p;
      p.side = side;
      p.start = lo;
      p.end = hi;
      p.half = timeline.half_at(lo);
      p.own_goals = goals[s];
      p.opp_goals = goals[o];
      p.own_reds = reds[s];
      p.opp_reds = reds[o];
      p.dev = path.at(lo, side).dev;
      p.goals_at_end = scored[s];
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace inplay
