#include "declab/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "declab/errors.hpp"
#include "declab/parallel.hpp"

namespace declab {

GraphCurve NormalizedCurve::as_graph() const {
  const GraphCurve p = parent;
  const double c = scale;
  std::array<SmoothFunction::Fn, 4> d;
  for (int k = 0; k < 4; ++k) d[k] = [p, c, k](double t) { return c * p.derivative(k, t); };
  return GraphCurve(SmoothFunction(std::move(d), p.singular_set()), "normalized:" + p.id());
}

double min_second_derivative(const GraphCurve& curve, double a, int grid_points) {
  if (!(a > 0.0 && 2.0 * a <= 1.0 + 1e-12))
    throw DomainError("min_second_derivative: need [a, 2a] inside (0, 1]");
  if (grid_points < 3) throw DomainError("min_second_derivative: grid too small");
  const double lo = a, hi = 2.0 * a;
  const auto f = [&](double t) { return curve.derivative(2, t); };
  std::size_t best = 0;
  double best_value = f(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double v = f(lo + (hi - lo) * i / (grid_points - 1.0));
    if (v < best_value) {
      best_value = v;
      best = static_cast<std::size_t>(i);
    }
  }
  // Golden-section refinement on the neighbouring grid cells.
  const double step = (hi - lo) / (grid_points - 1.0);
  double x0 = std::max(lo, lo + step * (static_cast<double>(best) - 1.0));
  double x3 = std::min(hi, lo + step * (static_cast<double>(best) + 1.0));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = x3 - ratio * (x3 - x0), x2 = x0 + ratio * (x3 - x0);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 100 && x3 - x0 > 1e-14 * hi; ++it) {
    if (f1 < f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x3 - ratio * (x3 - x0);
      f1 = f(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + ratio * (x3 - x0);
      f2 = f(x2);
    }
  }
  const double refined = std::min({best_value, f1, f2});
  if (!(refined > 0.0))
    throw HypothesisViolation("phi'' is not positive on [" + std::to_string(a) + ", " +
                              std::to_string(2.0 * a) + "]");
  return refined;
}

NormalizedCurve normalize(const GraphCurve& curve, double a, Normalization kind) {
  NormalizedCurve nc;
  nc.parent = curve;
  nc.a = a;
  nc.phi2_min = min_second_derivative(curve, a);
  if (kind == Normalization::Automatic)
    kind = curve.model_exponent() ? Normalization::Model : Normalization::Curvature;
  nc.kind = kind;
  if (kind == Normalization::Model) {
    if (!curve.model_exponent()) throw DomainError("model normalization needs a model curve");
    nc.scale = std::pow(a, 1.0 - *curve.model_exponent());
  } else {
    nc.scale = 2.0 / nc.phi2_min;
  }
  return nc;
}

OsculatingParabola osculating_parabola(const NormalizedCurve& nc, double t0) {
  if (t0 < nc.a * (1.0 - 1e-12) || t0 > 2.0 * nc.a * (1.0 + 1e-12))
    throw DomainError("osculating_parabola: t0 must lie in [a, 2a]");
  OsculatingParabola rho;
  rho.t0 = t0;
  rho.c0 = nc.height(t0);
  rho.c1 = nc.height_derivative(1, t0);
  rho.c2 = 0.5 * nc.height_derivative(2, t0);
  return rho;
}

double taylor_gap(const NormalizedCurve& nc, double t0, double dt) {
  if (dt == 0.0) return 0.0;
  const OsculatingParabola rho = osculating_parabola(nc, t0);
  return std::abs(nc.height(t0 + dt) - rho(t0 + dt));
}

double delta_t_max(const NormalizedCurve& nc, double t0, double delta) {
  if (!(delta > 0.0)) throw DomainError("delta_t_max: delta must be positive");
  const double length = 2.0 * nc.a - t0;
  if (length <= 0.0) return 0.0;
  const OsculatingParabola rho = osculating_parabola(nc, t0);
  const auto gap = [&](double s) { return std::abs(nc.height(t0 + s) - rho(t0 + s)); };

  constexpr int kScan = 1024;
  double below = 0.0;
  double above = -1.0;
  for (int i = 1; i <= kScan; ++i) {
    const double s = length * i / kScan;
    if (gap(s) >= delta) {
      above = s;
      break;
    }
    below = s;
  }
  if (above < 0.0) return length;
  for (int it = 0; it < 200 && above - below > 1e-8 * above; ++it) {
    const double mid = 0.5 * (below + above);
    if (gap(mid) >= delta)
      above = mid;
    else
      below = mid;
  }
  return below;
}

TmaxCheck tmax_margin(const NormalizedCurve& nc, double t0, double delta, double epsilon,
                      double beta) {
  TmaxCheck c;
  c.precondition_met = nc.a >= std::pow(delta, 0.5 - epsilon) * (1.0 - 1e-12);
  c.tmax = delta_t_max(nc, t0, delta);
  c.bound = std::pow(delta, 0.5 - epsilon * beta / 4.0);
  c.margin = c.tmax / c.bound;
  c.reached_block_end = c.tmax >= 2.0 * nc.a - t0;
  c.passed = c.margin > 0.0 && std::isfinite(c.margin);
  return c;
}

TmaxCheck verify_tmax_bound(const NormalizedCurve& nc, double t0, double delta, double epsilon,
                            double beta) {
  TmaxCheck c = tmax_margin(nc, t0, delta, epsilon, beta);
  if (!c.precondition_met)
    throw DomainError("verify_tmax_bound: requires a >= delta^(1/2 - epsilon)");
  return c;
}

IterationSchedule iteration_schedule(double delta, double epsilon, double beta, double a) {
  const double x = epsilon * beta / 2.0;
  if (!(x > 0.0 && x < 1.0)) throw DomainError("iteration_schedule: need 0 < eps beta / 2 < 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("iteration_schedule: delta in (0,1)");
  IterationSchedule out;
  const double log_inv = std::log(1.0 / delta);
  const double half = 0.5 * log_inv;
  out.log_log_bound = half > 1.0 ? std::log(half) / -std::log1p(-x) : 0.0;
  const double target = std::min(a * a, std::exp(-1.0));
  if (delta >= target) {
    out.k = 0;
    return out;
  }
  // (1 - x)^k log(1/delta) <= log(1/target)
  const double ratio = std::log(1.0 / target) / log_inv;
  int k = static_cast<int>(std::ceil(std::log(ratio) / std::log1p(-x) - 1e-12));
  k = std::max(k, 0);
  while (k > 0 && std::pow(1.0 - x, k - 1) * log_inv <= std::log(1.0 / target) * (1.0 + 1e-14)) --k;
  while (std::pow(1.0 - x, k) * log_inv > std::log(1.0 / target) * (1.0 + 1e-14)) ++k;
  out.k = k;
  out.within_bound = k <= out.log_log_bound + 1e-12;
  return out;
}

bool neighborhood_contains(const NormalizedCurve& nc, double delta, const Vec2& point) {
  return std::abs(point.y() - nc.height(point.x())) <= 2.0 * delta;
}

std::vector<RescaleRow> rescale_scan(const std::vector<double>& nus,
                                     const std::vector<double>& deltas, double epsilon,
                                     double alpha, double a_exponent,
                                     std::optional<double> beta_override) {
  std::vector<RescaleRow> rows(nus.size() * deltas.size());
  const double beta = beta_override ? *beta_override : default_beta(alpha, epsilon);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const double nu = nus[idx / deltas.size()];
    const double delta = deltas[idx % deltas.size()];
    const double a = std::pow(delta, a_exponent);
    const NormalizedCurve nc = normalize(GraphCurve::model(nu), a, Normalization::Curvature);
    const TmaxCheck check = tmax_margin(nc, a, delta, epsilon, beta);
    rows[idx] = RescaleRow{nu,          a,           delta,        epsilon,
                           beta,        check.tmax,  check.bound,  check.margin,
                           check.precondition_met, check.passed};
    const IterationSchedule schedule = iteration_schedule(delta, epsilon, beta, a);
    rows[idx].iterations = schedule.k;
    rows[idx].schedule_within = schedule.within_bound;
  });
  return rows;
}

}  // namespace declab
