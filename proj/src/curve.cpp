#include "declab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "declab/errors.hpp"
#include "declab/fit.hpp"

namespace declab {

namespace {

// Step for differencing a supplied derivative. Second differences of phi at
// the FD step itself would lose ~12 digits to cancellation.
constexpr double kDifferenceStep = 0x1p-10;

}  // namespace

SmoothFunction::SmoothFunction(std::array<Fn, 4> derivatives, std::vector<double> singular)
    : d_(std::move(derivatives)), singular_(std::move(singular)) {
  if (!d_[0]) throw DomainError("SmoothFunction: value function is required");
  std::sort(singular_.begin(), singular_.end());
  singular_.erase(std::unique(singular_.begin(), singular_.end()), singular_.end());
}

SmoothFunction SmoothFunction::from_expression(const Expression& e, std::vector<double> singular) {
  std::array<Fn, 4> d;
  for (int k = 0; k < 4; ++k) d[k] = [e, k](double t) { return e.jet(t).derivative(k); };
  return SmoothFunction(std::move(d), std::move(singular));
}

double SmoothFunction::distance_to_singular_set(double t) const {
  double best = std::numeric_limits<double>::infinity();
  for (double z : singular_) best = std::min(best, std::abs(t - z));
  return best;
}

double SmoothFunction::derivative(int k, double t) const {
  if (k < 0 || k > 3) throw DomainError("SmoothFunction: derivative order must be 0..3");
  const double dist = distance_to_singular_set(t);
  if (d_[static_cast<std::size_t>(k)]) {
    if (dist == 0.0 && k > 0)
      throw SingularityError("derivative requested at a singular point t=" + std::to_string(t));
    return d_[static_cast<std::size_t>(k)](t);
  }
  if (dist < kExclusionBandSteps * kFiniteDifferenceStep)
    throw SingularityError("finite difference inside the exclusion band at t=" + std::to_string(t));
  return finite_difference(k, t);
}

double SmoothFunction::finite_difference(int k, double t) const {
  const double dist = distance_to_singular_set(t);
  // Highest supplied derivative below k.
  int base = k - 1;
  while (base > 0 && !d_[static_cast<std::size_t>(base)]) --base;
  const int gap = k - base;
  const auto f = [&](double x) { return derivative(base, x); };

  if (gap == 1) {
    const double h = std::min(kFiniteDifferenceStep, dist / 4.0);
    return (f(t + h) - f(t - h)) / (2.0 * h);
  }
  if (gap == 2) {
    double h = std::min(kDifferenceStep, dist / 4.0);
    const auto second = [&](double hh) { return (f(t + hh) - 2.0 * f(t) + f(t - hh)) / (hh * hh); };
    return (4.0 * second(h / 2.0) - second(h)) / 3.0;
  }
  // gap == 3: difference the (itself differenced) second derivative.
  double h = std::min(kDifferenceStep, dist / 4.0);
  const auto d2 = [&](double x) { return derivative(k - 1, x); };
  const auto central = [&](double hh) { return (d2(t + hh) - d2(t - hh)) / (2.0 * hh); };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

// ---------------------------------------------------------------------------

GraphCurve::GraphCurve(SmoothFunction phi, std::string id, std::optional<double> model_exponent)
    : phi_(std::move(phi)), id_(std::move(id)), nu_(model_exponent) {}

GraphCurve GraphCurve::model(double nu) {
  if (!(nu > 0.0)) throw DomainError("model curve requires nu > 0");
  std::array<SmoothFunction::Fn, 4> d{
      [nu](double t) { return std::pow(t, 1.0 + nu); },
      [nu](double t) { return (1.0 + nu) * std::pow(t, nu); },
      [nu](double t) { return nu * (1.0 + nu) * std::pow(t, nu - 1.0); },
      [nu](double t) {
        return nu == 1.0 ? 0.0 : (nu - 1.0) * nu * (1.0 + nu) * std::pow(t, nu - 2.0);
      }};
  return GraphCurve(SmoothFunction(std::move(d), {0.0}), "model", nu);
}

GraphCurve GraphCurve::from_expression(const std::string& expr, std::vector<double> singular) {
  return GraphCurve(SmoothFunction::from_expression(Expression::parse(expr), std::move(singular)),
                    "graph:" + expr);
}

ParamCurve::ParamCurve(SmoothFunction phi1, SmoothFunction phi2, std::string id)
    : phi1_(std::move(phi1)), phi2_(std::move(phi2)), id_(std::move(id)) {
  // Cell midpoints of a uniform grid: endpoint cusps such as (t^2, t^3) at 0
  // are allowed, as the curve is only used on (0, 1].
  constexpr int kSamples = 256;
  regularity_ = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    const double t = (i + 0.5) / kSamples;
    if (phi1_.distance_to_singular_set(t) < kExclusionBandSteps * kFiniteDifferenceStep) continue;
    regularity_ = std::min(regularity_, derivative(1, t).norm());
  }
  if (!(regularity_ > 0.0))
    throw HypothesisViolation("ParamCurve " + id_ + " is not regular: |(phi1', phi2')| = 0");
}

ParamCurve ParamCurve::lift(const GraphCurve& graph) {
  std::array<SmoothFunction::Fn, 4> identity{[](double t) { return t; }, [](double) { return 1.0; },
                                             [](double) { return 0.0; }, [](double) { return 0.0; }};
  return ParamCurve(SmoothFunction(std::move(identity), graph.singular_set()), graph.function(),
                    "lift:" + graph.id());
}

double second_derivative(const GraphCurve& curve, double t) { return curve.derivative(2, t); }

// ---------------------------------------------------------------------------

namespace {

VanishingOrderEstimate fit_order(const std::vector<double>& scales,
                                 const std::vector<double>& magnitudes, double z, Side side,
                                 int derivative_order, const OrderFitOptions& options) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(magnitudes[i] >= options.noise_floor) || !std::isfinite(magnitudes[i])) continue;
    xs.push_back(std::log(scales[i]));
    ys.push_back(std::log(magnitudes[i]));
  }
  if (xs.size() < 3)
    throw InsufficientDataError("order fit: only " + std::to_string(xs.size()) +
                                " usable scales (need 3)");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), Eigen::Index(xs.size()));
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), Eigen::Index(ys.size()));
  const LineFit fit = fit_line<double>(x, y);

  VanishingOrderEstimate est;
  est.order = fit.slope;
  est.derivative_order = derivative_order;
  est.side = side;
  est.base_point = z;
  est.fit_residual = fit.rms_residual;
  est.t_range = {std::exp(x.minCoeff()), std::exp(x.maxCoeff())};
  est.scales_used = static_cast<int>(xs.size());
  est.oscillation_suspected = fit.rms_residual > options.residual_threshold;
  return est;
}

void check_fit_options(const OrderFitOptions& options) {
  if (options.j_min < 0 || options.j_max < options.j_min)
    throw DomainError("order fit: need 0 <= j_min <= j_max");
}

}  // namespace

VanishingOrderEstimate estimate_vanishing_order(const GraphCurve& curve, double z, Side side,
                                                int derivative_order,
                                                const OrderFitOptions& options) {
  if (derivative_order != 2 && derivative_order != 3)
    throw DomainError("vanishing order: derivative order must be 2 or 3");
  check_fit_options(options);
  std::vector<double> scales, values;
  for (int j = options.j_min; j <= options.j_max; ++j) {
    const double h = std::ldexp(1.0, -j);
    const double t = side == Side::Right ? z + h : z - h;
    if (t <= 0.0 || t > 1.0) continue;
    double v = 0.0;
    try {
      v = std::abs(curve.derivative(derivative_order, t));
    } catch (const SingularityError&) {
      continue;
    }
    scales.push_back(h);
    values.push_back(v);
  }
  return fit_order(scales, values, z, side, derivative_order, options);
}

double holder_seminorm(const GraphCurve& curve, double alpha, double lo, double hi,
                       int grid_points) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder_seminorm: alpha must lie in (0,1]");
  if (!(hi > lo)) throw DomainError("holder_seminorm: empty interval");
  if (grid_points < 2) throw DomainError("holder_seminorm: need at least two grid points");
  const int n = grid_points;
  std::vector<double> x(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    f[i] = curve.derivative(2, x[i]);
  }
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::max(best, std::abs(f[i] - f[j]) / std::pow(x[j] - x[i], alpha));
  return best;
}

VanishingOrderEstimate estimate_holder_order(const GraphCurve& curve, double z, Side side,
                                             double alpha, const OrderFitOptions& options,
                                             int grid_points) {
  check_fit_options(options);
  std::vector<double> scales, values;
  for (int j = options.j_min; j <= options.j_max; ++j) {
    const double h = std::ldexp(1.0, -j);
    const double lo = side == Side::Right ? z + h : z - 2.0 * h;
    const double hi = side == Side::Right ? z + 2.0 * h : z - h;
    if (lo <= 0.0 || hi > 1.0) continue;
    double v = 0.0;
    try {
      v = holder_seminorm(curve, alpha, lo, hi, grid_points);
    } catch (const SingularityError&) {
      continue;
    }
    scales.push_back(h);
    values.push_back(v);
  }
  VanishingOrderEstimate est = fit_order(scales, values, z, side, 2, options);
  est.holder_exponent = alpha;
  return est;
}

double wronskian(const ParamCurve& curve, double t) {
  const Vec2 d1 = curve.derivative(1, t);
  const Vec2 d2 = curve.derivative(2, t);
  return d1.x() * d2.y() - d1.y() * d2.x();
}

GraphCurve reparametrize_to_graph(const ParamCurve& curve, double lo, double hi,
                                  std::vector<double> singular_t) {
  if (!(hi > lo)) throw DomainError("reparametrize_to_graph: empty interval");
  constexpr int kCheck = 257;
  double sign = 0.0;
  for (int i = 0; i < kCheck; ++i) {
    const double t = lo + (hi - lo) * i / (kCheck - 1.0);
    const double d = curve.phi1().derivative(1, t);
    if (d == 0.0 || (sign != 0.0 && (d > 0.0) != (sign > 0.0)))
      throw NotAGraphError("phi1' vanishes or changes sign on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]; subdivide the interval");
    sign = d > 0.0 ? 1.0 : -1.0;
  }

  // t = phi1^{-1}(s) by Newton steps safeguarded with a bisection bracket.
  auto inverse = [curve, lo, hi, sign](double s) {
    double a = lo, b = hi;
    double t = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
      const double g = curve.phi1()(t) - s;
      if (g == 0.0) return t;
      if ((g > 0.0) == (sign > 0.0))
        b = t;
      else
        a = t;
      const double step = g / curve.phi1().derivative(1, t);
      double next = t - step;
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
      t = next;
    }
    return t;
  };

  auto psi_derivs = [curve, inverse](int k, double s) {
    const double t = inverse(s);
    const double p1 = curve.phi1().derivative(1, t);
    switch (k) {
      case 0: return curve.phi2()(t);
      case 1: return curve.phi2().derivative(1, t) / p1;
      case 2: return wronskian(curve, t) / (p1 * p1 * p1);
      default: {
        const Vec2 d1 = curve.derivative(1, t);
        const Vec2 d2 = curve.derivative(2, t);
        const Vec2 d3 = curve.derivative(3, t);
        const double w = d1.x() * d2.y() - d1.y() * d2.x();
        const double dw = d1.x() * d3.y() - d1.y() * d3.x();
        // d/ds (W / p1^3) = (W' p1 - 3 W p1'') / p1^5
        return (dw * p1 - 3.0 * w * d2.x()) / std::pow(p1, 5);
      }
    }
  };
  std::array<SmoothFunction::Fn, 4> d;
  for (int k = 0; k < 4; ++k) d[k] = [psi_derivs, k](double s) { return psi_derivs(k, s); };

  std::vector<double> singular_s;
  for (double z : singular_t) singular_s.push_back(curve.phi1()(z));
  GraphCurve graph(SmoothFunction(std::move(d), std::move(singular_s)), "graph-of:" + curve.id());

  for (int i = 0; i < kCheck; ++i) {
    const double t = lo + (hi - lo) * i / (kCheck - 1.0);
    const double err = std::abs(graph.phi(curve.phi1()(t)) - curve.phi2()(t));
    if (err > 1e-10)
      throw HypothesisViolation("reparametrize_to_graph: verification error " + std::to_string(err));
  }
  return graph;
}

// ---------------------------------------------------------------------------

CurveAnalysis analyze_curve(const GraphCurve& curve, double alpha, const OrderFitOptions& options) {
  constexpr double kHypothesisSlack = 0.05;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  CurveAnalysis out;
  for (double z : curve.singular_set()) {
    for (Side side : {Side::Right, Side::Left}) {
      if (side == Side::Right && z >= 1.0) continue;
      if (side == Side::Left && z <= 0.0) continue;
      CurveAnalysis::PointReport rep;
      rep.z = z;
      rep.side = side;
      rep.r2 = estimate_vanishing_order(curve, z, side, 2, options);
      try {
        rep.r3 = estimate_vanishing_order(curve, z, side, 3, options);
      } catch (const InsufficientDataError&) {
        // phi''' below the noise floor at every scale.
        VanishingOrderEstimate flat;
        flat.order = kInf;
        flat.derivative_order = 3;
        flat.side = side;
        flat.base_point = z;
        rep.r3 = flat;
      }
      rep.hypothesis_order = rep.r2.order > -1.0 && !rep.r2.oscillation_suspected;
      rep.hypothesis_holder = true;
      for (double beta : {alpha, alpha / 2.0, alpha / 4.0}) {
        std::optional<double> fitted;
        try {
          fitted = estimate_holder_order(curve, z, side, beta, options).order;
        } catch (const InsufficientDataError&) {
          fitted = kInf;  // seminorm vanishes below the floor at every scale
        }
        rep.holder_orders.emplace_back(beta, fitted);
        if (*fitted < rep.r2.order - beta - kHypothesisSlack) rep.hypothesis_holder = false;
      }
      out.r = std::max(out.r, rep.r2.order + 2.0);
      out.points.push_back(std::move(rep));
    }
  }
  return out;
}

}  // namespace declab
