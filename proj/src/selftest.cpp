#include "declab/selftest.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "declab/curve.hpp"
#include "declab/decoupling.hpp"
#include "declab/errors.hpp"
#include "declab/expsum.hpp"
#include "declab/norms.hpp"
#include "declab/oscillatory.hpp"
#include "declab/partition.hpp"
#include "declab/rescale.hpp"

namespace declab {

namespace {

class Suite {
 public:
  /// |value - expected| <= tol.
  void near(const std::string& name, double expected, double tol, const std::function<double()>& f) {
    SelfCheck c{name, false, 0.0, expected, {}};
    try {
      c.value = f();
      c.passed = std::abs(c.value - expected) <= tol;
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    checks_.push_back(std::move(c));
  }

  /// value <= bound.
  void at_most(const std::string& name, double bound, const std::function<double()>& f) {
    SelfCheck c{name, false, 0.0, bound, {}};
    try {
      c.value = f();
      c.passed = c.value <= bound;
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    checks_.push_back(std::move(c));
  }

  void holds(const std::string& name, const std::function<bool()>& f) {
    SelfCheck c{name, false, 0.0, 1.0, {}};
    try {
      c.passed = f();
      c.value = c.passed ? 1.0 : 0.0;
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    checks_.push_back(std::move(c));
  }

  std::vector<SelfCheck> take() { return std::move(checks_); }

 private:
  std::vector<SelfCheck> checks_;
};

SmoothFunction fn(const char* expr) { return SmoothFunction::from_expression(Expression::parse(expr)); }

}  // namespace

std::vector<SelfCheck> run_selftest() {
  Suite s;
  const GraphCurve parabola = GraphCurve::from_expression("t^2");
  const GraphCurve cubic = GraphCurve::model(2.0);

  // Curves
  s.near("second derivative of t^2 at 0.3", 2.0, 1e-9, [&] { return second_derivative(parabola, 0.3); });
  s.near("second derivative of t^3 at 0.5", 3.0, 1e-9, [&] { return second_derivative(cubic, 0.5); });
  s.near("vanishing order of t^3 at 0", 1.0, 0.05,
         [&] { return estimate_vanishing_order(cubic, 0.0, Side::Right, 2).order; });
  s.near("vanishing order of t^1.5 at 0", -0.5, 0.05,
         [&] { return estimate_vanishing_order(GraphCurve::model(0.5), 0.0, Side::Right, 2).order; });
  s.near("Hoelder seminorm of a constant second derivative", 0.0, 1e-9,
         [&] { return holder_seminorm(parabola, 1.0, 0.2, 0.4); });
  s.near("Hoelder seminorm of phi'' = t on [1, 2]", 1.0, 1e-6,
         [&] { return holder_seminorm(GraphCurve::from_expression("t^3/6"), 1.0, 1.0, 2.0); });
  s.near("Wronskian of the circle", 1.0, 1e-9,
         [&] { return wronskian(ParamCurve(fn("cos(t)"), fn("sin(t)"), "circle"), 0.7); });
  s.near("Wronskian of a graph is phi''", 2.0, 1e-9, [&] { return wronskian(ParamCurve::lift(parabola), 0.3); });
  s.near("Wronskian of (t^2, t^3) at 1", 6.0, 1e-9,
         [&] { return wronskian(ParamCurve(fn("t^2"), fn("t^3"), "cusp"), 1.0); });
  s.near("reparametrized graph is unchanged", 0.125, 1e-9, [&] {
    return reparametrize_to_graph(ParamCurve::lift(GraphCurve::from_expression("t^3")), 0.1, 0.9).phi(0.5);
  });
  s.near("model nu = 2 has r = 3", 3.0, 1e-12, [&] { return curve_exponent_r(cubic); });

  // Partitions
  s.holds("[0,1] at width 1/4 has 4 cells",
          [] { return uniform_partition(Interval(0.0, 1.0), 0.25).cells.size() == 4; });
  s.holds("[1/2,1] at width 1/4 has 2 cells", [] {
    const Partition p = uniform_partition(Interval(0.5, 1.0), 0.25);
    return p.cells.size() == 2 && p.cells[0].lo == 0.5 && p.cells[1].lo == 0.75 && p.cells[1].hi == 1.0;
  });
  s.near("[0,1] at width 0.3: last cell has length 0.1", 0.1, 1e-12, [] {
    const Partition p = uniform_partition(Interval(0.0, 1.0), 0.3);
    return p.cells.size() == 4 ? p.cells.back().length() : -1.0;
  });
  s.holds("dyadic blocks at delta 2^-8, eps 1/8", [] {
    const DyadicBlocks d = dyadic_blocks(0x1p-8, 0.125);
    return d.count() == 3 && d.head.hi == 0.125 && d.blocks[2].hi == 1.0;
  });
  s.holds("dyadic blocks at delta 1/4, eps 1/4", [] {
    const DyadicBlocks d = dyadic_blocks(0.25, 0.25);
    return d.count() == 1 && std::abs(d.head.hi - std::sqrt(0.5)) < 1e-15;
  });
  s.holds("no dyadic blocks below the head", [] {
    return dyadic_blocks(0x1p-8, 0.125, std::pow(0x1p-8, 0.375)).count() == 0;
  });
  s.holds("neighborhood membership", [&] {
    const double d = 1e-3;
    return neighborhood_contains(parabola, d, Vec2(0.4, 0.16)) &&
           !neighborhood_contains(parabola, d, Vec2(0.4, 0.16 + 3 * d)) &&
           neighborhood_contains(parabola, d, Vec2(0.4, 0.16 + 2 * d));
  });

  // Rescaling
  s.near("phi''_a of t^2", 2.0, 1e-9, [&] { return min_second_derivative(parabola, 0.2); });
  s.near("phi''_a of t^3 at a = 1/4", 1.5, 1e-9, [&] { return min_second_derivative(cubic, 0.25); });
  s.near("normalized parabola is unchanged", 1.0, 1e-9, [&] { return normalize(parabola, 0.3).scale; });
  s.near("normalized model nu = 1 is unchanged", 1.0, 1e-12,
         [&] { return normalize(GraphCurve::model(1.0), 0.3).scale; });
  s.near("Taylor gap of a parabola", 0.0, 1e-12, [&] { return taylor_gap(normalize(parabola, 0.3), 0.35, 0.2); });
  s.near("Taylor gap at dt = 0", 0.0, 1e-15, [&] { return taylor_gap(normalize(cubic, 0.3), 0.35, 0.0); });
  s.near("Delta t_max of a parabola", 0.25, 1e-12, [&] { return delta_t_max(normalize(parabola, 0.3), 0.35, 1e-6); });
  s.holds("Delta t_max bound for a parabola", [&] {
    return verify_tmax_bound(normalize(parabola, 0.25), 0.25, 0x1p-10, 0.125, 0.125).passed;
  });
  s.near("schedule at delta = a^2", 0.0, 0.0, [] { return iteration_schedule(1.0 / 64, 0.5, 1.0, 0.125).k; });
  s.near("schedule with one halving", 1.0, 0.0,
         [] { return iteration_schedule(std::pow(0.125, 4.0), 1.0, 1.0, 0.125).k; });
  s.near("schedule at delta 2^-16, a 1/4", 14.0, 0.0, [] { return iteration_schedule(0x1p-16, 0.4, 0.5, 0.25).k; });

  // Oscillatory integrals and exponential sums
  const TestFunction one = TestFunction::constant();
  s.near("E g at the origin", 0.0, 1e-12,
         [&] { return std::abs(extension_eval(cubic, Interval(0.0, 1.0), one, Vec2(0, 0)) - Complex(1.0)); });
  s.near("E g along the x1 axis", 0.0, 1e-10, [&] {
    const Complex exact = (unit_phase(2.5) - 1.0) / Complex(0.0, 2.0 * std::numbers::pi * 2.5);
    return std::abs(extension_eval(cubic, Interval(0.0, 1.0), one, Vec2(2.5, 0.0)) - exact);
  });
  s.near("exponential sum at the origin", 0.0, 1e-12, [&] {
    const PointSystem ps = PointSystem::lattice(5, Complex(0.5, -1.0));
    return std::abs(expsum_eval(ParamCurve::lift(cubic), ps.t, ps.a, Vec2(0, 0)) - Complex(2.5, -5.0));
  });
  s.near("single term is unimodular", 1.0, 1e-12, [&] {
    const PointSystem ps = PointSystem::lattice(1);
    return std::abs(expsum_eval(ParamCurve::lift(cubic), ps.t, ps.a, Vec2(3.7, -8.1)));
  });

  // Weights
  s.near("omega_B(0)", 1.0, 0.0, [] { return weight_eval(WeightRectangle::ball(1.0), Vec2(0, 0)); });
  s.near("omega_R at the edge of a 4 x 2 rectangle", 0x1p-200, 1e-70,
         [] { return weight_eval(WeightRectangle::generic(Vec2(10, 0), 4, 2), Vec2(14, 0)); });

  // Decoupling
  s.near("single-cell ratio", 1.0, 1e-6, [&] {
    return decoupling_ratio(parabola, TestFunction::constant(1.0, Interval(0.25, 0.5)), 1.0 / 16, 6.0).ratio;
  });
  s.at_most("trivial bound at delta 1/16", 2.0 * (1 + 1e-6),
            [&] { return decoupling_ratio(cubic, one, 1.0 / 16, 4.0).ratio; });
  s.near("single_cell search gives 1", 1.0, 1e-6, [&] {
    SearchOptions o;
    o.strategies = {Strategy::SingleCell};
    return estimate_constant(parabola, 1.0 / 16, 6.0, o).K_hat;
  });
  s.at_most("two cells give at most sqrt 2", std::sqrt(2.0) * (1 + 1e-6), [&] {
    SearchOptions o;
    o.budget = 200;
    return estimate_constant(cubic, 0.25, 6.0, o).K_hat;
  });
  s.near("fitted slope of a trivial power law", 0.25, 1e-12, [] {
    std::vector<double> d{0x1p-4, 0x1p-6, 0x1p-8, 0x1p-10}, K;
    for (double x : d) K.push_back(std::pow(x, -0.25));
    return fit_exponent(d, K).slope;
  });
  s.near("fitted slope of a constant", 0.0, 1e-12,
         [] { return fit_exponent({0x1p-4, 0x1p-6, 0x1p-8, 0x1p-10}, {3.0, 3.0, 3.0, 3.0}).slope; });

  // Counting and averages
  s.near("one-term l6 ratio", 1.0, 1e-12,
         [&] { return l6_average(parabola, PointSystem::lattice(1, Complex(0.0, 2.0)), 4.0).ratio; });
  s.near("J(1)", 1.0, 0.0, [] { return static_cast<double>(vinogradov_count(1)); });
  s.near("torus integral at N = 1", 1.0, 1e-14, [] { return torus_l6_integral(1); });
  s.near("bridge at the origin", 0.0, 1e-12, [&] {
    return mollified_bridge(parabola, PointSystem::lattice(4), 0.05, {Vec2(0, 0)}).max_deviation;
  });
  return s.take();
}

}  // namespace declab
