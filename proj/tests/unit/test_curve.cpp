#include <doctest.h>

#include <cmath>

#include "declab/curve.hpp"
#include "declab/errors.hpp"

using namespace declab;

namespace {

GraphCurve values_only(SmoothFunction::Fn f, std::vector<double> z = {}) {
  return GraphCurve(SmoothFunction({std::move(f), {}, {}, {}}, std::move(z)), "values-only");
}

ParamCurve param(const char* e1, const char* e2) {
  return ParamCurve(SmoothFunction::from_expression(Expression::parse(e1)),
                    SmoothFunction::from_expression(Expression::parse(e2)), "param");
}

}  // namespace

TEST_SUITE("curve") {
  TEST_CASE("second derivative on analytic and finite-difference paths") {
    CHECK(second_derivative(GraphCurve::from_expression("t^2"), 0.3) == doctest::Approx(2.0));
    CHECK(second_derivative(GraphCurve::model(2.0), 0.5) == doctest::Approx(3.0));
    const GraphCurve fd = values_only([](double t) { return std::sin(t) + t * t; });
    CHECK(std::abs(second_derivative(fd, 0.25) - (2.0 - std::sin(0.25))) < 1e-6);
    CHECK(std::abs(fd.derivative(1, 0.25) - (std::cos(0.25) + 0.5)) < 1e-8);
  }

  TEST_CASE("model curve is exact") {
    const GraphCurve m = GraphCurve::model(0.5);
    CHECK(m.phi(0.36) == doctest::Approx(std::pow(0.36, 1.5)).epsilon(1e-15));
    CHECK(m.derivative(2, 0.36) == doctest::Approx(0.75 * std::pow(0.36, -0.5)).epsilon(1e-15));
    REQUIRE(m.singular_set().size() == 1);
    CHECK(m.singular_set()[0] == 0.0);
  }

  TEST_CASE("singular exclusion band") {
    const GraphCurve fd = values_only([](double t) { return t * t * t; }, {0.5});
    CHECK_THROWS_AS(second_derivative(fd, 0.5), SingularityError);
    CHECK_THROWS_AS(second_derivative(fd, 0.5 + 2 * kFiniteDifferenceStep), SingularityError);
    CHECK_NOTHROW(second_derivative(fd, 0.5 + 8 * kFiniteDifferenceStep));
    CHECK_THROWS_AS(GraphCurve::model(2.0).derivative(2, 0.0), SingularityError);
  }

  TEST_CASE("vanishing orders") {
    const auto r = [](const GraphCurve& c) {
      return estimate_vanishing_order(c, 0.0, Side::Right, 2).order;
    };
    CHECK(r(GraphCurve::model(2.0)) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(r(GraphCurve::model(0.5)) + 0.5) < 0.05);
    // phi'' = 12 t^2 + 20 t^3
    const auto est = estimate_vanishing_order(GraphCurve::from_expression("t^4 + t^5", {0.0}), 0.0,
                                              Side::Right, 2);
    CHECK(std::abs(est.order - 2.0) < 0.05);
    CHECK(est.fit_residual >= 0.0);
    CHECK_FALSE(est.oscillation_suspected);
    // phi''' = 24 t for t^4
    CHECK(std::abs(estimate_vanishing_order(GraphCurve::from_expression("t^4", {0.0}), 0.0,
                                            Side::Right, 3)
                       .order -
                   1.0) < 0.05);
    for (double nu : {0.5, 1.0, 2.0, 3.0})
      CHECK(std::abs(r(GraphCurve::model(nu)) - (nu - 1.0)) < 0.05);
  }

  TEST_CASE("vanishing order needs clean scales") {
    // phi'' = 1e-12 t: below the noise floor everywhere.
    const GraphCurve tiny = GraphCurve::from_expression("1e-12 * t^3 / 6", {0.0});
    CHECK_THROWS_AS(estimate_vanishing_order(tiny, 0.0, Side::Right, 2), InsufficientDataError);
  }

  TEST_CASE("oscillatory vanishing is flagged") {
    // phi'' behaves like t^2 (2 + sin(log t)) up to lower order: sup and inf
    // orders agree but the log-log curve wiggles; use a cruder oscillation.
    const GraphCurve wiggly = GraphCurve(
        SmoothFunction({[](double t) { return t; }, [](double) { return 1.0; },
                        [](double t) { return t * t * (1.0 + 0.95 * std::sin(8.0 * std::log(t))); },
                        {}},
                       {0.0}),
        "wiggly");
    const auto est = estimate_vanishing_order(wiggly, 0.0, Side::Right, 2);
    CHECK(est.oscillation_suspected);
  }

  TEST_CASE("hoelder seminorm") {
    CHECK(holder_seminorm(GraphCurve::from_expression("t^2"), 1.0, 0.25, 0.5) == 0.0);
    CHECK(holder_seminorm(GraphCurve::from_expression("t^3/6"), 1.0, 1.0, 2.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(holder_seminorm(GraphCurve::from_expression("t^4"), 1.0, 0.25, 0.5) ==
          doctest::Approx(12.0).epsilon(0.01));
    CHECK_THROWS_AS(holder_seminorm(GraphCurve::model(2.0), 0.0, 0.25, 0.5), DomainError);
    CHECK_THROWS_AS(holder_seminorm(GraphCurve::model(2.0), 1.5, 0.25, 0.5), DomainError);
    const GraphCurve c = GraphCurve::from_expression("sin(5*t) + t^2");
    const double coarse = holder_seminorm(c, 0.5, 0.25, 0.5, 65);
    const double fine = holder_seminorm(c, 0.5, 0.25, 0.5, 129);
    CHECK(fine >= coarse);
  }

  TEST_CASE("wronskian") {
    const ParamCurve circle = param("cos(t)", "sin(t)");
    for (double t : {0.1, 0.4, 0.9}) CHECK(wronskian(circle, t) == doctest::Approx(1.0));
    CHECK(wronskian(param("t^2", "t^3"), 1.0) == doctest::Approx(6.0));
    const GraphCurve g = GraphCurve::from_expression("sin(t) + t^2");
    const ParamCurve lifted = ParamCurve::lift(g);
    for (double t : {0.1, 0.3, 0.77}) CHECK(std::abs(wronskian(lifted, t) - second_derivative(g, t)) < 1e-9);
  }

  TEST_CASE("regularity witness") {
    CHECK(param("cos(t)", "sin(t)").regularity_witness() > 0.9);
    CHECK_THROWS_AS(param("1", "2"), HypothesisViolation);
  }

  TEST_CASE("reparametrization to graph form") {
    const GraphCurve parabola = reparametrize_to_graph(param("2*t", "4*t^2"), 0.0, 0.5);
    for (double s : {0.2, 0.5, 0.9}) {
      CHECK(parabola.phi(s) == doctest::Approx(s * s).epsilon(1e-10));
      CHECK(std::abs(second_derivative(parabola, s) - 2.0) < 1e-6);
    }
    // The square denominator W / phi1'^2 misses a factor phi1' = 2.
    const ParamCurve p = param("2*t", "4*t^2");
    CHECK(wronskian(p, 0.3) / std::pow(p.derivative(1, 0.3).x(), 2) == doctest::Approx(4.0));

    const GraphCurve arc = reparametrize_to_graph(param("cos(t)", "sin(t)"), 0.1, 0.5);
    for (double t : {0.1, 0.2, 0.35, 0.5}) {
      const double s = std::cos(t);
      CHECK(std::abs(arc.phi(s) - std::sqrt(1 - s * s)) < 1e-8);
      CHECK(std::abs(second_derivative(arc, s) + std::pow(1 - s * s, -1.5)) < 1e-6);
    }

    const GraphCurve g = GraphCurve::from_expression("t^3 + t");
    const GraphCurve back = reparametrize_to_graph(ParamCurve::lift(g), 0.05, 0.95);
    for (int k = 0; k <= 16; ++k) {
      const double s = 0.05 + 0.9 * k / 16.0;
      CHECK(std::abs(back.phi(s) - g.phi(s)) < 1e-10);
    }
    CHECK_THROWS_AS(reparametrize_to_graph(param("(t - 0.5)^2", "t"), 0.0, 1.0), NotAGraphError);
  }

  TEST_CASE("curve analysis reports r") {
    for (double nu : {0.5, 1.0, 2.0, 3.0}) {
      const CurveAnalysis a = analyze_curve(GraphCurve::model(nu));
      CHECK(a.r == doctest::Approx(std::max(1.0 + nu, 2.0)).epsilon(0.02));
      REQUIRE_FALSE(a.points.empty());
      CHECK(a.points[0].hypothesis_order);
    }
  }
}
