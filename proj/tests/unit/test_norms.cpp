#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "declab/errors.hpp"
#include "declab/norms.hpp"
#include "declab/oscillatory.hpp"

using namespace declab;

namespace {

FieldGrid<double> constant_field(const WeightRectangle& R, const GridSpec& g, Complex c = 1.0) {
  FieldGrid<double> f(R, g);
  f.values.setConstant(c);
  return f;
}

// 1-D radial reference for the integral of omega_B over the disc of radius rho.
double radial_mass(double s, double rho) {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [s](double r) { return 2.0 * M_PI * r * std::pow(1.0 + r, -s); };
  return gauss_kronrod<double, 61>::integrate(f, 0.0, rho, 15, 1e-14);
}

}  // namespace

TEST_SUITE("norms") {
  TEST_CASE("weights") {
    const auto B = WeightRectangle::generic(Vec2::Zero(), 1, 1);
    CHECK(weight_eval(B, Vec2(0, 0)) == 1.0);
    CHECK(weight_eval(B, Vec2(1, 0)) == std::pow(2.0, -200));
    const auto R = WeightRectangle::generic(Vec2(10, 0), 4, 2);
    CHECK(weight_eval(R, Vec2(14, 0)) == std::pow(2.0, -200));
    CHECK(weight_eval(R, Vec2(10, 2)) == std::pow(2.0, -200));

    const auto D = WeightRectangle::delta_r(1.0 / 16, 3.0);
    CHECK(D.a == 16.0);
    CHECK(D.b == doctest::Approx(64.0));
    const auto Q = WeightRectangle::cube(1.0 / 16);
    CHECK(Q.a == 16.0);
    CHECK(Q.b == 16.0);
    const auto Bl = WeightRectangle::block(1.0 / 16, 0.5);
    CHECK(Bl.b == 32.0);
    CHECK(weight_eval(WeightRectangle::ball(50.0), Vec2(30, 40)) == std::pow(2.0, -200));
  }

  TEST_CASE("tail radius and mass") {
    for (double tol : {1e-3, 1e-6, 1e-9}) {
      const double rho = weight_tail_radius(200.0, tol);
      const double inside = radial_mass(200.0, rho) / weight_mass(200.0);
      CHECK(std::abs((1.0 - inside) / tol - 1.0) < 1e-6);
    }
    CHECK(weight_tail_radius(200.0, 1e-3) == doctest::Approx(0.0476).epsilon(0.01));
    CHECK(radial_mass(200.0, 50.0) == doctest::Approx(weight_mass(200.0)).epsilon(1e-12));
    // Mass outside 4 times the rectangle is negligible.
    CHECK(std::pow(5.0, -199.0) * (1 + 199.0 * 4) < 1e-100);
  }

  TEST_CASE("grid planning") {
    const auto R = WeightRectangle::delta_r(1.0 / 64, 3.0);
    const GridSpec g = plan_grid(R, Vec2(1, 1));
    CHECK(g.nx % 2 == 1);
    CHECK(g.ny % 2 == 1);
    CHECK(g.hx <= 0.25);
    CHECK(g.hy <= 0.25);
    CHECK(g.hx <= R.a / 400.0 + 1e-15);
    CHECK_NOTHROW(check_coverage(g, R, 1e-3));
    CHECK_THROWS_AS(check_coverage(g, R, 1e-9), CoverageError);
    const GridSpec wide = plan_grid(R, Vec2(1, 4));
    CHECK(wide.hy <= 1.0 / 16 + 1e-15);
  }

  TEST_CASE("weighted norm of the constant field") {
    const auto R = WeightRectangle::generic(Vec2::Zero(), 1, 1);
    GridOptions fine;
    fine.tail_tolerance = 1e-9;
    fine.samples_per_weight_scale = 64;
    const GridSpec g = plan_grid(R, Vec2(0, 0), fine);
    const double norm2 = weighted_lp_norm(constant_field(R, g), 2.0, R, 1e-9);
    const double ref = radial_mass(200.0, 100.0);
    CHECK(std::abs(norm2 * norm2 / ref - 1.0) < 1e-6);
  }

  TEST_CASE("unimodular fields, homogeneity, translation") {
    const auto R = WeightRectangle::generic(Vec2(3, -1), 40, 60);
    const GridSpec g = plan_grid(R, Vec2(1, 1));
    FieldGrid<double> wave(R, g);
    for (Eigen::Index j = 0; j < g.ny; ++j)
      for (Eigen::Index i = 0; i < g.nx; ++i) wave.values(j, i) = unit_phase(0.3 * g.x(i) - 0.8 * g.y(j));
    for (double p : {2.0, 3.0, 4.0, 6.0}) {
      const double one = weighted_lp_norm(constant_field(R, g), p, R);
      CHECK(std::abs(weighted_lp_norm(wave, p, R) / one - 1.0) < 1e-12);
      FieldGrid<double> triple = wave;
      triple.values *= 3.0;
      CHECK(weighted_lp_norm(triple, p, R) == doctest::Approx(3.0 * weighted_lp_norm(wave, p, R)).epsilon(1e-14));
    }
    // Translate the field profile and R together.
    const auto bump = [](const Vec2& d) { return Complex(std::exp(-d.squaredNorm() / 50.0), d.x() / 10); };
    const auto make = [&](Vec2 c) {
      auto Rc = R;
      Rc.center = c;
      GridSpec gc = g;
      gc.center = c;
      FieldGrid<double> f(Rc, gc);
      for (Eigen::Index j = 0; j < gc.ny; ++j)
        for (Eigen::Index i = 0; i < gc.nx; ++i) f.values(j, i) = bump(gc.point(i, j) - c);
      return weighted_lp_norm(f, 4.0, Rc);
    };
    CHECK(make(Vec2(0, 0)) == doctest::Approx(make(Vec2(1000.5, -333.25))).epsilon(1e-10));
    CHECK_THROWS_AS(weighted_lp_norm(wave, 7.0, R), DomainError);
    CHECK_THROWS_AS(weighted_lp_norm(wave, 1.0, R), DomainError);
  }

  TEST_CASE("p-means increase with p on the normalized measure") {
    const auto R = WeightRectangle::generic(Vec2::Zero(), 30, 30);
    const GridSpec g = plan_grid(R, Vec2(1, 1));
    const ParamCurve c = ParamCurve::lift(GraphCurve::model(2.0));
    const auto f = evaluate_field(c, Interval(0, 1), TestFunction::constant(), R, g);
    const double mass = std::pow(weighted_lp_norm(constant_field(R, g), 2.0, R), 2.0);
    double prev = 0.0;
    for (double p : {2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
      const double mean = weighted_lp_norm(f, p, R) / std::pow(mass, 1.0 / p);
      CHECK(mean >= prev * (1 - 1e-12));
      prev = mean;
    }
  }

  TEST_CASE("coverage") {
    const auto R = WeightRectangle::generic(Vec2::Zero(), 100, 100);
    GridSpec g;
    g.nx = g.ny = 5;
    g.hx = g.hy = 0.25;
    CHECK_THROWS_AS(weighted_lp_norm(constant_field(R, g), 2.0, R), CoverageError);
  }

  TEST_CASE("Minkowski transfer") {
    const auto big = WeightRectangle::generic(Vec2::Zero(), 40, 20);
    const GridSpec g = plan_grid(big, Vec2(1, 1));
    const auto one = constant_field(big, g);
    const auto same = minkowski_transfer_check(one, 4.0, big, {big});
    CHECK(same.holds);
    CHECK(same.cover_constant == doctest::Approx(1.0));
    CHECK(same.lhs == doctest::Approx(same.rhs).epsilon(1e-14));

    const std::vector<WeightRectangle> halves{WeightRectangle::generic(Vec2(-10, 0), 20, 20),
                                              WeightRectangle::generic(Vec2(10, 0), 20, 20)};
    const auto two = minkowski_transfer_check(one, 6.0, big, halves);
    CHECK(two.holds);
    CHECK(two.cover_constant > 0.0);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<Complex> coef(8);
    for (auto& v : coef) v = Complex(n(rng), n(rng));
    const auto f = evaluate_field(ParamCurve::lift(GraphCurve::model(2.0)), Interval(0, 1),
                                  TestFunction::piecewise(uniform_partition(Interval(0, 1), 0.125), coef),
                                  big, g);
    std::vector<WeightRectangle> quarters;
    for (double cx : {-10.0, 10.0})
      for (double cy : {-5.0, 5.0}) quarters.push_back(WeightRectangle::generic(Vec2(cx, cy), 20, 10));
    for (double p : {2.0, 4.0, 6.0}) CHECK(minkowski_transfer_check(f, p, big, quarters, 1e-9).holds);
  }
}
