#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "declab/errors.hpp"
#include "declab/expsum.hpp"

using namespace declab;

namespace {

// Direct enumeration of all N^6 tuples.
std::uint64_t count_all_tuples(int N) {
  std::uint64_t c = 0;
  for (int a = 1; a <= N; ++a)
    for (int b = 1; b <= N; ++b)
      for (int d = 1; d <= N; ++d)
        for (int e = 1; e <= N; ++e)
          for (int f = 1; f <= N; ++f)
            for (int g = 1; g <= N; ++g)
              if (a + b + d == e + f + g && a * a + b * b + d * d == e * e + f * f + g * g) ++c;
  return c;
}

}  // namespace

TEST_SUITE("expsum") {
  TEST_CASE("point system presets") {
    for (std::size_t N : {1UL, 7UL, 64UL}) {
      for (const char* kind : {"lattice", "random", "perturbed"}) {
        const PointSystem ps = PointSystem::preset(kind, N, 99);
        CHECK(ps.N() == N);
        CHECK_NOTHROW(ps.validate());
      }
    }
    CHECK(PointSystem::random(16, 5).t == PointSystem::random(16, 5).t);
    CHECK(PointSystem::random(16, 5).t != PointSystem::random(16, 6).t);
    CHECK_THROWS_AS(PointSystem::preset("spiral", 4, 1), ConfigError);
    PointSystem bad = PointSystem::lattice(4);
    bad.t[2] = 0.1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }

  TEST_CASE("l6 average of one term") {
    const GraphCurve c = GraphCurve::model(2.0);
    PointSystem ps = PointSystem::lattice(1, Complex(0.6, -0.8) * 3.0);
    const L6Result r = l6_average(c, ps, 10.0);
    CHECK(r.average == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));

    PointSystem one = PointSystem::random(6, 3);
    for (std::size_t n = 0; n < 6; ++n) one.a[n] = n == 4 ? Complex(-2.0, 1.0) : Complex(0.0);
    CHECK(l6_average(c, one, 100.0).ratio == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("l6 ratio invariances and precondition flag") {
    const GraphCurve c = GraphCurve::model(1.0);
    PointSystem ps = PointSystem::perturbed(8, 2);
    for (std::size_t n = 0; n < 8; ++n) ps.a[n] = Complex(std::cos(1.3 * n), std::sin(0.7 * n) + 0.2);
    const L6Result base = l6_average(c, ps, 64.0);
    PointSystem rotated = ps, scaled = ps;
    for (auto& v : rotated.a) v *= unit_phase(0.37);
    for (auto& v : scaled.a) v *= 4.5;
    CHECK(std::abs(l6_average(c, rotated, 64.0).ratio / base.ratio - 1.0) < 1e-12);
    CHECK(std::abs(l6_average(c, scaled, 64.0).ratio / base.ratio - 1.0) < 1e-12);
    CHECK(base.precondition_met);
    CHECK(base.r == 2.0);
    CHECK_FALSE(l6_average(c, ps, 63.0).precondition_met);
    CHECK_FALSE(l6_average(GraphCurve::model(2.0), ps, 64.0).precondition_met);
  }

  TEST_CASE("l6 average approaches the torus count on a wide ball") {
    // Lattice sums are periodic with periods N and N^2; once the weight spans
    // many periods the average tends to J(N)^(1/6). The weight decays on the
    // scale R/200, so R = 200 N^2.
    const int N = 4;
    const L6Result r = l6_average(GraphCurve::model(1.0), PointSystem::lattice(N), 200.0 * N * N);
    const double torus = std::pow(static_cast<double>(vinogradov_count(N)), 1.0 / 6.0) / std::sqrt(N);
    CHECK(r.ratio == doctest::Approx(torus).epsilon(0.05));
  }

  TEST_CASE("ball cover consistency") {
    const GraphCurve c = GraphCurve::model(1.0);
    const PointSystem ps = PointSystem::random(4, 8);
    // omega decays on the scale radius/200, so the tiles sit radius/32 apart.
    const double R = 256.0, small = 16.0, step = small / 32.0;
    const WeightRectangle B = WeightRectangle::ball(R);
    const GridSpec grid = plan_grid(B, Vec2(1.0, 1.0));
    const auto field = evaluate_expsum_field(ParamCurve::lift(c), ps.t, ps.a, B, grid);
    std::vector<WeightRectangle> tiles;
    const double reach = grid.half_width_x() + step;
    for (double x = -reach; x <= reach; x += step)
      for (double y = -reach; y <= reach; y += step) tiles.push_back(WeightRectangle::ball(small, Vec2(x, y)));
    const MinkowskiCheck m = minkowski_transfer_check(field, 6.0, B, tiles);
    CHECK(m.holds);
    CHECK(std::isfinite(m.cover_constant));
    MESSAGE("cover constant " << m.cover_constant << " lhs " << m.lhs << " rhs " << m.rhs);
  }

  TEST_CASE("vinogradov counting") {
    CHECK(vinogradov_count(1) == 1);
    CHECK(vinogradov_count(2) == count_all_tuples(2));
    CHECK(vinogradov_count(2) == 20);
    for (int N = 1; N <= 6; ++N) CHECK(vinogradov_count(N, CountMethod::BruteForce) == count_all_tuples(N));
    for (int N = 1; N <= 16; ++N) {
      const auto brute = vinogradov_count(N, CountMethod::BruteForce);
      CHECK(brute == vinogradov_count(N, CountMethod::MeetInTheMiddle));
      CHECK(brute >= static_cast<std::uint64_t>(N) * N * N);
    }
    CHECK(vinogradov_count(40) == vinogradov_count(40, CountMethod::BruteForce));
    CHECK_THROWS_AS(vinogradov_count(0), DomainError);
    CHECK_THROWS_AS(vinogradov_count(65, CountMethod::BruteForce), DomainError);
    CHECK_THROWS_AS(vinogradov_count(513), DomainError);
    for (int N : {32, 64, 128}) MESSAGE("J(" << N << ") / N^3 = " << vinogradov_count(N) / std::pow(N, 3.0));
  }

  TEST_CASE("torus integral reproduces the count") {
    CHECK(torus_l6_integral(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(torus_l6_integral(2) == doctest::Approx(20.0).epsilon(1e-6));
    for (int N : {3, 4, 6})
      CHECK(torus_l6_integral(N) ==
            doctest::Approx(static_cast<double>(vinogradov_count(N))).epsilon(1e-3));
    CHECK(torus_l6_integral(3, 48, 160) == doctest::Approx(93.0).epsilon(1e-9));
    CHECK_THROWS_AS(torus_l6_integral(3, 23, 72), DomainError);
    CHECK_THROWS_AS(torus_l6_integral(3, 24, 71), DomainError);
  }

  TEST_CASE("mollified bridge") {
    const GraphCurve c = GraphCurve::model(1.0);
    PointSystem ps = PointSystem::perturbed(6, 12);
    for (std::size_t n = 0; n < 6; ++n) ps.a[n] = Complex(1.0 + 0.1 * n, -0.3 * n);
    CHECK(mollified_bridge(c, ps, 0.05, {Vec2(0, 0)}).max_deviation < 1e-12);

    std::vector<Vec2> xs;
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j) xs.emplace_back(2.5 * i, 3.0 * j);
    const BridgeResult coarse = mollified_bridge(c, ps, 0.004, xs);
    const BridgeResult fine = mollified_bridge(c, ps, 0.002, xs);
    CHECK(coarse.within_bound);
    CHECK(fine.within_bound);
    // Symmetric windows cancel the first-order term, so halving tau divides
    // the deviation by about four.
    const double factor = coarse.max_deviation / fine.max_deviation;
    MESSAGE("deviation ratio on halving tau: " << factor);
    CHECK(factor == doctest::Approx(4.0).epsilon(0.1));

    CHECK_THROWS_AS(mollified_bridge(c, ps, 1.0 / 12, xs), DomainError);
    CHECK_THROWS_AS(mollified_bridge(c, ps, 0.0, xs), DomainError);
  }

  TEST_CASE("single point bridge against a closed-form average") {
    const GraphCurve c = GraphCurve::model(1.0);
    PointSystem ps = PointSystem::lattice(1, Complex(0.5, 1.5));
    ps.t[0] = 0.6;
    const double tau = 0.3;
    for (const Vec2& x : {Vec2(3.0, -7.0), Vec2(-11.0, 4.5)}) {
      const auto re = [&](double t) { return std::cos(2 * M_PI * (x.x() * t + x.y() * t * t)); };
      const auto im = [&](double t) { return std::sin(2 * M_PI * (x.x() * t + x.y() * t * t)); };
      using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
      const Complex avg(GK::integrate(re, 0.3, 0.9, 15, 1e-14), GK::integrate(im, 0.3, 0.9, 15, 1e-14));
      const Complex expected = ps.a[0] * avg / (2 * tau);
      const Complex sum = ps.a[0] * unit_phase(x.x() * 0.6 + x.y() * 0.36);
      const BridgeResult b = mollified_bridge(c, ps, tau, {x});
      CHECK(b.max_deviation == doctest::Approx(std::abs(expected - sum)).epsilon(1e-9));
    }
  }
}
