#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "declab/errors.hpp"
#include "declab/norms.hpp"
#include "declab/oscillatory.hpp"
#include "declab/parallel.hpp"
#include "declab/rescale.hpp"

using namespace declab;

namespace {

GridSpec small_grid(Vec2 center, Eigen::Index n, double h) {
  GridSpec g;
  g.nx = g.ny = n;
  g.hx = g.hy = h;
  g.center = center;
  return g;
}

// Composite Simpson in long double.
std::complex<long double> simpson(const std::function<std::complex<long double>(long double)>& f,
                                  long double lo, long double hi, long n) {
  const long double h = (hi - lo) / n;
  std::complex<long double> s = f(lo) + f(hi);
  for (long k = 1; k < n; ++k) s += (k % 2 ? 4.0L : 2.0L) * f(lo + k * h);
  return s * h / 3.0L;
}

std::complex<long double> e_ld(long double z) {
  const long double a = 2.0L * 3.14159265358979323846264338327950288L * (z - std::nearbyint(z));
  return {std::cos(a), std::sin(a)};
}

TestFunction random_piecewise(const Partition& p, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<Complex> c(p.size());
  for (auto& v : c) v = Complex(n(rng), n(rng));
  return TestFunction::piecewise(p, c);
}

}  // namespace

TEST_SUITE("oscillatory") {
  TEST_CASE("extension operator closed forms") {
    const GraphCurve parabola = GraphCurve::from_expression("t^2");
    const Interval unit(0.0, 1.0);
    const TestFunction one = TestFunction::constant();
    CHECK(std::abs(extension_eval(parabola, unit, one, Vec2(0, 0)) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(extension_eval(GraphCurve::model(2.0), unit, one, Vec2(3, 0))) < 1e-12);
    const double x1 = 3.3;
    const Complex closed = (unit_phase(x1) - 1.0) / (Complex(0, 2 * M_PI * x1));
    CHECK(std::abs(extension_eval(GraphCurve::model(0.5), unit, one, Vec2(x1, 0)) - closed) < 1e-12);

    const auto ref = simpson([](long double t) { return e_ld(16.0L * t * t); }, 0.0L, 1.0L, 1000000);
    const Complex got = extension_eval(parabola, unit, one, Vec2(0, 16));
    CHECK(std::abs(got - Complex(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) < 1e-8);
  }

  TEST_CASE("smooth callable g") {
    const TestFunction g = TestFunction::callable([](double t) { return Complex(t, 0.0); });
    CHECK(g.l1_norm() == doctest::Approx(0.5));
    CHECK(std::abs(extension_eval(GraphCurve::model(1.0), Interval(0, 1), g, Vec2(0, 0)) - 0.5) < 1e-14);
    const auto ref = simpson([](long double t) { return t * e_ld(2.5L * t + 7.0L * t * t * t); }, 0.0L, 1.0L, 200000);
    const Complex got = extension_eval(GraphCurve::model(2.0), Interval(0, 1), g, Vec2(2.5, 7));
    CHECK(std::abs(got - Complex(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) < 1e-9);
  }

  TEST_CASE("1x1 field equals a point evaluation") {
    const GraphCurve c = GraphCurve::model(2.0);
    const TestFunction one = TestFunction::constant();
    const Vec2 x(-4.25, 17.5);
    const GridSpec g = small_grid(x, 1, 1.0);
    const auto f = evaluate_field(c, Interval(0, 1), one, WeightRectangle::generic(x, 1, 1), g);
    CHECK(f.values(0, 0) == extension_eval(c, Interval(0, 1), one, x));
  }

  TEST_CASE("linearity and additivity over a partition") {
    std::mt19937_64 rng(7);
    const ParamCurve c = ParamCurve::lift(GraphCurve::model(0.5));
    const Partition p = uniform_partition(Interval(0, 1), 0.125);
    const TestFunction g1 = random_piecewise(p, rng), g2 = random_piecewise(p, rng);
    std::vector<Complex> sum(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] = g1.coefficients()[i] + g2.coefficients()[i];
    const TestFunction g12 = TestFunction::piecewise(p, sum);
    const GridSpec grid = small_grid(Vec2(3, -20), 17, 1.7);
    const auto R = WeightRectangle::generic(grid.center, 10, 10);
    const auto f1 = evaluate_field(c, Interval(0, 1), g1, R, grid);
    const auto f2 = evaluate_field(c, Interval(0, 1), g2, R, grid);
    const auto f12 = evaluate_field(c, Interval(0, 1), g12, R, grid);
    CHECK((f12.values - f1.values - f2.values).cwiseAbs().maxCoeff() < 1e-10);

    // g = 1 on [1/4, 3/4] as one interval versus the sum of its four cells.
    const TestFunction one = TestFunction::constant();
    const auto whole = evaluate_field(c, Interval(0.25, 0.75), one, R, grid);
    FieldGrid<double> parts(R, grid);
    for (int k = 0; k < 4; ++k)
      parts.values += evaluate_field(c, Interval(0.25 + 0.125 * k, 0.375 + 0.125 * k), one, R, grid).values;
    CHECK((whole.values - parts.values).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("modulus bound and conjugate symmetry") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-60.0, 60.0);
    const Partition p = uniform_partition(Interval(0, 1), 1.0 / 16);
    for (double nu : {0.5, 1.0, 3.0}) {
      const GraphCurve c = GraphCurve::model(nu);
      const TestFunction g = random_piecewise(p, rng);
      std::vector<Complex> re(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) re[i] = g.coefficients()[i].real();
      const TestFunction gr = TestFunction::piecewise(p, re);
      for (int k = 0; k < 10; ++k) {
        const Vec2 x(u(rng), u(rng));
        CHECK(std::abs(extension_eval(c, Interval(0, 1), g, x)) <= g.l1_norm() * (1 + 1e-12));
        const Complex plus = extension_eval(c, Interval(0, 1), gr, x);
        const Complex minus = extension_eval(c, Interval(0, 1), gr, -x);
        CHECK(std::abs(minus - std::conj(plus)) < 1e-12);
      }
    }
  }

  TEST_CASE("doubling the node count changes little") {
    QuadratureOptions fine;
    fine.refinement = 2;
    const TestFunction one = TestFunction::constant();
    for (double nu : {0.5, 2.0, 3.0})
      for (Vec2 x : {Vec2(5, 40), Vec2(-120, 300), Vec2(40, -2000)}) {
        const GraphCurve c = GraphCurve::model(nu);
        const Complex a = extension_eval(c, Interval(0, 1), one, x);
        const Complex b = extension_eval(c, Interval(0, 1), one, x, fine);
        CHECK(std::abs(a - b) < 1e-8);
      }
  }

  TEST_CASE("node budget") {
    QuadratureOptions tight;
    tight.nq_max = 64;
    CHECK_THROWS_AS(extension_eval(GraphCurve::model(2.0), Interval(0, 1), TestFunction::constant(),
                                   Vec2(0, 1000), tight),
                    ResolutionError);
    QuadratureOptions tiny;
    tiny.max_field_bytes = 100;
    CHECK_THROWS_AS(evaluate_field(GraphCurve::model(2.0), Interval(0, 1), TestFunction::constant(),
                                   WeightRectangle::generic(Vec2::Zero(), 1, 1),
                                   small_grid(Vec2::Zero(), 9, 1.0), tiny),
                    BudgetError);
  }

  TEST_CASE("change of variables onto the normalized curve") {
    std::mt19937_64 rng(3);
    for (double nu : {0.5, 2.0})
      for (double a : {0.125, 0.25})
        for (Normalization kind : {Normalization::Curvature, Normalization::Model}) {
          const GraphCurve c = GraphCurve::model(nu);
          const NormalizedCurve nc = normalize(c, a, kind);
          const GraphCurve ga = nc.as_graph();
          const Interval block(a, 2 * a);
          const TestFunction g = random_piecewise(uniform_partition(Interval(0, 1), 1.0 / 32), rng);
          double worst = 0.0;
          for (int i = 0; i < 33; ++i)
            for (int j = 0; j < 33; ++j) {
              const double x1 = -160 + 10.0 * i, x2 = -640 + 40.0 * j;
              const Complex lhs = extension_eval(c, block, g, Vec2(x1, x2));
              const Complex rhs = extension_eval(ga, block, g, Vec2(x1, nc.x2_factor() * x2));
              worst = std::max(worst, std::abs(lhs - rhs));
            }
          CHECK(worst < 1e-9);
        }
  }

  TEST_CASE("exponential sums") {
    const ParamCurve parabola = ParamCurve::lift(GraphCurve::from_expression("t^2"));
    const std::vector<double> t{0.25, 0.5, 0.75, 1.0};
    const std::vector<Complex> a{{1, 0}, {0.5, -1}, {2, 0.25}, {-1, 1}};
    CHECK(std::abs(expsum_eval(parabola, t, a, Vec2(0, 0)) - (a[0] + a[1] + a[2] + a[3])) < 1e-15);
    CHECK(std::abs(std::abs(expsum_eval(parabola, std::vector<double>{0.6},
                                        std::vector<Complex>{1.0}, Vec2(3.7, -2.2))) -
                   1.0) < 1e-15);

    using boost::multiprecision::cpp_bin_float_50;
    const cpp_bin_float_50 two_pi = 2 * boost::math::constants::pi<cpp_bin_float_50>();
    cpp_bin_float_50 re = 0, im = 0;
    for (std::size_t n = 0; n < 4; ++n) {
      const cpp_bin_float_50 tn = cpp_bin_float_50(n + 1) / 4;
      const cpp_bin_float_50 phase = two_pi * (tn + tn * tn);
      re += a[n].real() * cos(phase) - a[n].imag() * sin(phase);
      im += a[n].real() * sin(phase) + a[n].imag() * cos(phase);
    }
    const Complex got = expsum_eval(parabola, t, a, Vec2(1, 1));
    CHECK(std::abs(got.real() - re.convert_to<double>()) < 1e-14);
    CHECK(std::abs(got.imag() - im.convert_to<double>()) < 1e-14);

    CHECK_THROWS_AS(expsum_eval(parabola, std::vector<double>{0.1, 0.3}, std::vector<Complex>{1, 1},
                                Vec2(0, 0)),
                    DomainError);
    CHECK_THROWS_AS(expsum_eval(parabola, std::vector<double>{0.0}, std::vector<Complex>{1}, Vec2(0, 0)),
                    DomainError);
  }

  TEST_CASE("gridded exponential sum matches pointwise sums") {
    const ParamCurve c = ParamCurve::lift(GraphCurve::model(2.0));
    std::vector<double> t;
    std::vector<Complex> a;
    for (int n = 1; n <= 16; ++n) {
      t.push_back((n - 0.3) / 16.0);
      a.emplace_back(std::cos(n), std::sin(2.0 * n));
    }
    const GridSpec g = small_grid(Vec2(10, -5), 151, 0.3);
    const auto f = evaluate_expsum_field(c, t, a, WeightRectangle::generic(g.center, 1, 1), g);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < g.ny; j += 7)
      for (Eigen::Index i = 0; i < g.nx; ++i)
        worst = std::max(worst, std::abs(f.values(j, i) - expsum_eval(c, t, a, g.point(i, j))));
    CHECK(worst < 1e-12);
  }

  TEST_CASE("field evaluation is independent of the worker count") {
    const GraphCurve c = GraphCurve::model(3.0);
    std::mt19937_64 rng(5);
    const TestFunction g = random_piecewise(uniform_partition(Interval(0, 1), 1.0 / 8), rng);
    const GridSpec grid = small_grid(Vec2(0, 0), 41, 0.9);
    const auto R = WeightRectangle::generic(Vec2::Zero(), 10, 10);
    set_worker_count(1);
    const auto f1 = evaluate_field(c, Interval(0, 1), g, R, grid);
    set_worker_count(4);
    const auto f4 = evaluate_field(c, Interval(0, 1), g, R, grid);
    set_worker_count(0);
    CHECK(f1.values == f4.values);
  }

  TEST_CASE("column fast path matches the direct row path") {
    std::mt19937_64 rng(11);
    for (double nu : {0.5, 2.0}) {
      const GraphCurve c = GraphCurve::model(nu);
      const TestFunction g = random_piecewise(uniform_partition(Interval(0, 1), 1.0 / 16), rng);
      for (Eigen::Index ny : {Eigen::Index(301), Eigen::Index(600)}) {
        GridSpec grid;
        grid.nx = 7;
        grid.ny = ny;
        grid.hx = 1.3;
        grid.hy = 0.2;
        grid.center = Vec2(4.0, 30.0);
        const auto R = WeightRectangle::generic(grid.center, 10, 100);
        QuadratureOptions direct, fast;
        direct.fast_path = false;
        fast.fast_path_min_rows = 1;
        const auto fd = evaluate_field(c, Interval(0, 1), g, R, grid, direct);
        const auto ff = evaluate_field(c, Interval(0, 1), g, R, grid, fast);
        // nu = 0.5 has a derivative singularity at 0, so the row-adaptive and
        // row-maximal node counts differ at the quadrature error level.
        CHECK((fd.values - ff.values).cwiseAbs().maxCoeff() < (nu < 1 ? 1e-6 : 1e-10));
        set_worker_count(3);
        const auto ff3 = evaluate_field(c, Interval(0, 1), g, R, grid, fast);
        set_worker_count(0);
        CHECK(ff3.values == ff.values);
      }
    }
  }

  TEST_CASE("binary and CSV export") {
    const GraphCurve c = GraphCurve::model(2.0);
    const GridSpec grid = small_grid(Vec2(1.5, -2), 5, 0.5);
    const auto f = evaluate_field(c, Interval(0, 1), TestFunction::constant(),
                                  WeightRectangle::generic(grid.center, 3, 4), grid);
    const std::string path = "field_roundtrip.bin";
    write_field_binary(path, f);
    const auto back = read_field_binary(path);
    CHECK(back.values == f.values);
    CHECK(back.grid.center == grid.center);
    CHECK(back.hx() == grid.hx);
    CHECK(back.rect.a == 3.0);
    {
      std::ifstream is(path, std::ios::binary | std::ios::ate);
      CHECK(static_cast<long>(is.tellg()) == 4 + 4 + 16 + 7 * 8 + 25 * 16);
    }
    std::remove(path.c_str());
    write_field_csv("field.csv", f);
    std::ifstream is("field.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,re,im");
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == 25);
    std::remove("field.csv");
  }
}
