#include "declab/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "declab/decoupling.hpp"
#include "declab/errors.hpp"
#include "declab/parallel.hpp"

namespace declab {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::mt19937_64 point_stream(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

void check_N(std::size_t N) {
  if (N < 1) throw DomainError("point system needs N >= 1");
}

}  // namespace

double PointSystem::l2() const {
  double s = 0.0;
  for (const Complex& c : a) s += std::norm(c);
  return std::sqrt(s);
}

void PointSystem::validate() const {
  if (t.empty()) throw DomainError("point system is empty");
  if (t.size() != a.size()) throw DomainError("point system: points and coefficients differ in size");
  check_point_cells(t);
}

PointSystem PointSystem::lattice(std::size_t N, Complex a) {
  check_N(N);
  PointSystem ps;
  for (std::size_t n = 1; n <= N; ++n) ps.t.push_back(static_cast<double>(n) / static_cast<double>(N));
  ps.a.assign(N, a);
  return ps;
}

PointSystem PointSystem::random(std::size_t N, std::uint64_t seed, Complex a) {
  check_N(N);
  std::mt19937_64 rng = point_stream(seed);
  PointSystem ps;
  const auto n_ = static_cast<double>(N);
  for (std::size_t n = 1; n <= N; ++n) {
    const double t = (static_cast<double>(n) - unit_uniform(rng)) / n_;
    ps.t.push_back(std::clamp(std::nextafter((static_cast<double>(n) - 1.0) / n_, 2.0), t,
                              static_cast<double>(n) / n_));
  }
  ps.a.assign(N, a);
  return ps;
}

PointSystem PointSystem::perturbed(std::size_t N, std::uint64_t seed, Complex a) {
  check_N(N);
  std::mt19937_64 rng = point_stream(seed);
  PointSystem ps;
  const auto n_ = static_cast<double>(N);
  for (std::size_t n = 1; n <= N; ++n)
    ps.t.push_back(static_cast<double>(n) / n_ - unit_uniform(rng) / (n_ * n_));
  ps.a.assign(N, a);
  return ps;
}

PointSystem PointSystem::preset(const std::string& kind, std::size_t N, std::uint64_t seed) {
  if (kind == "lattice") return lattice(N);
  if (kind == "random") return random(N, seed);
  if (kind == "perturbed") return perturbed(N, seed);
  throw ConfigError("unknown point system '" + kind + "'");
}

L6Result l6_average(const GraphCurve& curve, const PointSystem& ps, double R,
                    const L6Options& options) {
  ps.validate();
  if (!(R > 0.0)) throw DomainError("l6_average: R must be positive");
  const ParamCurve lifted = ParamCurve::lift(curve);
  L6Result out;
  out.N = ps.N();
  out.R = R;
  out.r = options.r ? *options.r : curve_exponent_r(curve);
  out.precondition_met = R >= std::pow(static_cast<double>(out.N), out.r) * (1.0 - 1e-12);

  Vec2 extent = Vec2::Zero();
  for (double t : ps.t) extent = extent.cwiseMax(lifted.point(t).cwiseAbs());
  const WeightRectangle B = WeightRectangle::ball(R, Vec2::Zero(), options.weight_exponent);
  const GridSpec grid = plan_grid(B, extent, options.grid);
  const FieldGrid<double> field = evaluate_expsum_field(lifted, ps.t, ps.a, B, grid);
  const std::vector<double> w = weight_array(grid, B);

  std::vector<double> num(static_cast<std::size_t>(grid.ny)), den(num.size());
  parallel_for(num.size(), [&](std::size_t j) {
    double s = 0.0, m = 0.0;
    for (Eigen::Index i = 0; i < grid.nx; ++i) {
      const double wk = w[j * static_cast<std::size_t>(grid.nx) + static_cast<std::size_t>(i)];
      s += pow_from_abs2(std::norm(field.values(static_cast<Eigen::Index>(j), i)), 6.0) * wk;
      m += wk;
    }
    num[j] = s;
    den[j] = m;
  });
  out.average = std::pow(pairwise_sum(num) / pairwise_sum(den), 1.0 / 6.0);
  out.l2 = ps.l2();
  out.ratio = out.l2 > 0.0 ? out.average / out.l2 : 0.0;
  out.nx = grid.nx;
  out.ny = grid.ny;
  return out;
}

namespace {

std::uint64_t count_brute(int N) {
  // n6 is fixed by the linear equation; the quadratic one is then checked.
  std::vector<std::uint64_t> per(static_cast<std::size_t>(N));
  parallel_for(per.size(), [&](std::size_t i) {
    const long n1 = static_cast<long>(i) + 1;
    std::uint64_t c = 0;
    for (long n2 = 1; n2 <= N; ++n2)
      for (long n3 = 1; n3 <= N; ++n3) {
        const long s = n1 + n2 + n3, q = n1 * n1 + n2 * n2 + n3 * n3;
        for (long n4 = 1; n4 <= N; ++n4)
          for (long n5 = 1; n5 <= N; ++n5) {
            const long n6 = s - n4 - n5;
            if (n6 >= 1 && n6 <= N && n4 * n4 + n5 * n5 + n6 * n6 == q) ++c;
          }
      }
    per[i] = c;
  });
  std::uint64_t total = 0;
  for (std::uint64_t c : per) total += c;
  return total;
}

std::uint64_t count_meet_in_the_middle(int N) {
  // For each sum s, tally triples by sum of squares; the count is sum of squares
  // of the tallies.
  const long n = N;
  const auto sums = static_cast<std::size_t>(3 * n - 2);
  std::vector<std::uint64_t> per(sums);
  parallel_for(sums, [&](std::size_t k) {
    const long s = static_cast<long>(k) + 3;
    std::vector<std::uint32_t> tally(static_cast<std::size_t>(3 * n * n + 1), 0);
    std::vector<long> touched;
    for (long n1 = 1; n1 <= n; ++n1)
      for (long n2 = 1; n2 <= n; ++n2) {
        const long n3 = s - n1 - n2;
        if (n3 < 1 || n3 > n) continue;
        const long q = n1 * n1 + n2 * n2 + n3 * n3;
        if (tally[static_cast<std::size_t>(q)]++ == 0) touched.push_back(q);
      }
    std::uint64_t c = 0;
    for (long q : touched) {
      const std::uint64_t m = tally[static_cast<std::size_t>(q)];
      c += m * m;
    }
    per[k] = c;
  });
  std::uint64_t total = 0;
  for (std::uint64_t c : per) total += c;
  return total;
}

}  // namespace

std::uint64_t vinogradov_count(int N, CountMethod method) {
  if (N < 1) throw DomainError("vinogradov_count: N must be positive");
  if (method == CountMethod::Auto) method = N <= 16 ? CountMethod::BruteForce : CountMethod::MeetInTheMiddle;
  if (method == CountMethod::BruteForce) {
    if (N > 64) throw DomainError("vinogradov_count: brute force is limited to N <= 64");
    return count_brute(N);
  }
  if (N > 512) throw DomainError("vinogradov_count: N beyond 512 exceeds the counting budget");
  return count_meet_in_the_middle(N);
}

double torus_l6_integral(int N, long m1, long m2) {
  if (N < 1) throw DomainError("torus_l6_integral: N must be positive");
  const long n = N;
  if (m1 == 0) m1 = 8 * n;
  if (m2 == 0) m2 = 8 * n * n;
  if (m1 < 8 * n || m2 < 8 * n * n)
    throw DomainError("torus_l6_integral: grid needs at least 8N x 8N^2 samples");
  std::vector<Complex> e1(static_cast<std::size_t>(m1));
  for (long l = 0; l < m1; ++l)
    e1[static_cast<std::size_t>(l)] = unit_phase(static_cast<double>(l) / static_cast<double>(m1));
  std::vector<double> rows(static_cast<std::size_t>(m2));
  parallel_for(rows.size(), [&](std::size_t k) {
    std::vector<Complex> b(static_cast<std::size_t>(n));
    for (long j = 1; j <= n; ++j) {
      const long phase = (j * j % m2) * static_cast<long>(k) % m2;
      b[static_cast<std::size_t>(j - 1)] = unit_phase(static_cast<double>(phase) / static_cast<double>(m2));
    }
    double acc = 0.0;
    for (long l = 0; l < m1; ++l) {
      Complex s = 0.0;
      for (long j = 1; j <= n; ++j) s += b[static_cast<std::size_t>(j - 1)] * e1[static_cast<std::size_t>(j * l % m1)];
      acc += pow_from_abs2(std::norm(s), 6.0);
    }
    rows[k] = acc;
  });
  return pairwise_sum(rows) / (static_cast<double>(m1) * static_cast<double>(m2));
}

BridgeResult mollified_bridge(const GraphCurve& curve, const PointSystem& ps, double tau,
                              const std::vector<Vec2>& points, const QuadratureOptions& options) {
  ps.validate();
  const double N = static_cast<double>(ps.N());
  if (!(tau > 0.0 && tau < 1.0 / (2.0 * N)))
    throw DomainError("mollified_bridge: tau must lie in (0, 1/(2N))");
  for (double t : ps.t)
    if (t - tau < 0.0) throw DomainError("mollified_bridge: a window reaches below t = 0");

  const ParamCurve lifted = ParamCurve::lift(curve);
  std::vector<double> dev(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    // Windows around t_n near 1 may reach past the unit interval, so they are
    // integrated as raw segments.
    std::vector<Segment> windows(ps.N());
    for (std::size_t n = 0; n < ps.N(); ++n) {
      windows[n].lo = ps.t[n] - tau;
      windows[n].hi = ps.t[n] + tau;
      windows[n].coefficient = ps.a[n] / (2.0 * tau);
    }
    GridSpec one;
    one.center = points[k];
    Complex e = 0.0;
    evaluate_segments(
        lifted, windows, one, [&](std::size_t, Eigen::Index, std::span<const Complex> v) { e += v[0]; },
        options);
    dev[k] = std::abs(e - expsum_eval(lifted, ps.t, ps.a, points[k]));
  });

  double slope = 0.0, xmax = 0.0, asum = 0.0;
  constexpr int kSamples = 64;
  for (std::size_t n = 0; n < ps.N(); ++n) {
    for (int s = 0; s <= kSamples; ++s) {
      const double t = ps.t[n] - tau + 2.0 * tau * s / kSamples;
      slope = std::max(slope, std::abs(curve.derivative(1, t)));
    }
    asum += std::abs(ps.a[n]);
  }
  for (const Vec2& x : points) xmax = std::max(xmax, x.norm());

  BridgeResult out;
  out.max_deviation = dev.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
  out.bound = 2.0 * std::numbers::pi * (1.0 + slope) * tau * xmax * asum;
  out.within_bound = out.max_deviation <= out.bound * (1.0 + 1e-9) + 1e-12;
  return out;
}

}  // namespace declab
