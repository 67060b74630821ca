#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/curve.hpp"
#include "declab/norms.hpp"
#include "declab/oscillatory.hpp"

namespace declab {

/// Points t_n with (n-1)/N < t_n <= n/N and coefficients a_n, n = 1..N.
struct PointSystem {
  std::vector<double> t;
  std::vector<Complex> a;

  std::size_t N() const { return t.size(); }
  double l2() const;  ///< (sum |a_n|^2)^(1/2)
  void validate() const;

  /// t_n = n/N.
  static PointSystem lattice(std::size_t N, Complex a = 1.0);
  /// t_n uniform in ((n-1)/N, n/N].
  static PointSystem random(std::size_t N, std::uint64_t seed, Complex a = 1.0);
  /// t_n = n/N - u_n/N^2 with u_n uniform in [0, 1).
  static PointSystem perturbed(std::size_t N, std::uint64_t seed, Complex a = 1.0);
  /// Preset by name: lattice, random or perturbed.
  static PointSystem preset(const std::string& kind, std::size_t N, std::uint64_t seed);
};

struct L6Options {
  GridOptions grid;
  double weight_exponent = 200.0;
  std::optional<double> r;  ///< overrides the curve's exponent r
};

struct L6Result {
  std::size_t N = 0;
  double R = 0.0;
  double r = 0.0;
  double average = 0.0;  ///< (sum |S|^6 w / sum w)^(1/6), w = omega_B(x/R)
  double l2 = 0.0;
  double ratio = 0.0;    ///< average / l2
  bool precondition_met = false;  ///< R >= N^r
  Eigen::Index nx = 0, ny = 0;
};

/// Sixth-power average of sum_n a_n e(x . gamma(t_n)) over B_R. The average is
/// normalized by the weight mass, which matches 1/R^2 up to a constant.
L6Result l6_average(const GraphCurve& curve, const PointSystem& ps, double R,
                    const L6Options& options = {});

enum class CountMethod { Auto, BruteForce, MeetInTheMiddle };

/// Number of (n1..n6) in {1..N}^6 with equal sums and equal sums of squares
/// of (n1, n2, n3) and (n4, n5, n6). Brute force allows N <= 64, meet in the
/// middle N <= 512.
std::uint64_t vinogradov_count(int N, CountMethod method = CountMethod::Auto);

/// Trapezoid rule for the integral over [0,1]^2 of |sum_{n<=N} e(n x1 + n^2 x2)|^6
/// on an m1 x m2 grid; m1 >= 8N and m2 >= 8N^2 (0 selects those minima).
double torus_l6_integral(int N, long m1 = 0, long m2 = 0);

struct BridgeResult {
  double max_deviation = 0.0;
  double bound = 0.0;  ///< 2 pi (1 + max |phi'|) tau max|x| sum |a_n|
  bool within_bound = false;
};

/// Largest |E_{[0,1]} g_tau(x) - sum a_n e(x . gamma(t_n))| over the points,
/// with g_tau = (1/2tau) sum a_n 1_[t_n - tau, t_n + tau].
BridgeResult mollified_bridge(const GraphCurve& curve, const PointSystem& ps, double tau,
                              const std::vector<Vec2>& points,
                              const QuadratureOptions& options = {});

}  // namespace declab
