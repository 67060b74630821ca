#pragma once

#include <optional>
#include <vector>

#include "declab/curve.hpp"

namespace declab {

/// How the block [a, 2a] is flattened to unit curvature scale.
enum class Normalization {
  Automatic,  ///< Model when the curve carries a model exponent, else Curvature.
  Curvature,  ///< height 2 phi(t) / phi''_a
  Model,      ///< height a^(1-nu) t^(1+nu)
};

/// The block curve gamma_a(t) = (t, scale * phi(t)) on [a, 2a].
struct NormalizedCurve {
  GraphCurve parent;
  double a = 0.0;
  double phi2_min = 0.0;  ///< phi''_a = min of phi'' over [a, 2a]
  Normalization kind = Normalization::Curvature;
  double scale = 1.0;  ///< 2 / phi''_a or a^(1-nu)

  double height(double t) const { return scale * parent.phi(t); }
  double height_derivative(int k, double t) const { return scale * parent.derivative(k, t); }
  /// Factor c with E_Delta g(x1, x2) = E_{Delta,gamma_a} g(x1, c * x2).
  double x2_factor() const { return 1.0 / scale; }
  /// min over [a, 2a] of the normalized second derivative.
  double normalized_curvature_min() const { return scale * phi2_min; }
  /// gamma_a as a stand-alone graph curve.
  GraphCurve as_graph() const;
};

/// Second-order Taylor model rho(t) = c0 + c1 (t - t0) + c2 (t - t0)^2.
struct OsculatingParabola {
  double t0 = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;

  double operator()(double t) const {
    const double d = t - t0;
    return c0 + d * (c1 + d * c2);
  }
};

/// phi''_a: grid minimum over [a, 2a] refined by golden-section search.
double min_second_derivative(const GraphCurve& curve, double a, int grid_points = 512);

NormalizedCurve normalize(const GraphCurve& curve, double a,
                          Normalization kind = Normalization::Automatic);

OsculatingParabola osculating_parabola(const NormalizedCurve& nc, double t0);

/// Vertical distance between gamma_a and rho_{a,t0} at t0 + dt.
double taylor_gap(const NormalizedCurve& nc, double t0, double dt);

/// Largest s <= 2a - t0 with taylor_gap < delta on (0, s): forward scan to the
/// first crossing, then bisection.
double delta_t_max(const NormalizedCurve& nc, double t0, double delta);

struct TmaxCheck {
  double tmax = 0.0;
  double bound = 0.0;   ///< delta^(1/2 - eps beta / 4)
  double margin = 0.0;  ///< tmax / bound: the empirical constant
  bool reached_block_end = false;
  bool precondition_met = false;  ///< a >= delta^(1/2 - eps)
  bool passed = false;
};

/// Margin of Delta t_max against delta^(1/2 - eps beta / 4) without checking
/// the standing assumption on a; the result records whether it holds.
TmaxCheck tmax_margin(const NormalizedCurve& nc, double t0, double delta, double epsilon,
                      double beta);

/// As tmax_margin, but a < delta^(1/2 - eps) is a DomainError.
TmaxCheck verify_tmax_bound(const NormalizedCurve& nc, double t0, double delta, double epsilon,
                            double beta);

struct IterationSchedule {
  int k = 0;
  double log_log_bound = 0.0;
  bool within_bound = true;
};

/// Smallest k with delta^((1 - eps beta / 2)^k) >= min(a^2, 1/e).
IterationSchedule iteration_schedule(double delta, double epsilon, double beta, double a);

/// beta(eps) = min(alpha, eps).
inline double default_beta(double alpha, double epsilon) { return alpha < epsilon ? alpha : epsilon; }

bool neighborhood_contains(const NormalizedCurve& nc, double delta, const Vec2& point);

/// One row of the Delta t_max scan over (nu, a, delta).
struct RescaleRow {
  double nu = 0.0, a = 0.0, delta = 0.0, epsilon = 0.0, beta = 0.0;
  double tmax = 0.0, bound = 0.0, margin = 0.0;
  bool precondition_met = false;
  bool passed = false;
  int iterations = 0;            ///< iteration_schedule k
  bool schedule_within = false;  ///< k within its log log bound
};

/// Model curves, a = delta^a_exponent, t0 = a, curvature normalization.
std::vector<RescaleRow> rescale_scan(const std::vector<double>& nus,
                                     const std::vector<double>& deltas, double epsilon,
                                     double alpha, double a_exponent,
                                     std::optional<double> beta = {});

}  // namespace declab
