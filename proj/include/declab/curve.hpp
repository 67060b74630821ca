#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "declab/expression.hpp"

namespace declab {

using Vec2 = Eigen::Vector2d;

/// Finite-difference step; also the unit of the exclusion band around Z.
inline constexpr double kFiniteDifferenceStep = 0x1p-20;
/// Exclusion band radius around each singular point, in units of the FD step.
inline constexpr double kExclusionBandSteps = 4.0;

/// Real function of one variable with access to derivatives 0..3.
///
/// Derivatives that are not supplied analytically are produced by central
/// differences of the next lower supplied derivative (with one Richardson
/// step), using a step that shrinks near the singular set.
class SmoothFunction {
 public:
  using Fn = std::function<double(double)>;

  SmoothFunction() = default;
  /// derivatives[k] may be empty for k >= 1.
  SmoothFunction(std::array<Fn, 4> derivatives, std::vector<double> singular = {});
  static SmoothFunction from_expression(const Expression& e, std::vector<double> singular = {});

  double operator()(double t) const { return derivative(0, t); }
  double derivative(int k, double t) const;
  bool analytic(int k) const { return static_cast<bool>(d_[static_cast<std::size_t>(k)]); }
  const std::vector<double>& singular_set() const { return singular_; }
  double distance_to_singular_set(double t) const;

 private:
  double finite_difference(int k, double t) const;

  std::array<Fn, 4> d_;
  std::vector<double> singular_;
};

/// Graph curve (t, phi(t)) with finite singular set Z.
class GraphCurve {
 public:
  GraphCurve() = default;
  GraphCurve(SmoothFunction phi, std::string id, std::optional<double> model_exponent = {});

  /// The model curve (t, t^(1+nu)), Z = {0}, exact derivatives.
  static GraphCurve model(double nu);
  static GraphCurve from_expression(const std::string& expr, std::vector<double> singular = {});

  double phi(double t) const { return phi_(t); }
  double derivative(int k, double t) const { return phi_.derivative(k, t); }
  const SmoothFunction& function() const { return phi_; }
  const std::vector<double>& singular_set() const { return phi_.singular_set(); }
  const std::optional<double>& model_exponent() const { return nu_; }
  const std::string& id() const { return id_; }

 private:
  SmoothFunction phi_;
  std::string id_;
  std::optional<double> nu_;
};

/// Parametric curve (phi1(t), phi2(t)).
class ParamCurve {
 public:
  ParamCurve() = default;
  /// Checks regularity |(phi1', phi2')| > 0 on a sample grid of [0, 1] (cell midpoints).
  ParamCurve(SmoothFunction phi1, SmoothFunction phi2, std::string id);

  static ParamCurve lift(const GraphCurve& graph);

  Vec2 point(double t) const { return {phi1_(t), phi2_(t)}; }
  Vec2 derivative(int k, double t) const {
    return {phi1_.derivative(k, t), phi2_.derivative(k, t)};
  }
  const SmoothFunction& phi1() const { return phi1_; }
  const SmoothFunction& phi2() const { return phi2_; }
  double regularity_witness() const { return regularity_; }
  const std::string& id() const { return id_; }

 private:
  SmoothFunction phi1_, phi2_;
  double regularity_ = 0.0;
  std::string id_;
};

/// phi''(t). Throws SingularityError inside the exclusion band of Z.
double second_derivative(const GraphCurve& curve, double t);

enum class Side { Left, Right };

struct OrderFitOptions {
  int j_min = 4;
  int j_max = 18;
  double noise_floor = 1e-9;
  double residual_threshold = 0.1;
};

struct VanishingOrderEstimate {
  double order = 0.0;
  int derivative_order = 2;
  Side side = Side::Right;
  double base_point = 0.0;
  double fit_residual = 0.0;
  std::pair<double, double> t_range{0.0, 0.0};
  int scales_used = 0;
  /// Set when the fit residual exceeds the threshold: the sup and inf
  /// orders probably differ (oscillatory vanishing).
  bool oscillation_suspected = false;
  /// Present for the Hoelder-seminorm order r-bar_{2+alpha}.
  std::optional<double> holder_exponent;
};

/// Slope of log|phi^(k)(z +/- 2^-j)| against log 2^-j, j = j_min..j_max.
VanishingOrderEstimate estimate_vanishing_order(const GraphCurve& curve, double z, Side side,
                                                int derivative_order,
                                                const OrderFitOptions& options = {});

/// sup over sampled pairs of |phi''(x) - phi''(y)| / |x - y|^alpha on [lo, hi].
double holder_seminorm(const GraphCurve& curve, double alpha, double lo, double hi,
                       int grid_points = 256);

/// Order of vanishing of t -> |phi''|_{C^{0,alpha}([z + t, z + 2t])} (right side)
/// or of the mirrored interval (left side).
VanishingOrderEstimate estimate_holder_order(const GraphCurve& curve, double z, Side side,
                                             double alpha, const OrderFitOptions& options = {},
                                             int grid_points = 256);

/// phi1' phi2'' - phi2' phi1''.
double wronskian(const ParamCurve& curve, double t);

/// The graph (s, psi(s)) with s = phi1(t), psi = phi2 o phi1^{-1} on [lo, hi].
/// psi'' is Wronskian / (phi1')^3. Throws NotAGraphError when phi1' vanishes
/// or changes sign on the interval.
GraphCurve reparametrize_to_graph(const ParamCurve& curve, double lo, double hi,
                                  std::vector<double> singular_t = {});

/// Vanishing-order summary of a graph curve over its singular set.
struct CurveAnalysis {
  struct PointReport {
    double z = 0.0;
    Side side = Side::Right;
    VanishingOrderEstimate r2;
    std::optional<VanishingOrderEstimate> r3;
    /// (beta, fitted r-bar_{2+beta}) for beta in {alpha, alpha/2, alpha/4}.
    std::vector<std::pair<double, std::optional<double>>> holder_orders;
    bool hypothesis_order = false;   // r2 in (-1, inf) with sup = inf
    bool hypothesis_holder = false;  // r-bar_{2+beta} >= r2 - beta (finite beta only)
  };
  std::vector<PointReport> points;
  /// max over Z of {r+ + 2, r- + 2, 2}.
  double r = 2.0;
};

CurveAnalysis analyze_curve(const GraphCurve& curve, double alpha = 1.0,
                            const OrderFitOptions& options = {});

}  // namespace declab
