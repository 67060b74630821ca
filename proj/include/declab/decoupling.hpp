#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "declab/curve.hpp"
#include "declab/fit.hpp"
#include "declab/norms.hpp"
#include "declab/oscillatory.hpp"
#include "declab/partition.hpp"

namespace declab {

struct DecouplingSettings {
  GridOptions grid;
  QuadratureOptions quadrature;
  double weight_exponent = 200.0;
  /// Overrides the exponent r of R_{delta,r}; otherwise it comes from the curve.
  std::optional<double> r;
  /// Hoelder exponent used when r comes from curve analysis.
  double alpha = 1.0;
};

/// r = max{1 + nu, 2} for model curves, else from analyze_curve.
double curve_exponent_r(const GraphCurve& curve, double alpha = 1.0);

/// (sup |phi1|, sup |phi2|) over [0, 1], sampled.
Vec2 frequency_extent(const ParamCurve& curve);

/// Per-cell fields E_Delta g_Delta of one partition on a shared grid.
/// fields(k, i) is cell i at grid point k (grid points row-major); each cell
/// is a contiguous column.
struct CellBasis {
  using Fields = Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic>;

  Partition partition;
  WeightRectangle rect;
  GridSpec grid;
  Fields fields;
  std::vector<double> weights;  ///< omega_R hx hy per grid point
  long max_nodes = 0;

  std::size_t cells() const { return partition.size(); }
  Eigen::Index points() const { return grid.size(); }
};

/// With g == nullptr the cells carry the unit function, otherwise g restricted
/// to each cell. Throws BudgetError when the basis exceeds max_field_bytes.
CellBasis build_cell_basis(const ParamCurve& curve, const Partition& partition,
                           const WeightRectangle& rect, const DecouplingSettings& settings,
                           const TestFunction* g = nullptr);

/// Unit-coefficient basis of P_{delta^(1/2)}([0,1]) on R_{delta,r}.
CellBasis unit_cell_basis(const GraphCurve& curve, double delta,
                          const DecouplingSettings& settings = {});

struct DecouplingReport {
  std::string curve_id;
  std::optional<double> nu;
  double delta = 0.0;
  double p = 0.0;
  double r = 0.0;
  WeightRectangle rect;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::size_t cell_count = 0;
  Eigen::Index nx = 0, ny = 0;
  long nq = 0;
  std::string strategy = "given";
  std::uint64_t seed = 0;
};

/// LHS = |sum_i c_i F_i|_p and RHS = (sum_i |c_i|^2 |F_i|_p^2)^(1/2).
DecouplingReport decoupling_ratio(const CellBasis& basis, const std::vector<Complex>& coefficients,
                                  double p);

/// Both sides of the decoupling inequality over P_{delta^(1/2)}([0,1]); R
/// defaults to R_{delta,r}.
DecouplingReport decoupling_ratio(const GraphCurve& curve, const TestFunction& g, double delta,
                                  double p, std::optional<WeightRectangle> R = {},
                                  const DecouplingSettings& settings = {});

enum class Strategy { Constant, SingleCell, RandomPhase, RandomSign, CoordinateAscent };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);
std::vector<Strategy> all_strategies();

struct SearchOptions {
  std::vector<Strategy> strategies = all_strategies();
  long budget = 2000;       ///< total ratio evaluations
  int random_trials = 16;   ///< per random strategy
  std::uint64_t seed = 1;
};

struct ConstantEstimate {
  double delta = 0.0;
  double p = 0.0;
  double K_hat = 0.0;
  long trials = 0;
  std::string best_strategy;
  long best_trial = 0;
  std::vector<Complex> best_coefficients;
  double best_lhs = 0.0, best_rhs = 0.0;
  std::map<std::string, double> per_strategy;
  std::uint64_t seed = 0;
  std::size_t cells = 0;
};

/// Maximizes the ratio over piecewise-constant g. Strategies run in the fixed
/// order constant, single_cell, random_phase, random_sign, coordinate_ascent,
/// each random strategy with its own stream derived from the seed; the ascent
/// starts from the constant vector and uses what is left of the budget.
ConstantEstimate estimate_constant(const CellBasis& basis, double p, const SearchOptions& options);

ConstantEstimate estimate_constant(const GraphCurve& curve, double delta, double p,
                                   const SearchOptions& options,
                                   const DecouplingSettings& settings = {});

/// Slope of log K against log(1 / delta).
LineFit fit_exponent(const std::vector<double>& deltas, const std::vector<double>& K);

struct ScanRow {
  ConstantEstimate estimate;
  Eigen::Index nx = 0, ny = 0;
  long nq = 0;
  double r = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  LineFit fit;
};

/// estimate_constant over at least four deltas, then fit_exponent.
ScanResult exponent_scan(const GraphCurve& curve, const std::vector<double>& deltas, double p,
                         const SearchOptions& options, const DecouplingSettings& settings = {});

struct BlockReport {
  Interval block;
  bool head = false;
  double phi2_min = 0.0;  ///< 0 for the head interval
  WeightRectangle rect;
  std::size_t cells = 0;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  bool within_block_bound = false;  ///< ratio <= sqrt(cells) (1 + 1e-6)
};

struct BlockDecoupling {
  std::vector<BlockReport> blocks;  ///< head first, then dyadic blocks
  /// (sum_b lhs_b^2)^(1/2) / (sum_b rhs_b^2)^(1/2) over blocks where g lives.
  double combined_ratio = 0.0;
  DecouplingReport global;  ///< the [0,1] ratio on R_{delta,r}
  std::size_t max_block = 0;
  bool all_within_global_bound = false;
};

/// Per-block ratios on [a, 2a] against R_{delta, phi''_a} (delta^-1 x
/// delta^-1 / phi''_a), the head (0, delta^(1/2-eps)] against R_{delta,r}.
BlockDecoupling block_decoupled_ratio(const GraphCurve& curve, const TestFunction& g, double delta,
                                      double epsilon, double p,
                                      const DecouplingSettings& settings = {});

inline constexpr double kNumericalTolerance = 1e-6;

}  // namespace declab
