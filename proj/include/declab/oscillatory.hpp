#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "declab/curve.hpp"
#include "declab/field.hpp"
#include "declab/partition.hpp"

namespace declab {

using Complex = std::complex<double>;

/// e(z) = exp(2 pi i z), with the argument reduced mod 1 first.
Complex unit_phase(double z);

/// Integrable g on [0, 1]: piecewise constant on a partition, or a callable.
class TestFunction {
 public:
  using Fn = std::function<Complex(double)>;

  TestFunction() = default;
  static TestFunction piecewise(Partition partition, std::vector<Complex> coefficients);
  /// g = c on `support`, zero elsewhere.
  static TestFunction constant(Complex c = 1.0, Interval support = Interval(0.0, 1.0));
  /// Smooth g; `panels` sets the resolution used for its own variation and
  /// for the L1 norm.
  static TestFunction callable(Fn f, int panels = 64);

  Complex operator()(double t) const;
  bool is_piecewise() const { return !fn_; }
  const Partition& partition() const { return partition_; }
  const std::vector<Complex>& coefficients() const { return coeffs_; }
  int panels() const { return panels_; }
  double l1_norm() const { return l1_; }

 private:
  Partition partition_;
  std::vector<Complex> coeffs_;
  Fn fn_;
  int panels_ = 1;
  double l1_ = 0.0;
};

struct QuadratureOptions {
  long nq_max = 1L << 20;       ///< node budget per interval and evaluation point
  int derivative_samples = 33;  ///< samples for max |phi'| over an interval
  double derivative_safety = 1.1;
  int refinement = 1;           ///< panel multiplier, for convergence checks
  double max_field_bytes = 3.0e9;
  /// Grids with at least this many rows are evaluated column by column with a
  /// nonuniform FFT along x2; the direct row path is the reference.
  bool fast_path = true;
  long fast_path_min_rows = 512;
};

/// A piece of the integral: [lo, hi] with constant coefficient, or with g
/// evaluated at the nodes.
struct Segment {
  double lo = 0.0;
  double hi = 1.0;
  Complex coefficient = 1.0;
  const TestFunction* g = nullptr;  ///< when set, weights are g(t) instead
  int min_panels = 1;
};

/// Splits g restricted to delta into segments (zero coefficients dropped).
std::vector<Segment> segments_of(const TestFunction& g, const Interval& delta);

/// Panel count from the oscillation rule 1 + |I| (|x1| max|phi1'| + |x2| max|phi2'|).
int oscillation_panels(const ParamCurve& curve, double lo, double hi, double x1, double x2,
                       const QuadratureOptions& options = {});

Complex extension_eval(const ParamCurve& curve, const Interval& delta, const TestFunction& g,
                       const Vec2& x, const QuadratureOptions& options = {});
Complex extension_eval(const GraphCurve& curve, const Interval& delta, const TestFunction& g,
                       const Vec2& x, const QuadratureOptions& options = {});

/// Row sink for evaluate_segments: (segment index, row j, values of the row).
using RowSink = std::function<void(std::size_t, Eigen::Index, std::span<const Complex>)>;

/// Evaluates every segment on every grid row and hands the rows to `sink`.
/// Rows run in parallel; each row's values do not depend on the worker count.
/// Returns the largest per-segment node count used.
long evaluate_segments(const ParamCurve& curve, const std::vector<Segment>& segments,
                       const GridSpec& grid, const RowSink& sink,
                       const QuadratureOptions& options = {});

FieldGrid<double> evaluate_field(const ParamCurve& curve, const Interval& delta,
                                 const TestFunction& g, const WeightRectangle& rect,
                                 const GridSpec& grid, const QuadratureOptions& options = {});
FieldGrid<double> evaluate_field(const GraphCurve& curve, const Interval& delta,
                                 const TestFunction& g, const WeightRectangle& rect,
                                 const GridSpec& grid, const QuadratureOptions& options = {});

/// Checks (n-1)/N < t_n <= n/N for every n.
void check_point_cells(std::span<const double> t);

/// sum_n a_n e(x1 phi1(t_n) + x2 phi2(t_n)).
Complex expsum_eval(const ParamCurve& curve, std::span<const double> t,
                    std::span<const Complex> a, const Vec2& x);

/// The exponential sum sampled on a grid (no quadrature involved).
FieldGrid<double> evaluate_expsum_field(const ParamCurve& curve, std::span<const double> t,
                                        std::span<const Complex> a, const WeightRectangle& rect,
                                        const GridSpec& grid);

/// Binary layout, little-endian: "DLFG", u32 version, u64 nx, ny, f64 cx, cy,
/// a, b, s, hx, hy, then ny rows of nx (re, im) f64 pairs.
void write_field_binary(const std::string& path, const FieldGrid<double>& field);
FieldGrid<double> read_field_binary(const std::string& path);
/// Columns x, y, re, im.
void write_field_csv(const std::string& path, const FieldGrid<double>& field);

}  // namespace declab
