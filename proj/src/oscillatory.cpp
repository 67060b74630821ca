#include "declab/oscillatory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <unsupported/Eigen/FFT>
#include <numbers>

#include "declab/errors.hpp"
#include "declab/parallel.hpp"
#include "declab/quadrature.hpp"

namespace declab {

static_assert(std::endian::native == std::endian::little, "field IO assumes little-endian");

Complex unit_phase(double z) {
  const double f = z - std::nearbyint(z);
  const double angle = 2.0 * std::numbers::pi * f;
  return {std::cos(angle), std::sin(angle)};
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction TestFunction::piecewise(Partition partition, std::vector<Complex> coefficients) {
  if (coefficients.size() != partition.size())
    throw DomainError("piecewise test function: one coefficient per cell required");
  TestFunction g;
  g.l1_ = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!std::isfinite(coefficients[i].real()) || !std::isfinite(coefficients[i].imag()))
      throw DomainError("piecewise test function: non-finite coefficient");
    g.l1_ += std::abs(coefficients[i]) * partition.cells[i].length();
  }
  g.partition_ = std::move(partition);
  g.coeffs_ = std::move(coefficients);
  return g;
}

TestFunction TestFunction::constant(Complex c, Interval support) {
  Partition p;
  p.parent = Interval(0.0, 1.0);
  p.width = 1.0;
  std::vector<Complex> coeffs;
  if (support.lo > 0.0) {
    p.cells.emplace_back(0.0, support.lo, false);
    coeffs.push_back(0.0);
  }
  p.cells.emplace_back(support.lo, support.hi, support.hi == 1.0);
  coeffs.push_back(c);
  if (support.hi < 1.0) {
    p.cells.emplace_back(support.hi, 1.0, true);
    coeffs.push_back(0.0);
  }
  for (const auto& cell : p.cells) p.width = std::max(p.width, cell.length());
  return piecewise(std::move(p), std::move(coeffs));
}

TestFunction TestFunction::callable(Fn f, int panels) {
  if (panels < 1) throw DomainError("callable test function: panels must be positive");
  TestFunction g;
  g.fn_ = std::move(f);
  g.panels_ = panels;
  const NodeSet nodes = composite_gauss(0.0, 1.0, panels);
  double l1 = 0.0;
  for (std::size_t q = 0; q < nodes.t.size(); ++q) l1 += nodes.w[q] * std::abs(g.fn_(nodes.t[q]));
  if (!std::isfinite(l1)) throw DomainError("callable test function is not integrable");
  g.l1_ = l1;
  return g;
}

Complex TestFunction::operator()(double t) const {
  if (fn_) return fn_(t);
  const std::size_t i = partition_.locate(t);
  return i < coeffs_.size() ? coeffs_[i] : Complex(0.0);
}

std::vector<Segment> segments_of(const TestFunction& g, const Interval& delta) {
  std::vector<Segment> out;
  if (!g.is_piecewise()) {
    Segment s;
    s.lo = delta.lo;
    s.hi = delta.hi;
    s.g = &g;
    s.min_panels = std::max(1, static_cast<int>(std::ceil(g.panels() * delta.length())));
    out.push_back(s);
    return out;
  }
  const auto& cells = g.partition().cells;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Complex c = g.coefficients()[i];
    if (c == Complex(0.0)) continue;
    const double lo = std::max(cells[i].lo, delta.lo);
    const double hi = std::min(cells[i].hi, delta.hi);
    if (hi <= lo) continue;
    Segment s;
    s.lo = lo;
    s.hi = hi;
    s.coefficient = c;
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature plumbing

namespace {

double max_abs_derivative(const SmoothFunction& f, double lo, double hi, int samples) {
  double m = 0.0;
  const auto probe = [&](double t) {
    try {
      m = std::max(m, std::abs(f.derivative(1, t)));
    } catch (const SingularityError&) {
    }
  };
  probe(lo);
  probe(hi);
  for (int k = 0; k < samples; ++k) probe(lo + (hi - lo) * (k + 0.5) / samples);
  return m;
}

struct SegmentBounds {
  double m1 = 0.0;
  double m2 = 0.0;
};

SegmentBounds segment_bounds(const ParamCurve& curve, const Segment& s,
                             const QuadratureOptions& options) {
  return {options.derivative_safety *
              max_abs_derivative(curve.phi1(), s.lo, s.hi, options.derivative_samples),
          options.derivative_safety *
              max_abs_derivative(curve.phi2(), s.lo, s.hi, options.derivative_samples)};
}

// Rounds a panel count up to one of four values per octave, so that only a
// few node tables are needed per segment.
int quantize_panels(double n) {
  if (!(n < 1e9)) throw ResolutionError("oscillation rule requires an unbounded number of panels");
  const auto k = static_cast<long>(std::ceil(n));
  if (k <= 8) return static_cast<int>(std::max(1L, k));
  const int octave = std::bit_width(static_cast<unsigned long>(k)) - 1;
  const long step = 1L << (octave - 2);
  return static_cast<int>((k + step - 1) / step * step);
}

int panels_for(const Segment& s, const SegmentBounds& b, double x1, double x2,
               const QuadratureOptions& options) {
  const double raw = 1.0 + (s.hi - s.lo) * (std::abs(x1) * b.m1 + std::abs(x2) * b.m2);
  const int n = std::max(quantize_panels(raw), s.min_panels) * std::max(1, options.refinement);
  if (static_cast<long>(n) * kPanelNodes > options.nq_max)
    throw ResolutionError("quadrature needs " + std::to_string(static_cast<long>(n) * kPanelNodes) +
                          " nodes, budget is " + std::to_string(options.nq_max));
  return n;
}

// Structure-of-arrays node table padded to a multiple of 8.
struct NodeTable {
  std::vector<double> p1, p2, wr, wi;

  std::size_t size() const { return p1.size(); }
  void pad() {
    while (p1.size() % 8 != 0) {
      p1.push_back(0.0);
      p2.push_back(0.0);
      wr.push_back(0.0);
      wi.push_back(0.0);
    }
  }
};

NodeTable build_table(const ParamCurve& curve, const Segment& s, int panels) {
  const NodeSet nodes = composite_gauss(s.lo, s.hi, panels);
  NodeTable table;
  const std::size_t n = nodes.t.size();
  table.p1.resize(n);
  table.p2.resize(n);
  table.wr.resize(n);
  table.wi.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double t = nodes.t[q];
    table.p1[q] = curve.phi1()(t);
    table.p2[q] = curve.phi2()(t);
    const Complex w = nodes.w[q] * (s.g ? (*s.g)(t) : s.coefficient);
    table.wr[q] = w.real();
    table.wi[q] = w.imag();
  }
  table.pad();
  return table;
}

constexpr Eigen::Index kReseedInterval = 64;

// out[i] += sum_q w_q e(p1_q (x0 + i hx) + p2_q x2) for i < nx, using a phasor
// recurrence along the row that is reseeded every kReseedInterval steps.
void accumulate_row(const NodeTable& table, double x0, double hx, Eigen::Index nx, double x2,
                    Complex* out) {
  const std::size_t m = table.size();
  std::vector<double> ar(m), ai(m), sr(m), si(m);
  for (std::size_t q = 0; q < m; ++q) {
    const Complex s = unit_phase(table.p1[q] * hx);
    sr[q] = s.real();
    si[q] = s.imag();
  }
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (i % kReseedInterval == 0) {
      const double x1 = x0 + static_cast<double>(i) * hx;
      for (std::size_t q = 0; q < m; ++q) {
        const Complex a = Complex(table.wr[q], table.wi[q]) * unit_phase(table.p1[q] * x1 + table.p2[q] * x2);
        ar[q] = a.real();
        ai[q] = a.imag();
      }
    }
    double lr[8] = {}, li[8] = {};
    for (std::size_t q = 0; q < m; q += 8) {
      for (std::size_t k = 0; k < 8; ++k) {
        const double r = ar[q + k], im = ai[q + k];
        lr[k] += r;
        li[k] += im;
        ar[q + k] = r * sr[q + k] - im * si[q + k];
        ai[q + k] = r * si[q + k] + im * sr[q + k];
      }
    }
    const double re = ((lr[0] + lr[1]) + (lr[2] + lr[3])) + ((lr[4] + lr[5]) + (lr[6] + lr[7]));
    const double im = ((li[0] + li[1]) + (li[2] + li[3])) + ((li[4] + li[5]) + (li[6] + li[7]));
    out[i] += Complex(re, im);
  }
}

// Smallest 2^a 3^b 5^c that is >= n.
std::size_t smooth_size(std::size_t n) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t p5 = 1; p5 < 2 * n; p5 *= 5)
    for (std::size_t p3 = p5; p3 < 2 * n; p3 *= 3) {
      std::size_t v = p3;
      while (v < n) v *= 2;
      best = std::min(best, v);
    }
  return best;
}

// Type-1 nonuniform FFT by Gaussian gridding:
// out[j] = sum_q c_q exp(i (j - shift) x_q) for j < count, with x_q in [0, 2 pi).
class GaussianNufft {
 public:
  static constexpr int kSpread = 12;

  GaussianNufft(Eigen::Index count, Eigen::Index shift) : count_(count), shift_(shift) {
    const auto half = static_cast<std::size_t>(std::max(shift, count - 1 - shift)) + 1;
    const std::size_t m = 2 * half;
    size_ = smooth_size(2 * m);
    tau_ = std::numbers::pi * kSpread / (3.0 * static_cast<double>(m) * static_cast<double>(m));
    spacing_ = 2.0 * std::numbers::pi / static_cast<double>(size_);
    for (int l = -kSpread + 1; l <= kSpread; ++l)
      e3_.push_back(std::exp(-(l * spacing_) * (l * spacing_) / (4.0 * tau_)));
    deconv_.resize(static_cast<std::size_t>(count));
    for (Eigen::Index j = 0; j < count; ++j) {
      const double k = static_cast<double>(j - shift);
      deconv_[static_cast<std::size_t>(j)] = std::sqrt(std::numbers::pi / tau_) * std::exp(k * k * tau_);
    }
    grid_.resize(size_);
    spectrum_.resize(size_);
  }

  void reset() { std::fill(grid_.begin(), grid_.end(), Complex(0.0)); }

  void spread(double x, Complex c) {
    const auto n = static_cast<long>(size_);
    long m0 = static_cast<long>(std::floor(x / spacing_));
    const double d = x - static_cast<double>(m0) * spacing_;
    const double e1 = std::exp(-d * d / (4.0 * tau_));
    const double e2 = std::exp(d * spacing_ / (2.0 * tau_));
    double power = std::pow(e2, -kSpread + 1);
    long m = ((m0 - kSpread + 1) % n + n) % n;
    for (int l = 0; l < 2 * kSpread; ++l) {
      grid_[static_cast<std::size_t>(m)] += c * (e1 * power * e3_[static_cast<std::size_t>(l)]);
      power *= e2;
      if (++m == n) m = 0;
    }
  }

  void finish(Complex* out) {
    fft_.inv(spectrum_, grid_);
    const auto n = static_cast<Eigen::Index>(size_);
    for (Eigen::Index j = 0; j < count_; ++j) {
      const Eigen::Index k = ((j - shift_) % n + n) % n;
      out[j] = spectrum_[static_cast<std::size_t>(k)] * deconv_[static_cast<std::size_t>(j)];
    }
  }

 private:
  Eigen::Index count_;
  Eigen::Index shift_;
  std::size_t size_ = 0;
  double tau_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> e3_;
  std::vector<double> deconv_;
  std::vector<Complex> grid_;
  std::vector<Complex> spectrum_;
  Eigen::FFT<double> fft_;
};

long evaluate_segments_by_column(const ParamCurve& curve, const std::vector<Segment>& segments,
                                 const GridSpec& grid, const RowSink& sink,
                                 const QuadratureOptions& options) {
  const double x1_max = std::max(std::abs(grid.x(0)), std::abs(grid.x(grid.nx - 1)));
  const double x2_max = std::max(std::abs(grid.y(0)), std::abs(grid.y(grid.ny - 1)));
  const Eigen::Index shift = (grid.ny - 1) / 2;
  const double yc = grid.y(shift);
  const auto nx = static_cast<std::size_t>(grid.nx);
  const auto ny = static_cast<std::size_t>(grid.ny);
  long max_nodes = 0;
  std::vector<Complex> buffer(nx * ny);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const int panels = panels_for(segments[s], segment_bounds(curve, segments[s], options), x1_max,
                                  x2_max, options);
    max_nodes = std::max(max_nodes, static_cast<long>(panels) * kPanelNodes);
    const NodeTable table = build_table(curve, segments[s], panels);
    std::vector<double> x(table.size());
    for (std::size_t q = 0; q < table.size(); ++q) {
      const double turns = table.p2[q] * grid.hy;
      x[q] = 2.0 * std::numbers::pi * (turns - std::floor(turns));
    }
    parallel_for(nx, [&](std::size_t i) {
      thread_local std::unique_ptr<GaussianNufft> nufft;
      thread_local std::pair<Eigen::Index, Eigen::Index> shape{-1, -1};
      if (shape != std::pair{grid.ny, shift}) {
        nufft = std::make_unique<GaussianNufft>(grid.ny, shift);
        shape = {grid.ny, shift};
      }
      nufft->reset();
      const double x1 = grid.x(static_cast<Eigen::Index>(i));
      for (std::size_t q = 0; q < table.size(); ++q) {
        const Complex w(table.wr[q], table.wi[q]);
        if (w == Complex(0.0)) continue;
        nufft->spread(x[q], w * unit_phase(table.p1[q] * x1 + table.p2[q] * yc));
      }
      nufft->finish(buffer.data() + i * ny);
    });
    parallel_for(ny, [&](std::size_t j) {
      std::vector<Complex> row(nx);
      for (std::size_t i = 0; i < nx; ++i) row[i] = buffer[i * ny + j];
      sink(s, static_cast<Eigen::Index>(j), row);
    });
  }
  return max_nodes;
}

}  // namespace

int oscillation_panels(const ParamCurve& curve, double lo, double hi, double x1, double x2,
                       const QuadratureOptions& options) {
  Segment s;
  s.lo = lo;
  s.hi = hi;
  return panels_for(s, segment_bounds(curve, s, options), x1, x2, options);
}

long evaluate_segments(const ParamCurve& curve, const std::vector<Segment>& segments,
                       const GridSpec& grid, const RowSink& sink,
                       const QuadratureOptions& options) {
  if (options.fast_path && grid.ny >= options.fast_path_min_rows && grid.ny > 1)
    return evaluate_segments_by_column(curve, segments, grid, sink, options);
  const double x1_max = std::max(std::abs(grid.x(0)), std::abs(grid.x(grid.nx - 1)));
  const std::size_t ns = segments.size();
  const auto rows = static_cast<std::size_t>(grid.ny);

  std::vector<SegmentBounds> bounds(ns);
  std::vector<std::map<int, NodeTable>> tables(ns);
  std::vector<std::vector<int>> row_panels(ns, std::vector<int>(rows));
  long max_nodes = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    bounds[s] = segment_bounds(curve, segments[s], options);
    for (std::size_t j = 0; j < rows; ++j) {
      const int n = panels_for(segments[s], bounds[s], x1_max,
                               grid.y(static_cast<Eigen::Index>(j)), options);
      row_panels[s][j] = n;
      if (!tables[s].count(n)) tables[s].emplace(n, build_table(curve, segments[s], n));
      max_nodes = std::max(max_nodes, static_cast<long>(n) * kPanelNodes);
    }
  }

  parallel_for(rows, [&](std::size_t j) {
    std::vector<Complex> buffer(static_cast<std::size_t>(grid.nx));
    const auto jj = static_cast<Eigen::Index>(j);
    for (std::size_t s = 0; s < ns; ++s) {
      std::fill(buffer.begin(), buffer.end(), Complex(0.0));
      accumulate_row(tables[s].at(row_panels[s][j]), grid.x(0), grid.hx, grid.nx, grid.y(jj),
                     buffer.data());
      sink(s, jj, buffer);
    }
  });
  return max_nodes;
}

FieldGrid<double> evaluate_field(const ParamCurve& curve, const Interval& delta,
                                 const TestFunction& g, const WeightRectangle& rect,
                                 const GridSpec& grid, const QuadratureOptions& options) {
  const double bytes = static_cast<double>(grid.size()) * sizeof(Complex);
  if (bytes > options.max_field_bytes)
    throw BudgetError("field grid exceeds the memory budget", bytes, options.max_field_bytes);
  FieldGrid<double> field(rect, grid);
  const std::vector<Segment> segments = segments_of(g, delta);
  evaluate_segments(
      curve, segments, grid,
      [&](std::size_t, Eigen::Index j, std::span<const Complex> row) {
        for (Eigen::Index i = 0; i < grid.nx; ++i) field.values(j, i) += row[static_cast<std::size_t>(i)];
      },
      options);
  return field;
}

FieldGrid<double> evaluate_field(const GraphCurve& curve, const Interval& delta,
                                 const TestFunction& g, const WeightRectangle& rect,
                                 const GridSpec& grid, const QuadratureOptions& options) {
  return evaluate_field(ParamCurve::lift(curve), delta, g, rect, grid, options);
}

Complex extension_eval(const ParamCurve& curve, const Interval& delta, const TestFunction& g,
                       const Vec2& x, const QuadratureOptions& options) {
  GridSpec grid;
  grid.center = x;
  return evaluate_field(curve, delta, g, WeightRectangle::generic(x, 1.0, 1.0), grid, options)
      .values(0, 0);
}

Complex extension_eval(const GraphCurve& curve, const Interval& delta, const TestFunction& g,
                       const Vec2& x, const QuadratureOptions& options) {
  return extension_eval(ParamCurve::lift(curve), delta, g, x, options);
}

// ---------------------------------------------------------------------------
// Exponential sums

void check_point_cells(std::span<const double> t) {
  const auto N = static_cast<double>(t.size());
  for (std::size_t n = 1; n <= t.size(); ++n) {
    const double tn = t[n - 1];
    if (!(tn > (static_cast<double>(n) - 1.0) / N && tn <= static_cast<double>(n) / N))
      throw DomainError("point t_" + std::to_string(n) + " = " + std::to_string(tn) +
                        " lies outside ((n-1)/N, n/N]");
  }
}

Complex expsum_eval(const ParamCurve& curve, std::span<const double> t,
                    std::span<const Complex> a, const Vec2& x) {
  if (t.size() != a.size()) throw DomainError("expsum: points and coefficients differ in size");
  check_point_cells(t);
  Complex s = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n)
    s += a[n] * unit_phase(x.x() * curve.phi1()(t[n]) + x.y() * curve.phi2()(t[n]));
  return s;
}

FieldGrid<double> evaluate_expsum_field(const ParamCurve& curve, std::span<const double> t,
                                        std::span<const Complex> a, const WeightRectangle& rect,
                                        const GridSpec& grid) {
  if (t.size() != a.size()) throw DomainError("expsum: points and coefficients differ in size");
  check_point_cells(t);
  NodeTable table;
  for (std::size_t n = 0; n < t.size(); ++n) {
    table.p1.push_back(curve.phi1()(t[n]));
    table.p2.push_back(curve.phi2()(t[n]));
    table.wr.push_back(a[n].real());
    table.wi.push_back(a[n].imag());
  }
  table.pad();
  FieldGrid<double> field(rect, grid);
  parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    accumulate_row(table, grid.x(0), grid.hx, grid.nx, grid.y(jj), &field.values(jj, 0));
  });
  return field;
}

// ---------------------------------------------------------------------------
// IO

namespace {

constexpr char kMagic[4] = {'D', 'L', 'F', 'G'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DomainError("field file is truncated");
  return v;
}

void commit(const std::string& tmp, const std::string& path) {
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot move " + tmp + " to " + path);
  }
}

}  // namespace

void write_field_binary(const std::string& path, const FieldGrid<double>& field) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot open " + tmp);
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kFormatVersion);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(field.nx()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(field.ny()));
    for (double v : {field.grid.center.x(), field.grid.center.y(), field.rect.a, field.rect.b,
                     field.rect.weight_exponent, field.hx(), field.hy()})
      put<double>(os, v);
    for (Eigen::Index j = 0; j < field.ny(); ++j)
      for (Eigen::Index i = 0; i < field.nx(); ++i) {
        put<double>(os, field.values(j, i).real());
        put<double>(os, field.values(j, i).imag());
      }
    if (!os) throw Error("write failed for " + tmp);
  }
  commit(tmp, path);
}

FieldGrid<double> read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic)) throw DomainError("not a field file: " + path);
  if (get<std::uint32_t>(is) != kFormatVersion) throw DomainError("unsupported field file version");
  GridSpec g;
  g.nx = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  g.ny = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  const double cx = get<double>(is), cy = get<double>(is);
  const double a = get<double>(is), b = get<double>(is), s = get<double>(is);
  g.hx = get<double>(is);
  g.hy = get<double>(is);
  g.center = Vec2(cx, cy);
  FieldGrid<double> field(WeightRectangle::generic(g.center, a, b, s), g);
  for (Eigen::Index j = 0; j < g.ny; ++j)
    for (Eigen::Index i = 0; i < g.nx; ++i) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      field.values(j, i) = Complex(re, im);
    }
  return field;
}

void write_field_csv(const std::string& path, const FieldGrid<double>& field) {
  const std::string tmp = path + ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) throw Error("cannot open " + tmp);
    std::fputs("x,y,re,im\n", f);
    for (Eigen::Index j = 0; j < field.ny(); ++j)
      for (Eigen::Index i = 0; i < field.nx(); ++i) {
        const Complex v = field.values(j, i);
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", field.grid.x(i), field.grid.y(j), v.real(),
                     v.imag());
      }
    if (std::fclose(f) != 0) throw Error("write failed for " + tmp);
  }
  commit(tmp, path);
}

}  // namespace declab
