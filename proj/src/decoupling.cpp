#include "declab/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "declab/errors.hpp"
#include "declab/parallel.hpp"
#include "declab/rescale.hpp"

namespace declab {

double curve_exponent_r(const GraphCurve& curve, double alpha) {
  if (curve.model_exponent()) return std::max(1.0 + *curve.model_exponent(), 2.0);
  return analyze_curve(curve, alpha).r;
}

Vec2 frequency_extent(const ParamCurve& curve) {
  constexpr int kSamples = 257;
  Vec2 m = Vec2::Zero();
  for (int k = 0; k < kSamples; ++k) {
    const double t = static_cast<double>(k) / (kSamples - 1);
    try {
      const Vec2 v = curve.point(t);
      m = m.cwiseMax(v.cwiseAbs());
    } catch (const Error&) {
    }
  }
  return m;
}

CellBasis build_cell_basis(const ParamCurve& curve, const Partition& partition,
                           const WeightRectangle& rect, const DecouplingSettings& settings,
                           const TestFunction* g) {
  CellBasis basis;
  basis.partition = partition;
  basis.rect = rect;
  basis.grid = plan_grid(rect, frequency_extent(curve), settings.grid);
  const double points = static_cast<double>(basis.grid.size());
  const double bytes =
      points * (static_cast<double>(partition.size()) * sizeof(std::complex<float>) + sizeof(double));
  if (bytes > settings.quadrature.max_field_bytes)
    throw BudgetError("cell basis exceeds the memory budget", bytes,
                      settings.quadrature.max_field_bytes);

  std::vector<Segment> segments;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (g == nullptr) {
      Segment s;
      s.lo = partition.cells[i].lo;
      s.hi = partition.cells[i].hi;
      segments.push_back(s);
      owner.push_back(i);
    } else {
      for (const Segment& s : segments_of(*g, partition.cells[i])) {
        segments.push_back(s);
        owner.push_back(i);
      }
    }
  }

  basis.fields = CellBasis::Fields::Zero(basis.grid.size(), static_cast<Eigen::Index>(partition.size()));
  const Eigen::Index nx = basis.grid.nx;
  basis.max_nodes = evaluate_segments(
      curve, segments, basis.grid,
      [&](std::size_t s, Eigen::Index j, std::span<const Complex> row) {
        const auto col = static_cast<Eigen::Index>(owner[s]);
        for (Eigen::Index i = 0; i < nx; ++i) {
          auto& slot = basis.fields(j * nx + i, col);
          slot = std::complex<float>(std::complex<double>(slot) + row[static_cast<std::size_t>(i)]);
        }
      },
      settings.quadrature);
  basis.weights = weight_array(basis.grid, rect);
  return basis;
}

namespace {

// Sums of |.|^p against the basis weights, row by row, combined pairwise.
// Complex products are written out: std::complex multiplication goes through
// a slow NaN-aware helper.
class RatioEvaluator {
 public:
  RatioEvaluator(const CellBasis& basis, double p) : b_(basis), p_(p) {
    check_exponent(p);
    const std::size_t cells = b_.cells();
    norm_.resize(cells);
    std::vector<double> rows(static_cast<std::size_t>(b_.grid.ny));
    for (std::size_t i = 0; i < cells; ++i) {
      const std::complex<float>* col = b_.fields.col(static_cast<Eigen::Index>(i)).data();
      parallel_for(rows.size(), [&](std::size_t j) {
        double acc = 0.0;
        for (Eigen::Index k = row_begin(j); k < row_begin(j + 1); ++k) {
          const double re = col[k].real(), im = col[k].imag();
          acc += pow_from_abs2(re * re + im * im, p_) * b_.weights[static_cast<std::size_t>(k)];
        }
        rows[j] = acc;
      });
      norm_[i] = std::pow(pairwise_sum(rows), 1.0 / p_);
    }
  }

  double cell_norm(std::size_t i) const { return norm_[i]; }

  double rhs(const std::vector<Complex>& c) const {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += std::norm(c[i]) * norm_[i] * norm_[i];
    return std::sqrt(s);
  }

  /// Materializes sum_i c_i F_i, cells added in index order.
  std::vector<Complex> combine(const std::vector<Complex>& c) const {
    std::vector<Complex> f(static_cast<std::size_t>(b_.points()), Complex(0.0));
    for (std::size_t i = 0; i < c.size(); ++i) add_column(f, static_cast<Eigen::Index>(i), c[i]);
    return f;
  }

  /// |f + d F_col|_p, with col < 0 meaning d = 0.
  double lhs(const std::vector<Complex>& f, Eigen::Index col = -1, Complex d = 0.0) const {
    double out = 0.0;
    lhs_batch(f, col, &d, 1, &out);
    return out;
  }

  /// out[m] = |f + d[m] F_col|_p for m < count, in a single pass over memory.
  void lhs_batch(const std::vector<Complex>& f, Eigen::Index col, const Complex* d, int count,
                 double* out) const {
    if (count < 1 || count > kMaxBatch) throw DomainError("lhs_batch: bad candidate count");
    if (p_ == 6.0) return lhs_kernel<3>(f, col, d, count, out);
    if (p_ == 4.0) return lhs_kernel<2>(f, col, d, count, out);
    if (p_ == 2.0) return lhs_kernel<1>(f, col, d, count, out);
    return lhs_kernel<0>(f, col, d, count, out);
  }

  void add_column(std::vector<Complex>& f, Eigen::Index col, Complex d) const {
    const std::complex<float>* column = b_.fields.col(col).data();
    const double dr = d.real(), di = d.imag();
    parallel_for(static_cast<std::size_t>(b_.grid.ny), [&](std::size_t j) {
      for (Eigen::Index k = row_begin(j); k < row_begin(j + 1); ++k) {
        const double br = column[k].real(), bi = column[k].imag();
        auto& v = f[static_cast<std::size_t>(k)];
        v = Complex(v.real() + (dr * br - di * bi), v.imag() + (dr * bi + di * br));
      }
    });
  }

 private:
  static constexpr int kMaxBatch = 4;
  static constexpr int kLanes = 4;

  Eigen::Index row_begin(std::size_t j) const { return static_cast<Eigen::Index>(j) * b_.grid.nx; }

  // Half is p/2 for even integer p, 0 for the general power.
  template <int Half>
  double power(double abs2) const {
    if constexpr (Half == 1) return abs2;
    else if constexpr (Half == 2) return abs2 * abs2;
    else if constexpr (Half == 3) return abs2 * abs2 * abs2;
    else return std::pow(abs2, 0.5 * p_);
  }

  template <int Half, int Count, bool HasColumn>
  void rows_kernel(const std::vector<Complex>& f, Eigen::Index col, const Complex* d,
                   double* rows) const {
    const auto ny = static_cast<std::size_t>(b_.grid.ny);
    double dr[Count], di[Count];
    for (int m = 0; m < Count; ++m) {
      dr[m] = HasColumn ? d[m].real() : 0.0;
      di[m] = HasColumn ? d[m].imag() : 0.0;
    }
    const double* fv = reinterpret_cast<const double*>(f.data());
    const float* cv = HasColumn ? reinterpret_cast<const float*>(b_.fields.col(col).data()) : nullptr;
    const double* w = b_.weights.data();
    const auto term = [&](Eigen::Index k, int m) {
      double re = fv[2 * k], im = fv[2 * k + 1];
      if constexpr (HasColumn) {
        const double br = cv[2 * k], bi = cv[2 * k + 1];
        re += dr[m] * br - di[m] * bi;
        im += dr[m] * bi + di[m] * br;
      }
      return power<Half>(re * re + im * im) * w[k];
    };
    parallel_for(ny, [&](std::size_t j) {
      double acc[Count][kLanes] = {};
      const Eigen::Index lo = row_begin(j), hi = row_begin(j + 1);
      Eigen::Index k = lo;
      for (; k + kLanes <= hi; k += kLanes)
        for (int m = 0; m < Count; ++m)
          for (int l = 0; l < kLanes; ++l) acc[m][l] += term(k + l, m);
      for (int l = 0; k < hi; ++k, ++l)
        for (int m = 0; m < Count; ++m) acc[m][l] += term(k, m);
      for (int m = 0; m < Count; ++m)
        rows[static_cast<std::size_t>(m) * ny + j] = (acc[m][0] + acc[m][1]) + (acc[m][2] + acc[m][3]);
    });
  }

  // Each row is summed in kLanes interleaved lanes combined in a fixed order.
  template <int Half>
  void lhs_kernel(const std::vector<Complex>& f, Eigen::Index col, const Complex* d, int count,
                  double* out) const {
    const auto ny = static_cast<std::size_t>(b_.grid.ny);
    std::vector<double> rows(ny * static_cast<std::size_t>(count));
    switch (col < 0 ? 0 : count) {
      case 0: rows_kernel<Half, 1, false>(f, col, d, rows.data()); break;
      case 1: rows_kernel<Half, 1, true>(f, col, d, rows.data()); break;
      case 2: rows_kernel<Half, 2, true>(f, col, d, rows.data()); break;
      case 3: rows_kernel<Half, 3, true>(f, col, d, rows.data()); break;
      default: rows_kernel<Half, 4, true>(f, col, d, rows.data()); break;
    }
    for (int m = 0; m < count; ++m) {
      const std::vector<double> part(rows.begin() + static_cast<long>(m * ny),
                                     rows.begin() + static_cast<long>((m + 1) * ny));
      out[m] = std::pow(pairwise_sum(part), 1.0 / p_);
    }
  }

  const CellBasis& b_;
  double p_;
  std::vector<double> norm_;
};

double safe_ratio(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

}  // namespace

DecouplingReport decoupling_ratio(const CellBasis& basis, const std::vector<Complex>& coefficients,
                                  double p) {
  if (coefficients.size() != basis.cells())
    throw DomainError("decoupling_ratio: one coefficient per cell required");
  const RatioEvaluator ev(basis, p);
  DecouplingReport rep;
  rep.p = p;
  rep.rect = basis.rect;
  rep.delta = basis.rect.delta;
  rep.r = basis.rect.r;
  rep.lhs = ev.lhs(ev.combine(coefficients));
  rep.rhs = ev.rhs(coefficients);
  rep.ratio = safe_ratio(rep.lhs, rep.rhs);
  rep.cell_count = basis.cells();
  rep.nx = basis.grid.nx;
  rep.ny = basis.grid.ny;
  rep.nq = basis.max_nodes;
  return rep;
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
}

Partition unit_partition(double delta) {
  return uniform_partition(Interval(0.0, 1.0), std::sqrt(delta));
}

WeightRectangle default_rectangle(const GraphCurve& curve, double delta,
                                  const DecouplingSettings& settings, double& r) {
  r = settings.r ? *settings.r : curve_exponent_r(curve, settings.alpha);
  return WeightRectangle::delta_r(delta, r, Vec2::Zero(), settings.weight_exponent);
}

void stamp(DecouplingReport& rep, const GraphCurve& curve, double delta, double r) {
  rep.curve_id = curve.id();
  rep.nu = curve.model_exponent();
  rep.delta = delta;
  rep.r = r;
}

}  // namespace

DecouplingReport decoupling_ratio(const GraphCurve& curve, const TestFunction& g, double delta,
                                  double p, std::optional<WeightRectangle> R,
                                  const DecouplingSettings& settings) {
  check_delta(delta);
  check_exponent(p);
  double r = 0.0;
  const WeightRectangle def = default_rectangle(curve, delta, settings, r);
  const Partition cells = unit_partition(delta);
  const CellBasis basis =
      build_cell_basis(ParamCurve::lift(curve), cells, R ? *R : def, settings, &g);
  DecouplingReport rep = decoupling_ratio(basis, std::vector<Complex>(cells.size(), 1.0), p);
  stamp(rep, curve, delta, r);
  return rep;
}

CellBasis unit_cell_basis(const GraphCurve& curve, double delta, const DecouplingSettings& settings) {
  check_delta(delta);
  double r = 0.0;
  const WeightRectangle R = default_rectangle(curve, delta, settings, r);
  return build_cell_basis(ParamCurve::lift(curve), unit_partition(delta), R, settings);
}

// ---------------------------------------------------------------------------
// Extremizer search

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Constant: return "constant";
    case Strategy::SingleCell: return "single_cell";
    case Strategy::RandomPhase: return "random_phase";
    case Strategy::RandomSign: return "random_sign";
    case Strategy::CoordinateAscent: return "coordinate_ascent";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : all_strategies())
    if (name == strategy_name(s)) return s;
  throw ConfigError("unknown strategy '" + name + "'");
}

std::vector<Strategy> all_strategies() {
  return {Strategy::Constant, Strategy::SingleCell, Strategy::RandomPhase, Strategy::RandomSign,
          Strategy::CoordinateAscent};
}

namespace {

// Uniform double in [0, 1) from the top 53 bits, independent of the library's
// distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::mt19937_64 stream(std::uint64_t seed, Strategy s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s) + 1u};
  return std::mt19937_64(seq);
}

}  // namespace

ConstantEstimate estimate_constant(const CellBasis& basis, double p, const SearchOptions& options) {
  if (options.budget <= 0) throw DomainError("estimate_constant: budget must be positive");
  if (options.strategies.empty()) throw DomainError("estimate_constant: no strategies");
  const RatioEvaluator ev(basis, p);
  const std::size_t n = basis.cells();

  ConstantEstimate est;
  est.delta = basis.rect.delta;
  est.p = p;
  est.seed = options.seed;
  est.cells = n;
  const auto enabled = [&](Strategy s) {
    return std::find(options.strategies.begin(), options.strategies.end(), s) !=
           options.strategies.end();
  };
  const auto consider = [&](Strategy s, long trial, const std::vector<Complex>& c, double lhs,
                            double rhs) {
    const double value = safe_ratio(lhs, rhs);
    ++est.trials;
    auto& best = est.per_strategy[strategy_name(s)];
    best = std::max(best, value);
    if (value > est.K_hat) {
      est.K_hat = value;
      est.best_strategy = strategy_name(s);
      est.best_trial = trial;
      est.best_coefficients = c;
      est.best_lhs = lhs;
      est.best_rhs = rhs;
    }
    return value;
  };
  const auto exhausted = [&] { return est.trials >= options.budget; };

  if (enabled(Strategy::Constant) && !exhausted()) {
    const std::vector<Complex> c(n, 1.0);
    consider(Strategy::Constant, 0, c, ev.lhs(ev.combine(c)), ev.rhs(c));
  }
  if (enabled(Strategy::SingleCell)) {
    for (std::size_t i = 0; i < n && !exhausted(); ++i) {
      std::vector<Complex> c(n, 0.0);
      c[i] = 1.0;
      consider(Strategy::SingleCell, static_cast<long>(i), c, ev.lhs(ev.combine(c)), ev.rhs(c));
    }
  }
  for (Strategy s : {Strategy::RandomPhase, Strategy::RandomSign}) {
    if (!enabled(s)) continue;
    std::mt19937_64 rng = stream(options.seed, s);
    for (int k = 0; k < options.random_trials && !exhausted(); ++k) {
      std::vector<Complex> c(n);
      for (auto& v : c)
        v = s == Strategy::RandomPhase ? unit_phase(unit_uniform(rng))
                                       : Complex((rng() >> 63) ? 1.0 : -1.0);
      consider(s, k, c, ev.lhs(ev.combine(c)), ev.rhs(c));
    }
  }
  if (enabled(Strategy::CoordinateAscent) && !exhausted()) {
    std::vector<Complex> c(n, 1.0);
    std::vector<Complex> f = ev.combine(c);
    long trial = 0;
    double current = consider(Strategy::CoordinateAscent, trial++, c, ev.lhs(f), ev.rhs(c));
    double turn = 0.125;  // phase step, in turns
    double factor = 1.5;  // magnitude step
    while (!exhausted() && turn > 1e-9) {
      bool improved = false;
      for (std::size_t i = 0; i < n && !exhausted(); ++i) {
        const Complex candidates[4] = {c[i] * unit_phase(turn), c[i] * unit_phase(-turn),
                                       c[i] * factor, c[i] / factor};
        Complex steps[4];
        for (int m = 0; m < 4; ++m) steps[m] = candidates[m] - c[i];
        const int batch = static_cast<int>(std::min<long>(4, options.budget - est.trials));
        double lhs[4] = {};
        ev.lhs_batch(f, static_cast<Eigen::Index>(i), steps, batch, lhs);
        for (int m = 0; m < batch; ++m) {
          std::vector<Complex> trial_c = c;
          trial_c[i] = candidates[m];
          const Complex d = steps[m];
          const double value =
              consider(Strategy::CoordinateAscent, trial++, trial_c, lhs[m], ev.rhs(trial_c));
          if (value > current) {
            ev.add_column(f, static_cast<Eigen::Index>(i), d);
            c = std::move(trial_c);
            current = value;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        turn *= 0.5;
        factor = std::sqrt(factor);
      }
    }
  }
  return est;
}

ConstantEstimate estimate_constant(const GraphCurve& curve, double delta, double p,
                                   const SearchOptions& options,
                                   const DecouplingSettings& settings) {
  check_delta(delta);
  double r = 0.0;
  const WeightRectangle R = default_rectangle(curve, delta, settings, r);
  const CellBasis basis = build_cell_basis(ParamCurve::lift(curve), unit_partition(delta), R, settings);
  return estimate_constant(basis, p, options);
}

LineFit fit_exponent(const std::vector<double>& deltas, const std::vector<double>& K) {
  if (deltas.size() != K.size() || deltas.size() < 2)
    throw DomainError("fit_exponent: need matching lists of at least two values");
  Eigen::VectorXd x(static_cast<Eigen::Index>(deltas.size())), y(x.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && K[i] > 0.0)) throw DomainError("fit_exponent: values must be positive");
    x(static_cast<Eigen::Index>(i)) = std::log(1.0 / deltas[i]);
    y(static_cast<Eigen::Index>(i)) = std::log(K[i]);
  }
  return fit_line<double>(x, y);
}

ScanResult exponent_scan(const GraphCurve& curve, const std::vector<double>& deltas, double p,
                         const SearchOptions& options, const DecouplingSettings& settings) {
  if (deltas.size() < 4) throw DomainError("exponent_scan: need at least four deltas");
  ScanResult out;
  std::vector<double> K;
  for (double delta : deltas) {
    check_delta(delta);
    ScanRow row;
    const WeightRectangle R = default_rectangle(curve, delta, settings, row.r);
    const CellBasis basis =
        build_cell_basis(ParamCurve::lift(curve), unit_partition(delta), R, settings);
    row.estimate = estimate_constant(basis, p, options);
    row.nx = basis.grid.nx;
    row.ny = basis.grid.ny;
    row.nq = basis.max_nodes;
    K.push_back(row.estimate.K_hat);
    out.rows.push_back(std::move(row));
  }
  out.fit = fit_exponent(deltas, K);
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic blocks

BlockDecoupling block_decoupled_ratio(const GraphCurve& curve, const TestFunction& g, double delta,
                                      double epsilon, double p,
                                      const DecouplingSettings& settings) {
  check_delta(delta);
  check_exponent(p);
  BlockDecoupling out;
  out.global = decoupling_ratio(curve, g, delta, p, {}, settings);
  const ParamCurve lifted = ParamCurve::lift(curve);
  const DyadicBlocks dyadic = dyadic_blocks(delta, epsilon, 1.0);
  const double width = std::sqrt(delta);

  std::vector<std::pair<Interval, bool>> pieces{{dyadic.head, true}};
  for (const auto& b : dyadic.blocks) pieces.emplace_back(b, false);

  double lhs2 = 0.0, rhs2 = 0.0;
  const double global_bound = std::sqrt(static_cast<double>(out.global.cell_count)) *
                              (1.0 + kNumericalTolerance);
  out.all_within_global_bound = true;
  for (const auto& [interval, head] : pieces) {
    BlockReport rep;
    rep.block = interval;
    rep.head = head;
    if (head) {
      rep.rect = out.global.rect;
    } else {
      rep.phi2_min = min_second_derivative(curve, interval.lo);
      rep.rect = WeightRectangle::block(delta, rep.phi2_min, Vec2::Zero(), settings.weight_exponent);
    }
    const Partition cells = uniform_partition(interval, std::min(width, interval.length()));
    const CellBasis basis = build_cell_basis(lifted, cells, rep.rect, settings, &g);
    const DecouplingReport r = decoupling_ratio(basis, std::vector<Complex>(cells.size(), 1.0), p);
    rep.cells = cells.size();
    rep.lhs = r.lhs;
    rep.rhs = r.rhs;
    rep.ratio = r.ratio;
    rep.within_block_bound =
        rep.ratio <= std::sqrt(static_cast<double>(rep.cells)) * (1.0 + kNumericalTolerance);
    if (rep.ratio > global_bound) out.all_within_global_bound = false;
    lhs2 += rep.lhs * rep.lhs;
    rhs2 += rep.rhs * rep.rhs;
    out.blocks.push_back(rep);
  }
  for (std::size_t i = 1; i < out.blocks.size(); ++i)
    if (out.blocks[i].ratio > out.blocks[out.max_block].ratio) out.max_block = i;
  out.combined_ratio = safe_ratio(std::sqrt(lhs2), std::sqrt(rhs2));
  return out;
}

}  // namespace declab
