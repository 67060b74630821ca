#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "declab/errors.hpp"
#include "declab/field.hpp"
#include "declab/parallel.hpp"

namespace declab {

double weight_eval(const WeightRectangle& R, const Vec2& x);

/// Radius rho in T_R coordinates outside which omega carries at most `tail`
/// of its total mass: (1 + rho)^(1-s) (1 + (s-1) rho) = tail.
double weight_tail_radius(double weight_exponent, double tail);

/// Integral of omega_B over the plane: 2 pi / ((s-1)(s-2)).
double weight_mass(double weight_exponent);

struct GridOptions {
  double samples_per_frequency = 4.0;     ///< per unit of frequency extent
  double samples_per_weight_scale = 2.0;  ///< per e-fold length a/s of the weight
  double tail_tolerance = 1e-3;           ///< weight mass allowed outside the grid
  long nx_max = 1L << 20;                 ///< per-axis point caps
  long ny_max = 1L << 20;
};

/// Grid over the truncation box of R, resolving frequencies up to
/// `frequency_extent` (sup |phi1|, sup |phi2|) and the weight profile.
/// Throws ResolutionError when an axis exceeds its point cap.
GridSpec plan_grid(const WeightRectangle& R, const Vec2& frequency_extent,
                   const GridOptions& options = {});

/// Throws CoverageError unless the grid spans the truncation box of R.
void check_coverage(const GridSpec& grid, const WeightRectangle& R, double tail_tolerance);

/// omega_R * hx * hy at every grid point, row-major.
std::vector<double> weight_array(const GridSpec& grid, const WeightRectangle& R);

/// |z|^p from |z|^2 with exact products for p in {2, 4, 6}.
inline double pow_from_abs2(double abs2, double p) {
  if (p == 2.0) return abs2;
  if (p == 4.0) return abs2 * abs2;
  if (p == 6.0) return abs2 * abs2 * abs2;
  return std::pow(abs2, 0.5 * p);
}

inline void check_exponent(double p) {
  if (!(p >= 2.0 && p <= 6.0)) throw DomainError("p must lie in [2, 6]");
}

/// (sum |f|^p omega_R hx hy)^(1/p): trapezoid sum over the grid, rows summed
/// in order and combined by a fixed pairwise tree.
template <typename Scalar>
double weighted_lp_norm(const FieldGrid<Scalar>& field, double p, const WeightRectangle& R,
                        double tail_tolerance = GridOptions{}.tail_tolerance) {
  check_exponent(p);
  check_coverage(field.grid, R, tail_tolerance);
  const GridSpec& g = field.grid;
  std::vector<double> rows(static_cast<std::size_t>(g.ny));
  parallel_for(rows.size(), [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    double s = 0.0;
    for (Eigen::Index i = 0; i < g.nx; ++i) {
      const std::complex<double> v(field.values(jj, i));
      s += pow_from_abs2(std::norm(v), p) * weight_eval(R, g.point(i, jj));
    }
    rows[j] = s;
  });
  return std::pow(pairwise_sum(rows) * g.hx * g.hy, 1.0 / p);
}

struct MinkowskiCheck {
  double lhs = 0.0;  ///< norm over the large rectangle
  double rhs = 0.0;  ///< (sum over tiles of norm^p)^(1/p)
  double cover_constant = 0.0;  ///< sup over the grid of omega_big / sum omega_tile
  bool holds = false;
};

/// Checks |f|_{L^p(omega_big)} <= C^(1/p) (1 + tol) (sum_tiles |f|^p_{L^p(omega_tile)})^(1/p)
/// on the field's grid, with C the computed cover constant.
template <typename Scalar>
MinkowskiCheck minkowski_transfer_check(const FieldGrid<Scalar>& field, double p,
                                        const WeightRectangle& big,
                                        const std::vector<WeightRectangle>& tiles,
                                        double tol = 1e-9) {
  check_exponent(p);
  const GridSpec& g = field.grid;
  struct RowAcc {
    double big = 0.0, tiles = 0.0, cover = 0.0;
  };
  std::vector<RowAcc> rows(static_cast<std::size_t>(g.ny));
  parallel_for(rows.size(), [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    RowAcc acc;
    for (Eigen::Index i = 0; i < g.nx; ++i) {
      const Vec2 x = g.point(i, jj);
      const double fp = pow_from_abs2(std::norm(std::complex<double>(field.values(jj, i))), p);
      const double wb = weight_eval(big, x);
      double wt = 0.0;
      for (const auto& t : tiles) wt += weight_eval(t, x);
      acc.big += fp * wb;
      acc.tiles += fp * wt;
      acc.cover = std::max(acc.cover, wt > 0.0 ? wb / wt : HUGE_VAL);
    }
    rows[j] = acc;
  });
  std::vector<double> big_rows(rows.size()), tile_rows(rows.size());
  MinkowskiCheck out;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    big_rows[j] = rows[j].big;
    tile_rows[j] = rows[j].tiles;
    out.cover_constant = std::max(out.cover_constant, rows[j].cover);
  }
  out.lhs = std::pow(pairwise_sum(big_rows) * g.hx * g.hy, 1.0 / p);
  out.rhs = std::pow(pairwise_sum(tile_rows) * g.hx * g.hy, 1.0 / p);
  out.holds = out.lhs <= std::pow(out.cover_constant, 1.0 / p) * (1.0 + tol) * out.rhs;
  return out;
}

}  // namespace declab
