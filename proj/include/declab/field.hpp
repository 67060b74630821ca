#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>

namespace declab {

using Vec2 = Eigen::Vector2d;

enum class RectangleKind { Generic, DeltaR, Cube, Ball, Block };

/// Axis-parallel a x b rectangle carrying the weight
/// omega_R(x) = (1 + |T_R(x - center)|)^(-s), T_R = diag(1/a, 1/b).
struct WeightRectangle {
  Vec2 center = Vec2::Zero();
  double a = 1.0;
  double b = 1.0;
  RectangleKind kind = RectangleKind::Generic;
  double delta = 0.0;  ///< for DeltaR, Cube, Block
  double r = 0.0;      ///< for DeltaR
  double weight_exponent = 200.0;

  static WeightRectangle generic(Vec2 center, double a, double b, double s = 200.0);
  /// delta^-1 x delta^-(r/2).
  static WeightRectangle delta_r(double delta, double r, Vec2 center = Vec2::Zero(),
                                 double s = 200.0);
  /// delta^-1 x delta^-1.
  static WeightRectangle cube(double delta, Vec2 center = Vec2::Zero(), double s = 200.0);
  /// B_R: a = b = R, so omega = omega_B(x / R).
  static WeightRectangle ball(double R, Vec2 center = Vec2::Zero(), double s = 200.0);
  /// delta^-1 x delta^-1 / phi2_min for a dyadic block.
  static WeightRectangle block(double delta, double phi2_min, Vec2 center = Vec2::Zero(),
                               double s = 200.0);

  Vec2 to_unit(const Vec2& x) const {
    return {(x.x() - center.x()) / a, (x.y() - center.y()) / b};
  }
  std::string describe() const;
};

/// Uniform sample grid centred on `center` with odd counts, so the centre is
/// a node. Point (i, j) is column i (x fastest) of row j.
struct GridSpec {
  Eigen::Index nx = 1;
  Eigen::Index ny = 1;
  double hx = 1.0;
  double hy = 1.0;
  Vec2 center = Vec2::Zero();

  Eigen::Index size() const { return nx * ny; }
  double x(Eigen::Index i) const { return center.x() + (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1)) * hx; }
  double y(Eigen::Index j) const { return center.y() + (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1)) * hy; }
  Vec2 point(Eigen::Index i, Eigen::Index j) const { return {x(i), y(j)}; }
  double half_width_x() const { return 0.5 * static_cast<double>(nx - 1) * hx; }
  double half_width_y() const { return 0.5 * static_cast<double>(ny - 1) * hy; }
};

/// Complex samples of a field on a GridSpec; values(j, i) is point (i, j).
template <typename Scalar>
struct FieldGrid {
  using Complex = std::complex<Scalar>;
  using Values = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  WeightRectangle rect;
  GridSpec grid;
  Values values;

  FieldGrid() = default;
  FieldGrid(WeightRectangle r, GridSpec g)
      : rect(r), grid(g), values(Values::Zero(g.ny, g.nx)) {}

  Eigen::Index nx() const { return grid.nx; }
  Eigen::Index ny() const { return grid.ny; }
  double hx() const { return grid.hx; }
  double hy() const { return grid.hy; }

  template <typename Other>
  FieldGrid<Other> cast() const {
    FieldGrid<Other> out;
    out.rect = rect;
    out.grid = grid;
    out.values = values.template cast<std::complex<Other>>();
    return out;
  }
};

}  // namespace declab
