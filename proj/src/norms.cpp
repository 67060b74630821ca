#include "declab/norms.hpp"

#include <locale>
#include <numbers>
#include <sstream>
#include <string>

#include "declab/errors.hpp"

namespace declab {

WeightRectangle WeightRectangle::generic(Vec2 center, double a, double b, double s) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("rectangle sides must be positive");
  WeightRectangle R;
  R.center = center;
  R.a = a;
  R.b = b;
  R.weight_exponent = s;
  return R;
}

WeightRectangle WeightRectangle::delta_r(double delta, double r, Vec2 center, double s) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  WeightRectangle R = generic(center, 1.0 / delta, std::pow(delta, -0.5 * r), s);
  R.kind = RectangleKind::DeltaR;
  R.delta = delta;
  R.r = r;
  return R;
}

WeightRectangle WeightRectangle::cube(double delta, Vec2 center, double s) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  WeightRectangle R = generic(center, 1.0 / delta, 1.0 / delta, s);
  R.kind = RectangleKind::Cube;
  R.delta = delta;
  return R;
}

WeightRectangle WeightRectangle::ball(double radius, Vec2 center, double s) {
  WeightRectangle R = generic(center, radius, radius, s);
  R.kind = RectangleKind::Ball;
  return R;
}

WeightRectangle WeightRectangle::block(double delta, double phi2_min, Vec2 center, double s) {
  if (!(phi2_min > 0.0)) throw DomainError("block rectangle needs positive curvature minimum");
  WeightRectangle R = generic(center, 1.0 / delta, 1.0 / (delta * phi2_min), s);
  R.kind = RectangleKind::Block;
  R.delta = delta;
  return R;
}

std::string WeightRectangle::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  switch (kind) {
    case RectangleKind::DeltaR: os << "R_delta_r"; break;
    case RectangleKind::Cube: os << "Q_delta"; break;
    case RectangleKind::Ball: os << "B_R"; break;
    case RectangleKind::Block: os << "R_block"; break;
    default: os << "generic"; break;
  }
  os << "[" << a << "x" << b << "]";
  return os.str();
}

double weight_eval(const WeightRectangle& R, const Vec2& x) {
  return std::pow(1.0 + R.to_unit(x).norm(), -R.weight_exponent);
}

double weight_tail_radius(double s, double tail) {
  if (!(s > 2.0)) throw DomainError("weight exponent must exceed 2");
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("tail tolerance must lie in (0,1)");
  const auto mass = [s](double rho) {
    return std::exp((1.0 - s) * std::log1p(rho)) * (1.0 + (s - 1.0) * rho);
  };
  double lo = 0.0, hi = 1.0;
  while (mass(hi) > tail) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > tail ? lo : hi) = mid;
  }
  return hi;
}

double weight_mass(double s) { return 2.0 * std::numbers::pi / ((s - 1.0) * (s - 2.0)); }

GridSpec plan_grid(const WeightRectangle& R, const Vec2& frequency_extent,
                   const GridOptions& options) {
  const double rho = weight_tail_radius(R.weight_exponent, options.tail_tolerance);
  const auto axis = [&](double side, double freq, Eigen::Index& n, double& h) {
    h = side / (R.weight_exponent * options.samples_per_weight_scale);
    if (freq > 0.0) h = std::min(h, 1.0 / (options.samples_per_frequency * freq));
    const double half = rho * side;
    const auto k = static_cast<Eigen::Index>(std::ceil(half / h - 1e-12));
    n = 2 * k + 1;
  };
  GridSpec g;
  g.center = R.center;
  axis(R.a, std::abs(frequency_extent.x()), g.nx, g.hx);
  axis(R.b, std::abs(frequency_extent.y()), g.ny, g.hy);
  if (g.nx > options.nx_max || g.ny > options.ny_max)
    throw ResolutionError("grid of " + std::to_string(g.nx) + " x " + std::to_string(g.ny) +
                          " points exceeds the cap " + std::to_string(options.nx_max) + " x " +
                          std::to_string(options.ny_max));
  return g;
}

void check_coverage(const GridSpec& grid, const WeightRectangle& R, double tail_tolerance) {
  const double rho = weight_tail_radius(R.weight_exponent, tail_tolerance);
  const double slack = 1e-9;
  const bool ok_x = grid.x(0) <= R.center.x() - rho * R.a * (1.0 - slack) &&
                    grid.x(grid.nx - 1) >= R.center.x() + rho * R.a * (1.0 - slack);
  const bool ok_y = grid.y(0) <= R.center.y() - rho * R.b * (1.0 - slack) &&
                    grid.y(grid.ny - 1) >= R.center.y() + rho * R.b * (1.0 - slack);
  if (!(ok_x && ok_y))
    throw CoverageError("grid does not cover the truncation box of " + R.describe());
}

std::vector<double> weight_array(const GridSpec& grid, const WeightRectangle& R) {
  std::vector<double> w(static_cast<std::size_t>(grid.size()));
  parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < grid.nx; ++i)
      w[j * static_cast<std::size_t>(grid.nx) + static_cast<std::size_t>(i)] =
          weight_eval(R, grid.point(i, jj)) * grid.hx * grid.hy;
  });
  return w;
}

}  // namespace declab
