#include "declab/partition.hpp"

#include <cmath>
#include <string>

#include "declab/errors.hpp"

namespace declab {

Interval::Interval(double lo_, double hi_, bool closed_) : lo(lo_), hi(hi_), closed(closed_) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw DomainError("Interval requires 0 <= lo < hi <= 1, got [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
}

std::size_t Partition::locate(double t) const {
  if (!parent.contains(t) || cells.empty()) return cells.size();
  auto idx = static_cast<std::size_t>(std::floor((t - parent.lo) / width));
  if (idx >= cells.size()) idx = cells.size() - 1;
  // Guard against rounding at a shared endpoint.
  while (idx > 0 && t < cells[idx].lo) --idx;
  while (idx + 1 < cells.size() && t >= cells[idx].hi) ++idx;
  return idx;
}

Partition uniform_partition(const Interval& parent, double width) {
  if (!(width > 0.0)) throw DomainError("uniform_partition: width must be positive");
  if (width > parent.length() * (1.0 + 1e-12))
    throw DomainError("uniform_partition: width exceeds the parent length");
  Partition p;
  p.parent = parent;
  p.width = width;
  // Tolerate ratios that are integral up to rounding, e.g. 1 / 2^-k.
  const double ratio = parent.length() / width;
  auto count = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  if (count == 0) count = 1;
  p.cells.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = parent.lo + static_cast<double>(i) * width;
    const bool last = i + 1 == count;
    const double hi = last ? parent.hi : parent.lo + static_cast<double>(i + 1) * width;
    p.cells.emplace_back(lo, hi, last ? parent.closed : false);
  }
  return p;
}

DyadicBlocks dyadic_blocks(double delta, double epsilon, double upper) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("dyadic_blocks: delta must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw DomainError("dyadic_blocks: epsilon must lie in (0,1/2)");
  if (!(upper > 0.0 && upper <= 1.0)) throw DomainError("dyadic_blocks: upper must lie in (0,1]");
  DyadicBlocks out;
  out.delta = delta;
  out.epsilon = epsilon;
  const double d = std::pow(delta, 0.5 - epsilon);
  if (d >= upper * (1.0 - 1e-12)) {
    out.head = Interval(0.0, upper, false);
    return out;
  }
  out.head = Interval(0.0, d, true);
  double a = d;
  while (a < upper * (1.0 - 1e-12)) {
    const double b = std::min(2.0 * a, upper);
    // A doubling that lands within rounding of `upper` is the final block.
    const double hi = std::abs(b - upper) <= 1e-12 * upper ? upper : b;
    out.blocks.emplace_back(a, hi, true);
    a = hi;
  }
  return out;
}

bool neighborhood_contains(const GraphCurve& curve, double delta, const Vec2& point) {
  return std::abs(point.y() - curve.phi(point.x())) <= 2.0 * delta;
}

}  // namespace declab
