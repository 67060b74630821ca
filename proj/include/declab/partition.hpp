#pragma once

#include <cstddef>
#include <vector>

#include "declab/curve.hpp"

namespace declab {

/// Subinterval of [0, 1]. Cells of a partition are half-open [lo, hi) except
/// the last one, which is closed.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool closed = true;

  Interval() = default;
  Interval(double lo_, double hi_, bool closed_ = true);

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && (closed ? t <= hi : t < hi); }
};

/// Uniform tiling of a parent interval by cells of nominal width w, the last
/// cell clipped.
struct Partition {
  Interval parent;
  double width = 1.0;
  std::vector<Interval> cells;

  std::size_t size() const { return cells.size(); }
  /// Index of the cell owning t, or size() when t lies outside the parent.
  std::size_t locate(double t) const;
};

Partition uniform_partition(const Interval& parent, double width);

/// Dyadic blocks (0, d] u [d, 2d] u [2d, 4d] ... with d = delta^(1/2 - eps),
/// the last block clipped at `upper`.
struct DyadicBlocks {
  Interval head;
  std::vector<Interval> blocks;
  double delta = 0.0;
  double epsilon = 0.0;

  std::size_t count() const { return blocks.size(); }
};

DyadicBlocks dyadic_blocks(double delta, double epsilon, double upper = 1.0);

/// |y - gamma(t)| <= 2 delta: membership in the curved blocks theta.
bool neighborhood_contains(const GraphCurve& curve, double delta, const Vec2& point);

}  // namespace declab
