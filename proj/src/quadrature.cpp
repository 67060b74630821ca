#include "declab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "declab/errors.hpp"

namespace declab {

namespace {

GaussRule build_rule() {
  GaussRule rule;
  constexpr int n = kPanelNodes;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre() {
  static const GaussRule rule = build_rule();
  return rule;
}

NodeSet composite_gauss(double lo, double hi, int panels) {
  if (panels < 1) throw DomainError("composite_gauss: need at least one panel");
  const GaussRule& rule = gauss_legendre();
  NodeSet out;
  out.t.reserve(static_cast<std::size_t>(panels) * kPanelNodes);
  out.w.reserve(out.t.capacity());
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int q = 0; q < kPanelNodes; ++q) {
      out.t.push_back(mid + 0.5 * h * rule.nodes[static_cast<std::size_t>(q)]);
      out.w.push_back(0.5 * h * rule.weights[static_cast<std::size_t>(q)]);
    }
  }
  return out;
}

}  // namespace declab
