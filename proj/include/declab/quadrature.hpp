#pragma once

#include <array>
#include <vector>

namespace declab {

/// Nodes per Gauss-Legendre panel.
inline constexpr int kPanelNodes = 8;

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::array<double, kPanelNodes> nodes{};
  std::array<double, kPanelNodes> weights{};
};

const GaussRule& gauss_legendre();

/// Composite rule: `panels` equal panels on [lo, hi], kPanelNodes each.
struct NodeSet {
  std::vector<double> t;
  std::vector<double> w;
};

NodeSet composite_gauss(double lo, double hi, int panels);

}  // namespace declab
