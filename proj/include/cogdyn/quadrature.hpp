#pragma once

#include <vector>

namespace cogdyn {

// Gauss-Legendre rule mapped to [0, 1]; weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

// Rules are computed once per order and cached; the reference stays valid.
const QuadratureRule& gauss_legendre(int order);

inline constexpr int kDefaultQuadratureOrder = 32;

}  // namespace cogdyn
