#include "cogdyn/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "cogdyn/errors.hpp"

namespace cogdyn {
namespace {

// Newton iteration on P_n from the Chebyshev-like initial guesses.
QuadratureRule build_rule(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    {
      // Derivative at the converged root for the weight.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of the [-1, 1] weight
    rule.nodes[k] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - k] = 0.5 * (1.0 + x);
    rule.weights[k] = rule.weights[n - 1 - k] = w;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 512) throw ValidationError("quadrature order must lie in [1, 512]");
  static std::mutex mu;
  static std::map<int, QuadratureRule> rules;
  std::lock_guard lock(mu);
  auto it = rules.find(order);
  if (it == rules.end()) it = rules.emplace(order, build_rule(order)).first;
  return it->second;
}

}  // namespace cogdyn
