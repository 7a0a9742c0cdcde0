#include "backsolve/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace backsolve {

LineRule GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev-like initial guess, then map
  // [-1, 1] to [0, 1].
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
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
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

LineRule GaussLegendreForDegree(int degree) {
  return GaussLegendre(std::max(1, degree / 2 + 1));
}

SimplexRule SimplexRuleForDegree(int dimension, int degree) {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("SimplexRuleForDegree: bad dimension");
  }
  SimplexRule rule;
  rule.dimension = dimension;
  if (dimension == 1) {
    const LineRule line = GaussLegendreForDegree(degree);
    for (size_t i = 0; i < line.points.size(); ++i) {
      const double x = line.points[i];
      rule.barycentric.push_back({1.0 - x, x, 0.0, 0.0});
      rule.weights.push_back(line.weights[i]);
    }
    return rule;
  }
  // The collapsing Jacobian adds up to d - 1 to the degree in the collapsed
  // direction.
  const LineRule line = GaussLegendreForDegree(degree + dimension - 1);
  const size_t n = line.points.size();
  if (dimension == 2) {
    for (size_t i = 0; i < n; ++i) {
      const double u = line.points[i];
      for (size_t j = 0; j < n; ++j) {
        const double v = line.points[j] * (1.0 - u);
        rule.barycentric.push_back({1.0 - u - v, u, v, 0.0});
        // Reference area 1/2 is divided out.
        rule.weights.push_back(2.0 * line.weights[i] * line.weights[j] *
                               (1.0 - u));
      }
    }
    return rule;
  }
  for (size_t i = 0; i < n; ++i) {
    const double u = line.points[i];
    for (size_t j = 0; j < n; ++j) {
      const double v = line.points[j] * (1.0 - u);
      for (size_t k = 0; k < n; ++k) {
        const double w = line.points[k] * (1.0 - u - v);
        rule.barycentric.push_back({1.0 - u - v - w, u, v, w});
        rule.weights.push_back(6.0 * line.weights[i] * line.weights[j] *
                               line.weights[k] * (1.0 - u) * (1.0 - u - v));
      }
    }
  }
  return rule;
}

}  // namespace backsolve
