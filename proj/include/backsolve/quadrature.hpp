#pragma once

#include <array>
#include <vector>

namespace backsolve {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// n-point rule, exact for polynomials of degree 2n - 1.
LineRule GaussLegendre(int n);

/// Smallest Gauss-Legendre rule exact for the given polynomial degree.
LineRule GaussLegendreForDegree(int degree);

/// Rule on the reference d-simplex in barycentric coordinates; weights sum
/// to 1 so they scale directly with the cell volume.
struct SimplexRule {
  int dimension = 0;
  std::vector<std::array<double, 4>> barycentric;
  std::vector<double> weights;
};

/// Collapsed (Duffy) product of Gauss-Legendre rules, exact for polynomials
/// of the given total degree on the d-simplex.
SimplexRule SimplexRuleForDegree(int dimension, int degree);

}  // namespace backsolve
