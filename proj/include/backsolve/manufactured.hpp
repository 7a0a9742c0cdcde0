#pragma once

#include <string>

#include "backsolve/assembly.hpp"

namespace backsolve {

/// Exact solution of the heat equation u_t - Laplace u = f on (0,1)^d with
/// homogeneous Dirichlet conditions, together with its data.
struct ManufacturedSolution {
  std::string name;
  SpaceTimeFunction u;
  SpaceTimeGradient grad_u;   // spatial gradient
  SpaceTimeFunction du_dt;
  SpaceTimeFunction f;
};

/// (1 + t^3) prod_i sin(pi x_i).
ManufacturedSolution PolynomialInTime(int d);

/// exp(d pi^2 (1 - t)) prod_i sin(pi x_i); solves the homogeneous equation.
ManufacturedSolution DecayingMode(int d);

/// u = 0.
ManufacturedSolution ZeroSolution();

/// Looks up "polynomial", "heat-mode" or "zero".
ManufacturedSolution ManufacturedByName(const std::string& name, int d);

}  // namespace backsolve
