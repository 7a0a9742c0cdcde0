#include "backsolve/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace backsolve {

namespace {

constexpr double kPi = std::numbers::pi;

double SineProduct(int d, const Vertex& x) {
  double s = 1.0;
  for (int i = 0; i < d; ++i) s *= std::sin(kPi * x[i]);
  return s;
}

Vertex SineProductGradient(int d, const Vertex& x) {
  Vertex g{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    double v = kPi * std::cos(kPi * x[i]);
    for (int j = 0; j < d; ++j) {
      if (j != i) v *= std::sin(kPi * x[j]);
    }
    g[i] = v;
  }
  return g;
}

void CheckDimension(int d) {
  if (d < 1 || d > 3) {
    throw std::invalid_argument("manufactured solution: d must be 1, 2 or 3");
  }
}

}  // namespace

ManufacturedSolution PolynomialInTime(int d) {
  CheckDimension(d);
  const double lambda = d * kPi * kPi;
  ManufacturedSolution s;
  s.name = "polynomial";
  s.u = [d](double t, const Vertex& x) {
    return (1.0 + t * t * t) * SineProduct(d, x);
  };
  s.grad_u = [d](double t, const Vertex& x) {
    Vertex g = SineProductGradient(d, x);
    for (double& v : g) v *= 1.0 + t * t * t;
    return g;
  };
  s.du_dt = [d](double t, const Vertex& x) {
    return 3.0 * t * t * SineProduct(d, x);
  };
  s.f = [d, lambda](double t, const Vertex& x) {
    return (3.0 * t * t + lambda * (1.0 + t * t * t)) * SineProduct(d, x);
  };
  return s;
}

ManufacturedSolution DecayingMode(int d) {
  CheckDimension(d);
  const double lambda = d * kPi * kPi;
  ManufacturedSolution s;
  s.name = "heat-mode";
  s.u = [d, lambda](double t, const Vertex& x) {
    return std::exp(lambda * (1.0 - t)) * SineProduct(d, x);
  };
  s.grad_u = [d, lambda](double t, const Vertex& x) {
    Vertex g = SineProductGradient(d, x);
    for (double& v : g) v *= std::exp(lambda * (1.0 - t));
    return g;
  };
  s.du_dt = [d, lambda](double t, const Vertex& x) {
    return -lambda * std::exp(lambda * (1.0 - t)) * SineProduct(d, x);
  };
  s.f = [](double, const Vertex&) { return 0.0; };
  return s;
}

ManufacturedSolution ZeroSolution() {
  ManufacturedSolution s;
  s.name = "zero";
  s.u = [](double, const Vertex&) { return 0.0; };
  s.grad_u = [](double, const Vertex&) { return Vertex{0.0, 0.0, 0.0}; };
  s.du_dt = [](double, const Vertex&) { return 0.0; };
  s.f = [](double, const Vertex&) { return 0.0; };
  return s;
}

ManufacturedSolution ManufacturedByName(const std::string& name, int d) {
  if (name == "polynomial") return PolynomialInTime(d);
  if (name == "heat-mode") return DecayingMode(d);
  if (name == "zero") return ZeroSolution();
  throw std::invalid_argument("unknown solution '" + name + "'");
}

}  // namespace backsolve
