#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "backsolve/assembly.hpp"

namespace backsolve {

/// Finite sine series sum_k c_k prod_i sin(k_i pi x_i) on (0,1)^d. Each mode
/// is an eigenfunction of -Laplace with Dirichlet conditions, eigenvalue
/// pi^2 |k|^2, so the heat semigroup acts coefficient-wise.
class SpectralField {
 public:
  struct Mode {
    std::array<int, 3> k{1, 1, 1};
    double c = 0.0;
  };

  explicit SpectralField(int dimension);

  int dimension() const { return dimension_; }
  const std::vector<Mode>& modes() const { return modes_; }
  std::vector<Mode>& modes() { return modes_; }

  /// Entries of k beyond the dimension are ignored.
  void AddMode(std::array<int, 3> k, double c);
  double Eigenvalue(const Mode& mode) const;
  double Evaluate(const Vertex& x) const;

 private:
  int dimension_;
  std::vector<Mode> modes_;
};

/// Coefficients uniform in (-1, 1) on all modes with 1 <= k_i <= n_max.
SpectralField RandomSpectralField(int dimension, int n_max, uint64_t seed);

/// c_k <- c_k exp(-lambda_k dt); dt < 0 evolves backwards and throws once a
/// coefficient exceeds 1e300.
SpectralField HeatEvolve(const SpectralField& field, double dt);

/// (sum_k lambda_k^beta c_k^2 / 2^d)^{1/2}; beta = 0 gives the L2 norm.
double HbetaNorm(const SpectralField& field, double beta);

/// log of the L2 norm after evolving for time t, robust to underflow.
double LogL2NormAt(const SpectralField& field, double t);

/// ||u||_{L2(0,T; H^beta)} of the solution starting from the field.
double L2HbetaNorm(const SpectralField& field, double T, double beta);

struct StabilityCheckResult {
  double max_violation = 0.0;  // max over samples of actual - bound
  double max_ratio = 0.0;      // max over samples of actual / bound
  std::vector<double> sample_times;
  std::vector<double> bound_values;
  std::vector<double> actual_values;
  double beta = 0.0;
  double regularity_gain = 1.0;
  double M = 0.0;  // max{||u(0)||, ||u(T)|| + 1}
};

/// Samples ||u(t)|| <= ||u(0)||^{1 - t/T} ||u(T)||^{t/T} at n_samples
/// equispaced times in [0, T].
StabilityCheckResult CheckLogConvexity(const SpectralField& field, double T,
                                       int n_samples);

/// Compares ||u(t)||_{H^beta} with
/// t^{-beta/(1+gain)} ||u(0)|| (||u(T)|| / ||u(0)||)^{(1 - beta/(1+gain)) t/T}
/// at n_samples equispaced times in (0, T].
StabilityCheckResult CheckHbetaStability(const SpectralField& field, double T,
                                         double beta, int n_samples,
                                         double regularity_gain = 1.0);

struct SmoothingReport {
  double constant = 0.0;  // sup_t t ||du/dt(t)|| / ||u(0)||
  double argmax = 0.0;
};

/// Log-spaced sweep over (0, T] refined by Brent's method around the best
/// sample.
SmoothingReport CheckSmoothing(const SpectralField& field, double T,
                               int n_samples = 400);

/// amplitude * sin(n pi x) sin(n pi y), the end-time value at T of the heat
/// solution u_n(t) = amplitude * exp(2 (n pi)^2 (T - t)) sin(n pi x) sin(n pi y).
SpectralField ModePerturbation(int n, double T, double amplitude);

/// Finite element coefficients with uniform(-1, 1) entries, rescaled to the
/// given L2 norm under the mass matrix.
Vector RandomPerturbation(const SparseMatrix& mass, double target_norm,
                          uint64_t seed);

}  // namespace backsolve
