#pragma once

#include <map>
#include <optional>
#include <vector>

#include "backsolve/assembly.hpp"
#include "backsolve/linear_operator.hpp"
#include "backsolve/manufactured.hpp"
#include "backsolve/operators.hpp"
#include "backsolve/precond.hpp"

namespace backsolve {

enum class EpsilonStrategy { kPlain, kDataAware, kExplicit };

/// plain: dofs^{-1/d}; data-aware: pert_norm + dofs^{-1/d}; explicit:
/// explicit_value.
double ChooseEpsilon(EpsilonStrategy strategy, long long dofs, int d,
                     double pert_norm, double explicit_value = 0.0);

/// End-time data g in the form the method consumes it: the load vector
/// (int g eta_i) over the trial space and ||g||^2.
struct EndTimeData {
  Vector load;
  double norm_squared = 0.0;

  static EndTimeData FromFunction(const LagrangeSpace& space,
                                  const SpaceFunction& g, int quad_order);
  /// Adds the finite element function with coefficients c; mass is the
  /// trial-space mass matrix.
  void AddFiniteElement(const Vector& c, const SparseMatrix& mass);
};

/// S_eps = B^T G_Y B + gamma_T^T M gamma_T + eps^2 gamma_0^T M gamma_0 and
/// h = B^T G_Y F + gamma_T^T g.
class LeastSquaresSystem : public LinearOperator {
 public:
  LeastSquaresSystem(const SpaceTimeDiscretization& disc, double reg_epsilon,
                     Vector f_load, EndTimeData g);

  Eigen::Index rows() const override { return b_.cols(); }
  Eigen::Index cols() const override { return b_.cols(); }
  void Apply(const Vector& x, Vector& y) const override;

  const Vector& rhs() const { return rhs_; }
  double reg_epsilon() const { return reg_epsilon_; }
  const SparseMatrix& space_mass() const { return space_mass_; }
  Eigen::Index n_time() const { return n_time_; }
  Eigen::Index n_space() const { return n_space_; }

  /// Discrete functional ||Bz - F||^2_{Y'} + ||gamma_T z - g||^2 +
  /// eps^2 ||gamma_0 z||^2; its minimizer solves S z = h.
  double Functional(const Vector& z) const;

 private:
  KroneckerOperator b_;
  RieszPreconditioner g_y_;
  SparseMatrix space_mass_;
  Eigen::Index n_time_;
  Eigen::Index n_space_;
  double reg_epsilon_;
  Vector f_load_;
  EndTimeData g_;
  Vector rhs_;
};

LeastSquaresSystem BuildSystem(const SpaceTimeDiscretization& disc,
                               double reg_epsilon, const SpaceTimeFunction& f,
                               EndTimeData g, int quad_order);

struct PcgOptions {
  double threshold = 1e-12;  // on r^T G_X r
  int max_iterations = 2000;
  // Track the minimal-residual smoothed iterate so that the reported
  // residual history is nonincreasing.
  bool smoothing = true;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> history;  // r^T G_X r, starting with the initial residual
  double stopping_value = 0.0;
  double threshold = 0.0;
  double epsilon = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
};

struct PcgResult {
  Vector coefficients;
  SolveReport report;
};

/// Preconditioned CG from the zero initial guess; stops once
/// (h - S u)(G_X (h - S u)) <= threshold.
PcgResult Pcg(const LinearOperator& system, const Vector& rhs,
              const LinearOperator& preconditioner, const PcgOptions& options);

struct ErrorReport {
  std::map<double, double> l2_slices;
  double l2l2 = 0.0;
  double l2h1 = 0.0;  // L2(J; H^1) with the full H^1 norm
  long long dofs = 0;
};

/// Errors of the discrete function with the given trial coefficients.
ErrorReport ComputeErrors(const SpaceTimeDiscretization& disc,
                          const Vector& coefficients, const SpaceTimeFunction& u,
                          const SpaceTimeGradient& grad_u,
                          const std::vector<double>& slice_times,
                          int quad_order = 6);

/// Least-squares slope of log(error) against log(dofs).
double FitRate(const std::vector<double>& dofs,
               const std::vector<double>& errors);

/// Space-time nodal interpolant of u in the trial space.
Vector SpaceTimeInterpolant(const SpaceTimeDiscretization& disc,
                            const SpaceTimeFunction& u);

/// Upper estimate of ||u - I u||_X for the nodal interpolant I u, with the
/// H^{-1} part bounded through the Poincare constant of (0,1)^d.
double InterpolationErrorX(const SpaceTimeDiscretization& disc,
                           const ManufacturedSolution& exact,
                           int quad_order = 6);

enum class StoppingRule {
  // r^T G_X r <= (E_data + E_appr)^2 / ||gamma_0 u||.
  kLoose,
  // r^T G_X r <= eps^2 (E_data + E_appr)^2: the dual norm of the residual,
  // divided by eps, stays below the error level.
  kConsistent,
};

/// Threshold on r^T G_X r; infinite when gamma_0 u = 0 under kLoose.
double StoppingThreshold(StoppingRule rule, double data_error,
                         double approximation_error, double initial_norm,
                         double reg_epsilon);

struct BackwardProblem {
  BackwardProblem(TimeMesh time, SpatialMesh space)
      : time_mesh(std::move(time)), space_mesh(std::move(space)) {}

  TimeMesh time_mesh;
  SpatialMesh space_mesh;
  int l = 0;
  double reg_epsilon = 0.0;
  SpaceTimeFunction f;
  EndTimeData g;
  // Used for the threshold and error report when present.
  std::optional<ManufacturedSolution> exact;
  double data_error = 0.0;
  // Overrides the computed threshold; required without an exact solution.
  std::optional<double> threshold;
  StoppingRule stopping_rule = StoppingRule::kConsistent;
  std::vector<double> slice_times;
  int quad_order = 6;
  int max_iterations = 5000;
  bool smoothing = true;
  Realization gx_realization = Realization::kExactSolve;
};

struct BackwardResult {
  Vector coefficients;
  SolveReport report;
  std::optional<ErrorReport> errors;
};

BackwardResult SolveBackward(const BackwardProblem& problem);

}  // namespace backsolve
