#include "backsolve/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/QR>

#include "backsolve/quadrature.hpp"

namespace backsolve {

double ChooseEpsilon(EpsilonStrategy strategy, long long dofs, int d,
                     double pert_norm, double explicit_value) {
  if (strategy == EpsilonStrategy::kExplicit) {
    if (!(explicit_value >= 0.0)) {
      throw std::invalid_argument("ChooseEpsilon: explicit value must be >= 0");
    }
    return explicit_value;
  }
  if (dofs < 1) throw std::invalid_argument("ChooseEpsilon: dofs must be >= 1");
  if (d < 1 || d > 3) throw std::invalid_argument("ChooseEpsilon: bad d");
  const double base = std::pow(static_cast<double>(dofs), -1.0 / d);
  if (strategy == EpsilonStrategy::kPlain) return base;
  if (pert_norm < 0.0) {
    throw std::invalid_argument("ChooseEpsilon: negative perturbation norm");
  }
  return pert_norm + base;
}

EndTimeData EndTimeData::FromFunction(const LagrangeSpace& space,
                                      const SpaceFunction& g, int quad_order) {
  EndTimeData data;
  data.load = SpaceLoadVector(space, g, quad_order);
  data.norm_squared = IntegrateSquare(space.mesh(), g, quad_order);
  return data;
}

void EndTimeData::AddFiniteElement(const Vector& c, const SparseMatrix& mass) {
  if (c.size() != load.size() || mass.rows() != c.size()) {
    throw std::invalid_argument("EndTimeData: size mismatch");
  }
  const Vector mc = mass * c;
  // ||g + c||^2 = ||g||^2 + 2 (g, c) + c^T M c.
  norm_squared += 2.0 * c.dot(load) + c.dot(mc);
  load += mc;
}

LeastSquaresSystem::LeastSquaresSystem(const SpaceTimeDiscretization& disc,
                                       double reg_epsilon, Vector f_load,
                                       EndTimeData g)
    : b_(AssembleB(disc)),
      g_y_(MakeGY(disc)),
      space_mass_(disc.space_mass()),
      n_time_(disc.time_mesh().num_nodes()),
      n_space_(disc.trial_space().size()),
      reg_epsilon_(reg_epsilon),
      f_load_(std::move(f_load)),
      g_(std::move(g)) {
  if (!(reg_epsilon >= 0.0)) {
    throw std::invalid_argument("LeastSquaresSystem: epsilon must be >= 0");
  }
  if (f_load_.size() != b_.rows()) {
    throw std::invalid_argument("LeastSquaresSystem: load vector size");
  }
  if (g_.load.size() != n_space_) {
    throw std::invalid_argument("LeastSquaresSystem: end-time data size");
  }
  Vector gf;
  g_y_.Apply(f_load_, gf);
  b_.ApplyTranspose(gf, rhs_);
  rhs_.segment((n_time_ - 1) * n_space_, n_space_) += g_.load;
}

void LeastSquaresSystem::Apply(const Vector& x, Vector& y) const {
  if (x.size() != cols()) {
    throw std::invalid_argument("LeastSquaresSystem::Apply: size mismatch");
  }
  Vector bx, gbx;
  b_.Apply(x, bx);
  g_y_.Apply(bx, gbx);
  b_.ApplyTranspose(gbx, y);
  const Eigen::Index last = (n_time_ - 1) * n_space_;
  y.segment(last, n_space_) += space_mass_ * x.segment(last, n_space_);
  if (reg_epsilon_ > 0.0) {
    y.head(n_space_) +=
        (reg_epsilon_ * reg_epsilon_) * (space_mass_ * x.head(n_space_));
  }
}

double LeastSquaresSystem::Functional(const Vector& z) const {
  if (z.size() != cols()) {
    throw std::invalid_argument("LeastSquaresSystem::Functional: size");
  }
  Vector residual;
  b_.Apply(z, residual);
  residual -= f_load_;
  const double dual = g_y_.DualNormSquared(residual);
  const Vector z_end = z.segment((n_time_ - 1) * n_space_, n_space_);
  const Vector z_start = z.head(n_space_);
  const double end = z_end.dot(space_mass_ * z_end) - 2.0 * z_end.dot(g_.load) +
                     g_.norm_squared;
  const double start = z_start.dot(space_mass_ * z_start);
  return dual + end + reg_epsilon_ * reg_epsilon_ * start;
}

LeastSquaresSystem BuildSystem(const SpaceTimeDiscretization& disc,
                               double reg_epsilon, const SpaceTimeFunction& f,
                               EndTimeData g, int quad_order) {
  const TimeBasis time_test(disc.time_mesh(), disc.time_test_spec());
  Vector f_load = LoadVectorF(time_test, disc.test_space(), f, quad_order);
  return LeastSquaresSystem(disc, reg_epsilon, std::move(f_load), std::move(g));
}

PcgResult Pcg(const LinearOperator& system, const Vector& rhs,
              const LinearOperator& preconditioner, const PcgOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.threshold > 0.0)) {
    throw std::invalid_argument("Pcg: threshold must be positive");
  }
  if (rhs.size() != system.rows() || preconditioner.rows() != system.rows()) {
    throw std::invalid_argument("Pcg: size mismatch");
  }
  PcgResult result;
  SolveReport& report = result.report;
  report.threshold = options.threshold;
  Vector x = Vector::Zero(rhs.size());
  Vector r = rhs;
  Vector z;
  preconditioner.Apply(r, z);
  double rz = r.dot(z);
  report.history.push_back(rz);

  // Smoothed iterate, its residual and the preconditioned residual.
  Vector s = x, rho = r, g_rho = z;
  double value = rz;
  auto finish = [&](const Vector& solution, double final_value) {
    result.coefficients = solution;
    report.stopping_value = final_value;
    report.converged = final_value <= options.threshold;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
  };
  if (rz <= options.threshold || rhs.squaredNorm() == 0.0) return finish(x, rz);

  Vector p = z, q;
  for (int it = 1; it <= options.max_iterations; ++it) {
    system.Apply(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) {
      throw std::runtime_error("Pcg: operator is not positive definite");
    }
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    preconditioner.Apply(r, z);
    const double rz_new = r.dot(z);
    report.iterations = it;
    if (options.smoothing) {
      // Minimize ||rho + eta (r - rho)||_G over eta.
      const Vector d = r - rho;
      const Vector gd = z - g_rho;
      const double dd = d.dot(gd);
      if (dd > 0.0) {
        const double eta = -rho.dot(gd) / dd;
        rho += eta * d;
        g_rho += eta * gd;
        s += eta * (x - s);
        value = std::max(rho.dot(g_rho), 0.0);
      }
    } else {
      s = x;
      value = rz_new;
    }
    report.history.push_back(value);
    if (value <= options.threshold) return finish(s, value);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return finish(s, value);
}

namespace {

struct CellIntegrals {
  double value_sq = 0.0;
  double grad_sq = 0.0;
};

// int_Omega (w - wh)^2 and |grad(w - wh)|^2 for the trial-space function with
// spatial coefficients c.
CellIntegrals SpatialError(const LagrangeSpace& space, const SimplexRule& rule,
                           const Eigen::Ref<const Vector>& c,
                           const SpaceFunction& w,
                           const std::function<Vertex(const Vertex&)>& grad_w) {
  const SpatialMesh& mesh = space.mesh();
  const int d = mesh.dimension();
  const int n_local = space.dofs_per_cell();
  std::vector<double> shape(n_local);
  Eigen::MatrixXd grads(n_local, d);
  CellIntegrals total;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double vol = mesh.CellVolume(cell);
    const auto dofs = space.CellDofs(cell);
    const Eigen::MatrixXd bary_grads = space.BarycentricGradients(cell);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& bary = rule.barycentric[q];
      space.ShapeValues(bary, shape);
      const Vertex x = space.MapToCell(cell, bary);
      double value = 0.0;
      Eigen::Vector3d grad = Eigen::Vector3d::Zero();
      if (grad_w) space.ShapeGradients(bary_grads, bary, grads);
      for (int a = 0; a < n_local; ++a) {
        if (dofs[a] < 0) continue;
        value += c[dofs[a]] * shape[a];
        if (grad_w) {
          for (int i = 0; i < d; ++i) grad[i] += c[dofs[a]] * grads(a, i);
        }
      }
      const double weight = rule.weights[q] * vol;
      const double diff = w(x) - value;
      total.value_sq += weight * diff * diff;
      if (grad_w) {
        const Vertex gw = grad_w(x);
        for (int i = 0; i < d; ++i) {
          const double gd = gw[i] - grad[i];
          total.grad_sq += weight * gd * gd;
        }
      }
    }
  }
  return total;
}

}  // namespace

ErrorReport ComputeErrors(const SpaceTimeDiscretization& disc,
                          const Vector& coefficients, const SpaceTimeFunction& u,
                          const SpaceTimeGradient& grad_u,
                          const std::vector<double>& slice_times,
                          int quad_order) {
  if (coefficients.size() != disc.trial_size()) {
    throw std::invalid_argument("ComputeErrors: coefficient size mismatch");
  }
  const TimeMesh& time_mesh = disc.time_mesh();
  const LagrangeSpace& space = disc.trial_space();
  const Eigen::Index n_space = space.size();
  const Eigen::Map<const Eigen::MatrixXd> values(coefficients.data(), n_space,
                                                 time_mesh.num_nodes());
  const SimplexRule rule =
      SimplexRuleForDegree(space.dimension(), quad_order);
  ErrorReport report;
  report.dofs = disc.trial_size();

  for (double t : slice_times) {
    const Vector c = values * TraceVector(time_mesh, t);
    const CellIntegrals e = SpatialError(
        space, rule, c, [&](const Vertex& x) { return u(t, x); }, nullptr);
    report.l2_slices[t] = std::sqrt(e.value_sq);
  }

  const LineRule time_rule = GaussLegendreForDegree(quad_order);
  double l2_sq = 0.0, grad_sq = 0.0;
  for (int e = 0; e < time_mesh.num_elements(); ++e) {
    const double h = time_mesh.element_length(e);
    for (size_t q = 0; q < time_rule.points.size(); ++q) {
      const double s = time_rule.points[q];
      const double t = time_mesh.element_start(e) + h * s;
      const Vector c = (1.0 - s) * values.col(e) + s * values.col(e + 1);
      const CellIntegrals err = SpatialError(
          space, rule, c, [&](const Vertex& x) { return u(t, x); },
          [&](const Vertex& x) { return grad_u(t, x); });
      l2_sq += time_rule.weights[q] * h * err.value_sq;
      grad_sq += time_rule.weights[q] * h * err.grad_sq;
    }
  }
  report.l2l2 = std::sqrt(l2_sq);
  report.l2h1 = std::sqrt(l2_sq + grad_sq);
  return report;
}

double FitRate(const std::vector<double>& dofs,
               const std::vector<double>& errors) {
  if (dofs.size() != errors.size()) {
    throw std::invalid_argument("FitRate: length mismatch");
  }
  if (dofs.size() < 3) throw std::invalid_argument("FitRate: need >= 3 points");
  const auto n = static_cast<Eigen::Index>(dofs.size());
  Eigen::MatrixXd design(n, 2);
  Vector target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dofs[i] > 0.0) || !(errors[i] > 0.0)) {
      throw std::invalid_argument("FitRate: values must be positive");
    }
    design(i, 0) = 1.0;
    design(i, 1) = std::log(dofs[i]);
    target[i] = std::log(errors[i]);
  }
  const Vector coeffs = design.colPivHouseholderQr().solve(target);
  return coeffs[1];
}

Vector SpaceTimeInterpolant(const SpaceTimeDiscretization& disc,
                            const SpaceTimeFunction& u) {
  const TimeMesh& time_mesh = disc.time_mesh();
  const LagrangeSpace& space = disc.trial_space();
  Vector coeffs(disc.trial_size());
  for (int j = 0; j < time_mesh.num_nodes(); ++j) {
    const double t = time_mesh.breakpoints()[j];
    coeffs.segment(static_cast<Eigen::Index>(j) * space.size(), space.size()) =
        NodalInterpolant(space, [&](const Vertex& x) { return u(t, x); });
  }
  return coeffs;
}

double InterpolationErrorX(const SpaceTimeDiscretization& disc,
                           const ManufacturedSolution& exact, int quad_order) {
  const TimeMesh& time_mesh = disc.time_mesh();
  const LagrangeSpace& space = disc.trial_space();
  const Eigen::Index n_space = space.size();
  const Vector interp = SpaceTimeInterpolant(disc, exact.u);
  const Eigen::Map<const Eigen::MatrixXd> values(interp.data(), n_space,
                                                 time_mesh.num_nodes());
  const SimplexRule rule = SimplexRuleForDegree(space.dimension(), quad_order);
  const LineRule time_rule = GaussLegendreForDegree(quad_order);
  // ||v||_{H^-1} <= ||v||_{L2} / sqrt(lambda_1), lambda_1 = d pi^2.
  const double lambda_1 = disc.dimension() * std::numbers::pi * std::numbers::pi;
  double grad_sq = 0.0, dt_sq = 0.0;
  for (int e = 0; e < time_mesh.num_elements(); ++e) {
    const double h = time_mesh.element_length(e);
    const Vector slope = (values.col(e + 1) - values.col(e)) / h;
    for (size_t q = 0; q < time_rule.points.size(); ++q) {
      const double s = time_rule.points[q];
      const double t = time_mesh.element_start(e) + h * s;
      const double w = time_rule.weights[q] * h;
      const Vector c = (1.0 - s) * values.col(e) + s * values.col(e + 1);
      grad_sq += w * SpatialError(
                         space, rule, c,
                         [&](const Vertex& x) { return exact.u(t, x); },
                         [&](const Vertex& x) { return exact.grad_u(t, x); })
                         .grad_sq;
      dt_sq += w * SpatialError(space, rule, slope,
                                [&](const Vertex& x) {
                                  return exact.du_dt(t, x);
                                },
                                nullptr)
                       .value_sq;
    }
  }
  return std::sqrt(grad_sq + dt_sq / lambda_1);
}

double StoppingThreshold(StoppingRule rule, double data_error,
                         double approximation_error, double initial_norm,
                         double reg_epsilon) {
  if (data_error < 0.0 || approximation_error < 0.0 || initial_norm < 0.0 ||
      reg_epsilon < 0.0) {
    throw std::invalid_argument("StoppingThreshold: negative input");
  }
  const double total = data_error + approximation_error;
  if (rule == StoppingRule::kConsistent) {
    return reg_epsilon * reg_epsilon * total * total;
  }
  if (initial_norm == 0.0) return std::numeric_limits<double>::infinity();
  return total * total / initial_norm;
}

BackwardResult SolveBackward(const BackwardProblem& problem) {
  const SpaceTimeDiscretization disc(problem.time_mesh, problem.space_mesh,
                                     problem.l);
  const SpaceTimeFunction zero = [](double, const Vertex&) { return 0.0; };
  const LeastSquaresSystem system =
      BuildSystem(disc, problem.reg_epsilon, problem.f ? problem.f : zero,
                  problem.g, problem.quad_order);

  double threshold = 0.0;
  if (problem.threshold) {
    threshold = *problem.threshold;
  } else if (problem.exact) {
    const double t0 = problem.time_mesh.t_start();
    const double initial_norm = std::sqrt(IntegrateSquare(
        problem.space_mesh,
        [&](const Vertex& x) { return problem.exact->u(t0, x); },
        problem.quad_order));
    threshold = StoppingThreshold(
        problem.stopping_rule, problem.data_error,
        InterpolationErrorX(disc, *problem.exact, problem.quad_order),
        initial_norm, problem.reg_epsilon);
  } else {
    throw std::invalid_argument(
        "SolveBackward: a threshold is required without an exact solution");
  }

  const RieszPreconditioner g_x = MakeGX(disc, problem.gx_realization);
  PcgOptions options;
  options.max_iterations = problem.max_iterations;
  options.smoothing = problem.smoothing;
  // Never ask for more than rounding allows.
  Vector g_h;
  g_x.Apply(system.rhs(), g_h);
  const double initial = system.rhs().dot(g_h);
  options.threshold = std::max(threshold, 1e-24 * initial);
  if (!(options.threshold > 0.0)) options.threshold = 1e-300;
  if (std::isinf(options.threshold)) {
    options.threshold = std::numeric_limits<double>::max();
  }

  BackwardResult result;
  PcgResult pcg = Pcg(system, system.rhs(), g_x, options);
  result.coefficients = std::move(pcg.coefficients);
  result.report = std::move(pcg.report);
  result.report.epsilon = problem.reg_epsilon;
  if (problem.exact) {
    result.errors =
        ComputeErrors(disc, result.coefficients, problem.exact->u,
                      problem.exact->grad_u, problem.slice_times,
                      problem.quad_order);
  }
  return result;
}

}  // namespace backsolve
