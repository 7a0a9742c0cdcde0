#include "backsolve/assembly.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "backsolve/quadrature.hpp"

namespace backsolve {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix FromTriplets(int rows, int cols, const Triplets& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

enum class TimeForm { kValueValue, kDerivativeValue, kDerivativeDerivative };

// a[i][j] = int_J op(trial_j) op(test_i), with op chosen by `form`.
SparseMatrix AssembleTimePair(const TimeBasis& trial, const TimeBasis& test,
                              TimeForm form) {
  const TimeMesh& mesh = trial.mesh();
  const int trial_degree = trial.spec().degree;
  const int test_degree = test.spec().degree;
  const LineRule rule = GaussLegendreForDegree(trial_degree + test_degree);
  const int n_trial = trial.functions_per_element();
  const int n_test = test.functions_per_element();
  std::vector<double> tv(n_trial), td(n_trial), sv(n_test), sd(n_test);
  Triplets triplets;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double h = mesh.element_length(e);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n_test, n_trial);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      trial.Evaluate(e, rule.points[q], tv, td);
      test.Evaluate(e, rule.points[q], sv, sd);
      const double w = rule.weights[q] * h;
      for (int i = 0; i < n_test; ++i) {
        for (int j = 0; j < n_trial; ++j) {
          switch (form) {
            case TimeForm::kValueValue:
              local(i, j) += w * tv[j] * sv[i];
              break;
            case TimeForm::kDerivativeValue:
              local(i, j) += w * td[j] * sv[i];
              break;
            case TimeForm::kDerivativeDerivative:
              local(i, j) += w * td[j] * sd[i];
              break;
          }
        }
      }
    }
    for (int i = 0; i < n_test; ++i) {
      for (int j = 0; j < n_trial; ++j) {
        triplets.emplace_back(test.Index(e, i), trial.Index(e, j), local(i, j));
      }
    }
  }
  return FromTriplets(test.size(), trial.size(), triplets);
}

TimeBasis HatBasis(const TimeMesh& mesh) {
  return TimeBasis(mesh, TimeBasisSpec::ContinuousLinear());
}

void RequireDiscontinuous(const TimeBasisSpec& test) {
  if (test.continuity != TimeContinuity::kDiscontinuous) {
    throw std::invalid_argument("time test basis must be discontinuous");
  }
}

}  // namespace

SparseMatrix TimeMassTrial(const TimeMesh& mesh) {
  const TimeBasis hats = HatBasis(mesh);
  return AssembleTimePair(hats, hats, TimeForm::kValueValue);
}

SparseMatrix TimeStiffnessTrial(const TimeMesh& mesh) {
  const TimeBasis hats = HatBasis(mesh);
  return AssembleTimePair(hats, hats, TimeForm::kDerivativeDerivative);
}

SparseMatrix TimeMassMixed(const TimeMesh& mesh, const TimeBasisSpec& test) {
  RequireDiscontinuous(test);
  return AssembleTimePair(HatBasis(mesh), TimeBasis(mesh, test),
                          TimeForm::kValueValue);
}

SparseMatrix TimeDerivativeMixed(const TimeMesh& mesh,
                                 const TimeBasisSpec& test) {
  RequireDiscontinuous(test);
  return AssembleTimePair(HatBasis(mesh), TimeBasis(mesh, test),
                          TimeForm::kDerivativeValue);
}

SparseMatrix TimeMassTest(const TimeMesh& mesh, const TimeBasisSpec& test) {
  const TimeBasis basis(mesh, test);
  return AssembleTimePair(basis, basis, TimeForm::kValueValue);
}

MixedSpaceMatrices AssembleSpacePair(const LagrangeSpace& trial,
                                     const LagrangeSpace& test) {
  const SpatialMesh& mesh = trial.mesh();
  if (test.mesh().num_cells() != mesh.num_cells() ||
      test.mesh().num_vertices() != mesh.num_vertices()) {
    throw std::invalid_argument("AssembleSpacePair: spaces on different meshes");
  }
  const int d = mesh.dimension();
  const SimplexRule rule =
      SimplexRuleForDegree(d, trial.spec().degree + test.spec().degree);
  const int n_trial = trial.dofs_per_cell();
  const int n_test = test.dofs_per_cell();
  std::vector<double> tv(n_trial), sv(n_test);
  Eigen::MatrixXd tg(n_trial, d), sg(n_test, d);
  Triplets mass, stiffness;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.CellVolume(c);
    const Eigen::MatrixXd bary_grads = trial.BarycentricGradients(c);
    Eigen::MatrixXd local_mass = Eigen::MatrixXd::Zero(n_test, n_trial);
    Eigen::MatrixXd local_stiff = Eigen::MatrixXd::Zero(n_test, n_trial);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.barycentric[q];
      trial.ShapeValues(b, tv);
      test.ShapeValues(b, sv);
      trial.ShapeGradients(bary_grads, b, tg);
      test.ShapeGradients(bary_grads, b, sg);
      const double w = rule.weights[q] * vol;
      for (int i = 0; i < n_test; ++i) {
        for (int j = 0; j < n_trial; ++j) {
          local_mass(i, j) += w * tv[j] * sv[i];
        }
      }
      local_stiff.noalias() += w * sg * tg.transpose();
    }
    const auto trial_dofs = trial.CellDofs(c);
    const auto test_dofs = test.CellDofs(c);
    for (int i = 0; i < n_test; ++i) {
      if (test_dofs[i] < 0) continue;
      for (int j = 0; j < n_trial; ++j) {
        if (trial_dofs[j] < 0) continue;
        mass.emplace_back(test_dofs[i], trial_dofs[j], local_mass(i, j));
        stiffness.emplace_back(test_dofs[i], trial_dofs[j], local_stiff(i, j));
      }
    }
  }
  return {FromTriplets(test.size(), trial.size(), mass),
          FromTriplets(test.size(), trial.size(), stiffness)};
}

SparseMatrix SpaceMass(const SpatialMesh& mesh, const SpaceBasisSpec& spec) {
  const LagrangeSpace space(mesh, spec);
  return AssembleSpacePair(space, space).mass;
}

SparseMatrix SpaceStiffness(const SpatialMesh& mesh,
                            const SpaceBasisSpec& spec) {
  const LagrangeSpace space(mesh, spec);
  return AssembleSpacePair(space, space).stiffness;
}

MixedSpaceMatrices SpaceMixed(const SpatialMesh& mesh,
                              const SpaceBasisSpec& trial,
                              const SpaceBasisSpec& test) {
  if (trial.degree != 1) {
    throw std::invalid_argument("SpaceMixed: trial degree must be 1");
  }
  return AssembleSpacePair(LagrangeSpace(mesh, trial), LagrangeSpace(mesh, test));
}

Vector TraceVector(const TimeMesh& mesh, double t) {
  const int e = mesh.FindElement(t);
  const double s = (t - mesh.element_start(e)) / mesh.element_length(e);
  Vector v = Vector::Zero(mesh.num_nodes());
  v[e] = 1.0 - s;
  v[e + 1] = s;
  return v;
}

Vector LoadVectorF(const TimeBasis& time_test, const LagrangeSpace& space_test,
                   const SpaceTimeFunction& f, int quad_order) {
  const TimeMesh& time_mesh = time_test.mesh();
  const SpatialMesh& mesh = space_test.mesh();
  const LineRule time_rule = GaussLegendreForDegree(quad_order);
  const SimplexRule space_rule = SimplexRuleForDegree(mesh.dimension(), quad_order);
  const int n_space = space_test.size();
  const int nt_local = time_test.functions_per_element();
  const int ns_local = space_test.dofs_per_cell();
  Vector load = Vector::Zero(static_cast<Eigen::Index>(time_test.size()) * n_space);

  std::vector<double> tv(nt_local), td(nt_local), sv(ns_local);
  // Spatial shape values and points do not depend on the time element.
  std::vector<std::vector<double>> shape(space_rule.weights.size(),
                                         std::vector<double>(ns_local));
  for (size_t q = 0; q < space_rule.weights.size(); ++q) {
    space_test.ShapeValues(space_rule.barycentric[q], shape[q]);
  }
  Eigen::MatrixXd local(nt_local, ns_local);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.CellVolume(c);
    std::vector<Vertex> points(space_rule.weights.size());
    for (size_t q = 0; q < points.size(); ++q) {
      points[q] = space_test.MapToCell(c, space_rule.barycentric[q]);
    }
    const auto dofs = space_test.CellDofs(c);
    for (int e = 0; e < time_mesh.num_elements(); ++e) {
      const double h = time_mesh.element_length(e);
      local.setZero();
      for (size_t qt = 0; qt < time_rule.points.size(); ++qt) {
        const double t = time_mesh.element_start(e) + h * time_rule.points[qt];
        time_test.Evaluate(e, time_rule.points[qt], tv, td);
        for (size_t qs = 0; qs < points.size(); ++qs) {
          const double w =
              time_rule.weights[qt] * h * space_rule.weights[qs] * vol;
          const double fv = w * f(t, points[qs]);
          for (int a = 0; a < nt_local; ++a) {
            for (int b = 0; b < ns_local; ++b) {
              local(a, b) += fv * tv[a] * shape[qs][b];
            }
          }
        }
      }
      for (int a = 0; a < nt_local; ++a) {
        const Eigen::Index row = static_cast<Eigen::Index>(time_test.Index(e, a)) * n_space;
        for (int b = 0; b < ns_local; ++b) {
          if (dofs[b] >= 0) load[row + dofs[b]] += local(a, b);
        }
      }
    }
  }
  return load;
}

Vector LoadVectorF(const TimeMesh& time_mesh, const SpatialMesh& space_mesh,
                   const TimeBasisSpec& time_test,
                   const SpaceBasisSpec& space_test, const SpaceTimeFunction& f,
                   int quad_order) {
  return LoadVectorF(TimeBasis(time_mesh, time_test),
                     LagrangeSpace(space_mesh, space_test), f, quad_order);
}

Vector SpaceLoadVector(const LagrangeSpace& space, const SpaceFunction& g,
                       int quad_order) {
  const SpatialMesh& mesh = space.mesh();
  const SimplexRule rule = SimplexRuleForDegree(mesh.dimension(), quad_order);
  const int n_local = space.dofs_per_cell();
  std::vector<double> values(n_local);
  Vector load = Vector::Zero(space.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.CellVolume(c);
    const auto dofs = space.CellDofs(c);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      space.ShapeValues(rule.barycentric[q], values);
      const double gv =
          rule.weights[q] * vol * g(space.MapToCell(c, rule.barycentric[q]));
      for (int i = 0; i < n_local; ++i) {
        if (dofs[i] >= 0) load[dofs[i]] += gv * values[i];
      }
    }
  }
  return load;
}

Vector L2Projection(const LagrangeSpace& space, const SparseMatrix& mass,
                    const SpaceFunction& g, int quad_order) {
  if (space.size() == 0) return Vector();
  Eigen::SimplicialLDLT<SparseMatrix> solver(mass);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("L2Projection: singular mass matrix");
  }
  return solver.solve(SpaceLoadVector(space, g, quad_order));
}

Vector L2Projection(const SpatialMesh& mesh, const SpaceBasisSpec& spec,
                    const SpaceFunction& g, int quad_order) {
  const LagrangeSpace space(mesh, spec);
  return L2Projection(space, AssembleSpacePair(space, space).mass, g,
                      quad_order);
}

Vector NodalInterpolant(const LagrangeSpace& space, const SpaceFunction& g) {
  Vector c(space.size());
  for (int i = 0; i < space.size(); ++i) c[i] = g(space.Node(i));
  return c;
}

double IntegrateSquare(const SpatialMesh& mesh, const SpaceFunction& g,
                       int quad_order) {
  const SimplexRule rule = SimplexRuleForDegree(mesh.dimension(), quad_order);
  const LagrangeSpace geometry(mesh, {1, false});
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.CellVolume(c);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const double v = g(geometry.MapToCell(c, rule.barycentric[q]));
      total += rule.weights[q] * vol * v * v;
    }
  }
  return total;
}

double SymmetryDefect(const SparseMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  if (a.nonZeros() == 0) return 0.0;
  const SparseMatrix diff = a - SparseMatrix(a.transpose());
  const double scale = a.coeffs().cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return diff.coeffs().size() ? diff.coeffs().cwiseAbs().maxCoeff() / scale
                              : 0.0;
}

}  // namespace backsolve
