#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "backsolve/mesh.hpp"

namespace backsolve {

/// Lagrange space on a simplicial mesh.
struct SpaceBasisSpec {
  int degree = 1;          // 1 or 2
  bool dirichlet = true;   // eliminate dofs on the boundary
};

enum class TimeContinuity { kContinuousLinear, kDiscontinuous };

/// Temporal basis: continuous piecewise-linear hats, or element-wise
/// polynomials of the given degree (Legendre, orthonormal in L2 if requested).
struct TimeBasisSpec {
  TimeContinuity continuity = TimeContinuity::kDiscontinuous;
  int degree = 1;
  bool orthonormal = true;

  static TimeBasisSpec ContinuousLinear() {
    return {TimeContinuity::kContinuousLinear, 1, false};
  }
  static TimeBasisSpec OrthonormalLegendre(int degree) {
    return {TimeContinuity::kDiscontinuous, degree, true};
  }
};

/// Element-local evaluation of a time basis. Continuous hats are numbered by
/// mesh node, discontinuous functions by element * (degree + 1) + q.
class TimeBasis {
 public:
  TimeBasis(const TimeMesh& mesh, TimeBasisSpec spec);

  const TimeMesh& mesh() const { return mesh_; }
  const TimeBasisSpec& spec() const { return spec_; }
  int size() const;
  int functions_per_element() const;
  int Index(int element, int local) const;

  /// Values and derivatives of the local functions of `element` at
  /// reference coordinate s in [0, 1].
  void Evaluate(int element, double s, std::span<double> values,
                std::span<double> derivatives) const;

 private:
  TimeMesh mesh_;
  TimeBasisSpec spec_;
};

/// Continuous Lagrange space of degree 1 or 2 with optional elimination of
/// boundary dofs. Degree-2 dofs sit at vertices and edge midpoints.
class LagrangeSpace {
 public:
  LagrangeSpace(const SpatialMesh& mesh, SpaceBasisSpec spec);

  const SpatialMesh& mesh() const { return mesh_; }
  const SpaceBasisSpec& spec() const { return spec_; }
  int dimension() const { return mesh_.dimension(); }

  /// Number of retained dofs.
  int size() const { return num_dofs_; }
  int dofs_per_cell() const { return dofs_per_cell_; }

  /// Retained index of each local dof of a cell, -1 where eliminated.
  std::span<const int> CellDofs(int c) const {
    return {cell_dofs_.data() + static_cast<size_t>(c) * dofs_per_cell_,
            static_cast<size_t>(dofs_per_cell_)};
  }

  /// Coordinates of the nodal point of a retained dof.
  const Vertex& Node(int dof) const { return nodes_[dof]; }

  /// Shape function values at barycentric point `bary` (reference element).
  void ShapeValues(const std::array<double, 4>& bary,
                   std::span<double> values) const;

  /// Physical gradients of the shape functions at `bary`, given the
  /// barycentric gradients of the cell; row i is the gradient of local
  /// function i.
  void ShapeGradients(const Eigen::MatrixXd& bary_grads,
                      const std::array<double, 4>& bary,
                      Eigen::Ref<Eigen::MatrixXd> grads) const;

  /// Physical point of barycentric coordinates on cell c.
  Vertex MapToCell(int c, const std::array<double, 4>& bary) const;

  /// Gradients of the barycentric coordinates on cell c (rows 0..d).
  Eigen::MatrixXd BarycentricGradients(int c) const;

 private:
  SpatialMesh mesh_;
  SpaceBasisSpec spec_;
  int dofs_per_cell_ = 0;
  int num_dofs_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Vertex> nodes_;
};

}  // namespace backsolve
