#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <utility>

#include "backsolve/fe_space.hpp"
#include "backsolve/mesh.hpp"

namespace backsolve {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

using SpaceFunction = std::function<double(const Vertex&)>;
using SpaceTimeFunction = std::function<double(double, const Vertex&)>;
using SpaceTimeGradient = std::function<Vertex(double, const Vertex&)>;

// Temporal matrices. Trial functions are continuous piecewise-linear hats;
// rows of mixed matrices are indexed by the test basis.

/// M_t[i][j] = int_J phi_i phi_j.
SparseMatrix TimeMassTrial(const TimeMesh& mesh);
/// T_t[i][j] = int_J phi_i' phi_j'.
SparseMatrix TimeStiffnessTrial(const TimeMesh& mesh);
/// N_t[i][j] = int_J phi_j psi_i.
SparseMatrix TimeMassMixed(const TimeMesh& mesh, const TimeBasisSpec& test);
/// D_t[i][j] = int_J phi_j' psi_i.
SparseMatrix TimeDerivativeMixed(const TimeMesh& mesh,
                                 const TimeBasisSpec& test);
/// Gram matrix of a test basis; the identity for orthonormal Legendre.
SparseMatrix TimeMassTest(const TimeMesh& mesh, const TimeBasisSpec& test);

// Spatial matrices over the retained Lagrange dofs.

SparseMatrix SpaceMass(const SpatialMesh& mesh, const SpaceBasisSpec& spec);
SparseMatrix SpaceStiffness(const SpatialMesh& mesh,
                            const SpaceBasisSpec& spec);

struct MixedSpaceMatrices {
  SparseMatrix mass;       // int eta_j^trial eta_i^test
  SparseMatrix stiffness;  // int grad eta_j^trial . grad eta_i^test
};
MixedSpaceMatrices SpaceMixed(const SpatialMesh& mesh,
                              const SpaceBasisSpec& trial,
                              const SpaceBasisSpec& test);

/// Same as above on prebuilt spaces sharing one mesh.
MixedSpaceMatrices AssembleSpacePair(const LagrangeSpace& trial,
                                     const LagrangeSpace& test);

/// Values of the trial hats at time t.
Vector TraceVector(const TimeMesh& mesh, double t);

/// F[i] = int_J int_Omega f psi_i eta_i, laid out time-major
/// (index = time_index * n_space + space_index).
Vector LoadVectorF(const TimeMesh& time_mesh, const SpatialMesh& space_mesh,
                   const TimeBasisSpec& time_test,
                   const SpaceBasisSpec& space_test, const SpaceTimeFunction& f,
                   int quad_order);
Vector LoadVectorF(const TimeBasis& time_test, const LagrangeSpace& space_test,
                   const SpaceTimeFunction& f, int quad_order);

/// G[i] = int_Omega g eta_i.
Vector SpaceLoadVector(const LagrangeSpace& space, const SpaceFunction& g,
                       int quad_order);

/// Coefficients c solving M c = (int g eta_i).
Vector L2Projection(const SpatialMesh& mesh, const SpaceBasisSpec& spec,
                    const SpaceFunction& g, int quad_order = 6);
Vector L2Projection(const LagrangeSpace& space, const SparseMatrix& mass,
                    const SpaceFunction& g, int quad_order = 6);

/// Nodal interpolant of g in the retained dofs.
Vector NodalInterpolant(const LagrangeSpace& space, const SpaceFunction& g);

/// int_Omega g^2 by quadrature on the mesh.
double IntegrateSquare(const SpatialMesh& mesh, const SpaceFunction& g,
                       int quad_order = 8);

/// Largest |a_ij - a_ji| relative to max |a_ij|.
double SymmetryDefect(const SparseMatrix& a);

}  // namespace backsolve
