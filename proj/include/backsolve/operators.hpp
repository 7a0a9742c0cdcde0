#pragma once

#include <Eigen/SparseCholesky>
#include <memory>

#include "backsolve/assembly.hpp"
#include "backsolve/fe_space.hpp"
#include "backsolve/linear_operator.hpp"
#include "backsolve/mesh.hpp"

namespace backsolve {

/// Cached sparse LDL^T factorization of an SPD spatial matrix.
class SpatialSolver {
 public:
  explicit SpatialSolver(const SparseMatrix& matrix);

  Eigen::Index size() const { return size_; }
  /// Solves column by column in place.
  void SolveInPlace(Eigen::Ref<Eigen::MatrixXd> columns) const;
  Vector Solve(const Vector& rhs) const;

 private:
  Eigen::Index size_ = 0;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

/// Trial space X^delta = S^{0,1}(time) (x) S^{0,1}_0(space) and test space
/// Y^delta = S^{-1,p}(time) (x) S^{0,1+l}_0(space) on one mesh pair, with the
/// one-dimensional factor matrices they are built from.
class SpaceTimeDiscretization {
 public:
  SpaceTimeDiscretization(const TimeMesh& time_mesh,
                          const SpatialMesh& space_mesh, int l,
                          int time_test_degree = 1);

  const TimeMesh& time_mesh() const { return time_mesh_; }
  const SpatialMesh& space_mesh() const { return trial_space_.mesh(); }
  int l() const { return l_; }
  int dimension() const { return space_mesh().dimension(); }
  const TimeBasisSpec& time_test_spec() const { return time_test_spec_; }
  const LagrangeSpace& trial_space() const { return trial_space_; }
  const LagrangeSpace& test_space() const { return test_space_; }

  Eigen::Index trial_size() const {
    return static_cast<Eigen::Index>(time_mesh_.num_nodes()) *
           trial_space_.size();
  }
  Eigen::Index test_size() const {
    return static_cast<Eigen::Index>(time_test_size()) * test_space_.size();
  }
  int time_test_size() const {
    return time_mesh_.num_elements() * (time_test_spec_.degree + 1);
  }

  // Temporal factors.
  const SparseMatrix& time_mass() const { return time_mass_; }
  const SparseMatrix& time_stiffness() const { return time_stiffness_; }
  const SparseMatrix& time_mass_mixed() const { return time_mass_mixed_; }
  const SparseMatrix& time_derivative_mixed() const {
    return time_derivative_mixed_;
  }

  // Spatial factors: trial-trial, test-trial and test-test.
  const SparseMatrix& space_mass() const { return space_mass_; }
  const SparseMatrix& space_stiffness() const { return space_stiffness_; }
  const SparseMatrix& mixed_mass() const { return mixed_.mass; }
  const SparseMatrix& mixed_stiffness() const { return mixed_.stiffness; }
  const SparseMatrix& test_stiffness() const { return test_stiffness_; }

 private:
  TimeMesh time_mesh_;
  int l_;
  TimeBasisSpec time_test_spec_;
  LagrangeSpace trial_space_;
  LagrangeSpace test_space_;
  SparseMatrix time_mass_, time_stiffness_, time_mass_mixed_,
      time_derivative_mixed_;
  SparseMatrix space_mass_, space_stiffness_, test_stiffness_;
  MixedSpaceMatrices mixed_;
};

/// B = D_t (x) M_x^mix + N_t (x) A_x^mix: trial coefficients to the dual of
/// the test space.
KroneckerOperator AssembleB(const SpaceTimeDiscretization& disc);
KroneckerOperator AssembleB(const TimeMesh& time_mesh,
                            const SpatialMesh& space_mesh, int l);

/// Gram matrix of L2(J; H^1_0) on the test space: I_t (x) A_x^test.
KroneckerOperator GramY(const SpaceTimeDiscretization& disc);
KroneckerOperator GramY(const TimeMesh& time_mesh,
                        const SpatialMesh& space_mesh, int l);

/// Gram operator of L2(J; H^1_0) cap H^1(J; H^-1) on the trial space:
/// M_t (x) A_x + T_t (x) (M_x A_x^{-1} M_x), the middle factor applied with a
/// cached factorization of A_x.
class GramXOperator : public LinearOperator {
 public:
  explicit GramXOperator(const SpaceTimeDiscretization& disc);

  Eigen::Index rows() const override { return n_time_ * n_space_; }
  Eigen::Index cols() const override { return rows(); }
  void Apply(const Vector& x, Vector& y) const override;

 private:
  Eigen::Index n_time_;
  Eigen::Index n_space_;
  SparseMatrix time_mass_, time_stiffness_, space_mass_, space_stiffness_;
  SpatialSolver stiffness_solver_;
};

GramXOperator GramX(const SpaceTimeDiscretization& disc);
GramXOperator GramX(const TimeMesh& time_mesh, const SpatialMesh& space_mesh);

/// gamma_t = e_t^T (x) I: trial coefficients to spatial coefficients of
/// the trial space at time t.
KroneckerOperator TraceOperator(const SpaceTimeDiscretization& disc, double t);
KroneckerOperator TraceOperator(const TimeMesh& time_mesh,
                                const SpatialMesh& space_mesh, double t);

/// Square root of the smallest eigenvalue of the pencil
/// (B^T G B, Bh^T Gh Bh), where (B, G) use test degree 1 + l_small and
/// (Bh, Gh) test degree 1 + l_big. Dense; intended for small meshes.
double InfSupConstant(const TimeMesh& time_mesh, const SpatialMesh& space_mesh,
                      int l_small, int l_big);

}  // namespace backsolve
