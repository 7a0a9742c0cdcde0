#include "backsolve/operators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "backsolve/precond.hpp"

namespace backsolve {

SpatialSolver::SpatialSolver(const SparseMatrix& matrix) : size_(matrix.rows()) {
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  if (size_ > 0) {
    ldlt->compute(matrix);
    if (ldlt->info() != Eigen::Success) {
      throw std::runtime_error("SpatialSolver: factorization failed");
    }
  }
  ldlt_ = std::move(ldlt);
}

void SpatialSolver::SolveInPlace(Eigen::Ref<Eigen::MatrixXd> columns) const {
  if (size_ == 0) return;
  const Eigen::MatrixXd solved = ldlt_->solve(columns);
  columns = solved;
}

Vector SpatialSolver::Solve(const Vector& rhs) const {
  if (size_ == 0) return rhs;
  return ldlt_->solve(rhs);
}

SpaceTimeDiscretization::SpaceTimeDiscretization(const TimeMesh& time_mesh,
                                                 const SpatialMesh& space_mesh,
                                                 int l, int time_test_degree)
    : time_mesh_(time_mesh),
      l_(l),
      time_test_spec_(TimeBasisSpec::OrthonormalLegendre(time_test_degree)),
      trial_space_(space_mesh, {1, true}),
      test_space_(space_mesh, {1 + l, true}) {
  if (l < 0 || l > 1) {
    throw std::invalid_argument("SpaceTimeDiscretization: l must be 0 or 1");
  }
  time_mass_ = TimeMassTrial(time_mesh_);
  time_stiffness_ = TimeStiffnessTrial(time_mesh_);
  time_mass_mixed_ = TimeMassMixed(time_mesh_, time_test_spec_);
  time_derivative_mixed_ = TimeDerivativeMixed(time_mesh_, time_test_spec_);
  const MixedSpaceMatrices trial = AssembleSpacePair(trial_space_, trial_space_);
  space_mass_ = trial.mass;
  space_stiffness_ = trial.stiffness;
  if (l_ == 0) {
    mixed_ = trial;
    test_stiffness_ = trial.stiffness;
  } else {
    mixed_ = AssembleSpacePair(trial_space_, test_space_);
    test_stiffness_ = AssembleSpacePair(test_space_, test_space_).stiffness;
  }
}

KroneckerOperator AssembleB(const SpaceTimeDiscretization& disc) {
  if (disc.trial_size() == 0 || disc.test_size() == 0) {
    throw std::invalid_argument("AssembleB: empty trial or test space");
  }
  KroneckerOperator b;
  b.AddTerm(disc.time_derivative_mixed(), disc.mixed_mass());
  b.AddTerm(disc.time_mass_mixed(), disc.mixed_stiffness());
  return b;
}

KroneckerOperator AssembleB(const TimeMesh& time_mesh,
                            const SpatialMesh& space_mesh, int l) {
  return AssembleB(SpaceTimeDiscretization(time_mesh, space_mesh, l));
}

KroneckerOperator GramY(const SpaceTimeDiscretization& disc) {
  SparseMatrix identity(disc.time_test_size(), disc.time_test_size());
  identity.setIdentity();
  KroneckerOperator gram;
  gram.AddTerm(std::move(identity), disc.test_stiffness());
  return gram;
}

KroneckerOperator GramY(const TimeMesh& time_mesh,
                        const SpatialMesh& space_mesh, int l) {
  return GramY(SpaceTimeDiscretization(time_mesh, space_mesh, l));
}

GramXOperator::GramXOperator(const SpaceTimeDiscretization& disc)
    : n_time_(disc.time_mesh().num_nodes()),
      n_space_(disc.trial_space().size()),
      time_mass_(disc.time_mass()),
      time_stiffness_(disc.time_stiffness()),
      space_mass_(disc.space_mass()),
      space_stiffness_(disc.space_stiffness()),
      stiffness_solver_(disc.space_stiffness()) {
  if (n_space_ == 0) {
    throw std::invalid_argument("GramX: empty trial space");
  }
}

void GramXOperator::Apply(const Vector& x, Vector& y) const {
  if (x.size() != rows()) {
    throw std::invalid_argument("GramXOperator::Apply: size mismatch");
  }
  y.setZero(rows());
  Eigen::Map<const Eigen::MatrixXd> in(x.data(), n_space_, n_time_);
  Eigen::Map<Eigen::MatrixXd> out(y.data(), n_space_, n_time_);
  Eigen::MatrixXd scratch = space_stiffness_ * in;
  out.noalias() += scratch * time_mass_.transpose();
  scratch = space_mass_ * in;
  stiffness_solver_.SolveInPlace(scratch);
  scratch = space_mass_ * scratch;
  out.noalias() += scratch * time_stiffness_.transpose();
}

GramXOperator GramX(const SpaceTimeDiscretization& disc) {
  return GramXOperator(disc);
}

GramXOperator GramX(const TimeMesh& time_mesh, const SpatialMesh& space_mesh) {
  return GramXOperator(SpaceTimeDiscretization(time_mesh, space_mesh, 0));
}

KroneckerOperator TraceOperator(const SpaceTimeDiscretization& disc, double t) {
  const Vector e = TraceVector(disc.time_mesh(), t);
  SparseMatrix row(1, e.size());
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    if (e[j] != 0.0) row.insert(0, j) = e[j];
  }
  SparseMatrix identity(disc.trial_space().size(), disc.trial_space().size());
  identity.setIdentity();
  KroneckerOperator trace;
  trace.AddTerm(std::move(row), std::move(identity));
  return trace;
}

KroneckerOperator TraceOperator(const TimeMesh& time_mesh,
                                const SpatialMesh& space_mesh, double t) {
  return TraceOperator(SpaceTimeDiscretization(time_mesh, space_mesh, 0), t);
}

namespace {

// z -> B^T G B z.
class NormalOperator : public LinearOperator {
 public:
  NormalOperator(KroneckerOperator b, RieszPreconditioner g)
      : b_(std::move(b)), g_(std::move(g)) {}
  Eigen::Index rows() const override { return b_.cols(); }
  Eigen::Index cols() const override { return b_.cols(); }
  void Apply(const Vector& x, Vector& y) const override {
    Vector bx, gbx;
    b_.Apply(x, bx);
    g_.Apply(bx, gbx);
    b_.ApplyTranspose(gbx, y);
  }

 private:
  KroneckerOperator b_;
  RieszPreconditioner g_;
};

}  // namespace

double InfSupConstant(const TimeMesh& time_mesh, const SpatialMesh& space_mesh,
                      int l_small, int l_big) {
  if (l_small > l_big) {
    throw std::invalid_argument("InfSupConstant: need l_small <= l_big");
  }
  if (l_small == l_big) return 1.0;
  const SpaceTimeDiscretization small(time_mesh, space_mesh, l_small);
  const SpaceTimeDiscretization big(time_mesh, space_mesh, l_big);
  if (small.trial_size() == 0) {
    throw std::invalid_argument("InfSupConstant: empty trial space");
  }
  const Eigen::MatrixXd lhs =
      NormalOperator(AssembleB(small), MakeGY(small)).ToDense();
  const Eigen::MatrixXd rhs =
      NormalOperator(AssembleB(big), MakeGY(big)).ToDense();
  // Symmetrize away rounding before the Cholesky-based pencil solver.
  const Eigen::MatrixXd lhs_sym = 0.5 * (lhs + lhs.transpose());
  const Eigen::MatrixXd rhs_sym = 0.5 * (rhs + rhs.transpose());
  const Eigen::LLT<Eigen::MatrixXd> chol(rhs_sym);
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error(
        "InfSupConstant: right-hand matrix of the pencil is singular");
  }
  // L^{-1} lhs L^{-T} has the pencil's eigenvalues.
  Eigen::MatrixXd reduced = chol.matrixL().solve(lhs_sym);
  reduced = chol.matrixL().solve(reduced.transpose()).transpose();
  reduced = 0.5 * (reduced + reduced.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pencil(
      reduced, Eigen::EigenvaluesOnly);
  const double lambda_min = pencil.eigenvalues().minCoeff();
  return std::sqrt(std::max(lambda_min, 0.0));
}

}  // namespace backsolve
