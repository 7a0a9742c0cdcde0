#include "backsolve/precond.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace backsolve {

double RieszPreconditioner::DualNormSquared(const Vector& f) const {
  Vector gf;
  Apply(f, gf);
  return f.dot(gf);
}

namespace {

// I_t (x) A^{-1} on time-major vectors.
class BlockSpatialInverse : public LinearOperator {
 public:
  BlockSpatialInverse(Eigen::Index n_time, const SparseMatrix& stiffness)
      : n_time_(n_time), solver_(stiffness) {}

  Eigen::Index rows() const override { return n_time_ * solver_.size(); }
  Eigen::Index cols() const override { return rows(); }
  void Apply(const Vector& x, Vector& y) const override {
    if (x.size() != cols()) {
      throw std::invalid_argument("G_Y: size mismatch");
    }
    y = x;
    Eigen::Map<Eigen::MatrixXd> columns(y.data(), solver_.size(), n_time_);
    solver_.SolveInPlace(columns);
  }

 private:
  Eigen::Index n_time_;
  SpatialSolver solver_;
};

// Exact inverse of M_t (x) A + T_t (x) M A^{-1} M. With A V = M V diag(mu),
// V^T M V = I, the operator equals (I (x) M V)(M_t (x) mu + T_t (x) 1/mu)
// (I (x) V^T M), so the inverse is (I (x) V) blockdiag^{-1} (I (x) V^T) with
// one SPD tridiagonal temporal system per spatial mode.
class FastDiagonalizationInverse : public LinearOperator {
 public:
  explicit FastDiagonalizationInverse(const SpaceTimeDiscretization& disc)
      : n_time_(disc.time_mesh().num_nodes()),
        n_space_(disc.trial_space().size()) {
    if (n_space_ == 0) throw std::invalid_argument("G_X: empty trial space");
    const Eigen::MatrixXd stiffness(disc.space_stiffness());
    const Eigen::MatrixXd mass(disc.space_mass());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> pencil(
        stiffness, mass, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (pencil.info() != Eigen::Success) {
      throw std::runtime_error("G_X: spatial eigendecomposition failed");
    }
    modes_ = pencil.eigenvectors();
    const Vector mu = pencil.eigenvalues();

    // Tridiagonal temporal factors.
    const SparseMatrix& mt = disc.time_mass();
    const SparseMatrix& tt = disc.time_stiffness();
    Vector mt_diag(n_time_), tt_diag(n_time_), mt_off(n_time_), tt_off(n_time_);
    for (Eigen::Index i = 0; i < n_time_; ++i) {
      mt_diag[i] = mt.coeff(i, i);
      tt_diag[i] = tt.coeff(i, i);
      mt_off[i] = i + 1 < n_time_ ? mt.coeff(i + 1, i) : 0.0;
      tt_off[i] = i + 1 < n_time_ ? tt.coeff(i + 1, i) : 0.0;
    }
    // LDL^T of each mode's tridiagonal matrix: pivots and sub-diagonal
    // multipliers, stored mode-major.
    pivots_.resize(n_space_, n_time_);
    multipliers_.resize(n_space_, n_time_);
    for (Eigen::Index k = 0; k < n_space_; ++k) {
      if (!(mu[k] > 0.0)) {
        throw std::runtime_error("G_X: spatial stiffness is not positive");
      }
      const double a = mu[k];
      const double b = 1.0 / mu[k];
      double pivot = a * mt_diag[0] + b * tt_diag[0];
      pivots_(k, 0) = pivot;
      multipliers_(k, 0) = 0.0;
      for (Eigen::Index i = 1; i < n_time_; ++i) {
        const double off = a * mt_off[i - 1] + b * tt_off[i - 1];
        const double m = off / pivot;
        pivot = a * mt_diag[i] + b * tt_diag[i] - m * off;
        multipliers_(k, i) = m;
        pivots_(k, i) = pivot;
      }
    }
  }

  Eigen::Index rows() const override { return n_time_ * n_space_; }
  Eigen::Index cols() const override { return rows(); }

  void Apply(const Vector& x, Vector& y) const override {
    if (x.size() != cols()) throw std::invalid_argument("G_X: size mismatch");
    Eigen::Map<const Eigen::MatrixXd> in(x.data(), n_space_, n_time_);
    Eigen::MatrixXd modal = modes_.transpose() * in;
    for (Eigen::Index i = 1; i < n_time_; ++i) {
      modal.col(i) -= multipliers_.col(i).cwiseProduct(modal.col(i - 1));
    }
    modal = modal.cwiseQuotient(pivots_);
    for (Eigen::Index i = n_time_ - 2; i >= 0; --i) {
      modal.col(i) -= multipliers_.col(i + 1).cwiseProduct(modal.col(i + 1));
    }
    y.resize(rows());
    Eigen::Map<Eigen::MatrixXd> out(y.data(), n_space_, n_time_);
    out.noalias() = modes_ * modal;
  }

 private:
  Eigen::Index n_time_;
  Eigen::Index n_space_;
  Eigen::MatrixXd modes_;
  Eigen::MatrixXd pivots_;
  Eigen::MatrixXd multipliers_;
};

// Unpreconditioned CG on the Gram operator.
class InnerCgInverse : public LinearOperator {
 public:
  InnerCgInverse(std::shared_ptr<const LinearOperator> gram,
                 InnerCgOptions options)
      : gram_(std::move(gram)), options_(options) {}

  Eigen::Index rows() const override { return gram_->rows(); }
  Eigen::Index cols() const override { return gram_->cols(); }

  void Apply(const Vector& b, Vector& x) const override {
    x.setZero(b.size());
    const double b_norm = b.norm();
    if (b_norm == 0.0) return;
    Vector r = b;
    Vector p = r;
    Vector ap;
    double rr = r.squaredNorm();
    const double target = options_.relative_tolerance * b_norm;
    for (int it = 0; it < options_.max_iterations; ++it) {
      gram_->Apply(p, ap);
      const double alpha = rr / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      const double rr_new = r.squaredNorm();
      if (std::sqrt(rr_new) <= target) return;
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    throw std::runtime_error("G_X: inner CG did not converge in " +
                             std::to_string(options_.max_iterations) +
                             " iterations");
  }

 private:
  std::shared_ptr<const LinearOperator> gram_;
  InnerCgOptions options_;
};

}  // namespace

RieszPreconditioner MakeGY(const SpaceTimeDiscretization& disc) {
  if (disc.test_space().size() == 0) {
    throw std::invalid_argument("MakeGY: empty test space");
  }
  return RieszPreconditioner(
      NormKind::kY, Realization::kExactSolve,
      std::make_shared<BlockSpatialInverse>(disc.time_test_size(),
                                            disc.test_stiffness()));
}

RieszPreconditioner MakeGY(const TimeMesh& time_mesh,
                           const SpatialMesh& space_mesh, int l) {
  return MakeGY(SpaceTimeDiscretization(time_mesh, space_mesh, l));
}

RieszPreconditioner MakeGX(const SpaceTimeDiscretization& disc,
                           Realization realization, InnerCgOptions options) {
  if (disc.trial_space().size() == 0) {
    throw std::invalid_argument("MakeGX: empty trial space");
  }
  if (realization == Realization::kInnerCg) {
    return RieszPreconditioner(
        NormKind::kX, realization,
        std::make_shared<InnerCgInverse>(
            std::make_shared<GramXOperator>(disc), options));
  }
  return RieszPreconditioner(
      NormKind::kX, realization,
      std::make_shared<FastDiagonalizationInverse>(disc));
}

RieszPreconditioner MakeGX(const TimeMesh& time_mesh,
                           const SpatialMesh& space_mesh,
                           Realization realization) {
  return MakeGX(SpaceTimeDiscretization(time_mesh, space_mesh, 0), realization);
}

}  // namespace backsolve
