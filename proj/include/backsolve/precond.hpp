#pragma once

#include <memory>

#include "backsolve/linear_operator.hpp"
#include "backsolve/operators.hpp"

namespace backsolve {

enum class NormKind { kY, kX };

/// How a Riesz map is applied. Both are exact up to the stated tolerance.
enum class Realization {
  kExactSolve,  // direct factorizations
  kInnerCg,     // conjugate gradients on the Gram operator
};

/// SPD map G from functionals on a discrete space W^delta to W^delta, the
/// inverse of (an equivalent of) the Gram operator of W. f(G f) is the squared
/// discrete dual norm of f.
class RieszPreconditioner : public LinearOperator {
 public:
  RieszPreconditioner(NormKind norm, Realization realization,
                      std::shared_ptr<const LinearOperator> impl)
      : norm_(norm), realization_(realization), impl_(std::move(impl)) {}

  NormKind norm() const { return norm_; }
  Realization realization() const { return realization_; }

  Eigen::Index rows() const override { return impl_->rows(); }
  Eigen::Index cols() const override { return impl_->cols(); }
  void Apply(const Vector& x, Vector& y) const override { impl_->Apply(x, y); }

  /// f(G f).
  double DualNormSquared(const Vector& f) const;

 private:
  NormKind norm_;
  Realization realization_;
  std::shared_ptr<const LinearOperator> impl_;
};

/// G_Y = I_t (x) (A_x^test)^{-1}; the time factor is the identity because the
/// temporal test basis is L2-orthonormal.
RieszPreconditioner MakeGY(const SpaceTimeDiscretization& disc);
RieszPreconditioner MakeGY(const TimeMesh& time_mesh,
                           const SpatialMesh& space_mesh, int l);

struct InnerCgOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 5000;
};

/// G_X = Gram_X^{-1}. kExactSolve diagonalizes the spatial pencil (A_x, M_x)
/// densely and solves one tridiagonal temporal system per mode; kInnerCg runs
/// CG on Gram_X and throws on non-convergence.
RieszPreconditioner MakeGX(const SpaceTimeDiscretization& disc,
                           Realization realization = Realization::kExactSolve,
                           InnerCgOptions options = {});
RieszPreconditioner MakeGX(const TimeMesh& time_mesh,
                           const SpatialMesh& space_mesh,
                           Realization realization = Realization::kExactSolve);

}  // namespace backsolve
