#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <vector>

namespace backsolve {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Matrix-free linear map between coefficient vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;

  /// y = A x; y is resized as needed.
  virtual void Apply(const Vector& x, Vector& y) const = 0;

  Vector operator*(const Vector& x) const {
    Vector y;
    Apply(x, y);
    return y;
  }

  /// Dense matrix obtained by applying the operator to unit vectors. Only
  /// meant for verification on small problems.
  Eigen::MatrixXd ToDense() const;
};

/// One tensor-product term T (x) S of a Kronecker operator.
struct KroneckerTerm {
  SparseMatrix time;
  SparseMatrix space;
};

/// Sum of tensor products sum_i T_i (x) S_i acting on time-major vectors
/// (index = time_index * n_space + space_index). The product is never formed:
/// a vector is viewed as an n_space x n_time matrix V and mapped to
/// sum_i S_i V T_i^T.
class KroneckerOperator : public LinearOperator {
 public:
  KroneckerOperator() = default;
  explicit KroneckerOperator(std::vector<KroneckerTerm> terms);

  void AddTerm(SparseMatrix time, SparseMatrix space);

  Eigen::Index rows() const override { return time_rows_ * space_rows_; }
  Eigen::Index cols() const override { return time_cols_ * space_cols_; }
  Eigen::Index time_rows() const { return time_rows_; }
  Eigen::Index time_cols() const { return time_cols_; }
  Eigen::Index space_rows() const { return space_rows_; }
  Eigen::Index space_cols() const { return space_cols_; }

  void Apply(const Vector& x, Vector& y) const override;
  void ApplyTranspose(const Vector& x, Vector& y) const;

  KroneckerOperator Transposed() const;
  const std::vector<KroneckerTerm>& terms() const { return terms_; }

  /// Explicit sum of Kronecker products; verification only.
  SparseMatrix Materialize() const;

 private:
  std::vector<KroneckerTerm> terms_;
  Eigen::Index time_rows_ = 0;
  Eigen::Index time_cols_ = 0;
  Eigen::Index space_rows_ = 0;
  Eigen::Index space_cols_ = 0;
};

/// Adapts an explicit sparse matrix.
class SparseOperator : public LinearOperator {
 public:
  explicit SparseOperator(SparseMatrix matrix) : matrix_(std::move(matrix)) {}
  Eigen::Index rows() const override { return matrix_.rows(); }
  Eigen::Index cols() const override { return matrix_.cols(); }
  void Apply(const Vector& x, Vector& y) const override { y = matrix_ * x; }

 private:
  SparseMatrix matrix_;
};

/// Identity on a space of given size.
class IdentityOperator : public LinearOperator {
 public:
  explicit IdentityOperator(Eigen::Index n) : n_(n) {}
  Eigen::Index rows() const override { return n_; }
  Eigen::Index cols() const override { return n_; }
  void Apply(const Vector& x, Vector& y) const override { y = x; }

 private:
  Eigen::Index n_;
};

}  // namespace backsolve
