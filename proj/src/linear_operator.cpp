#include "backsolve/linear_operator.hpp"

#include <stdexcept>

namespace backsolve {

Eigen::MatrixXd LinearOperator::ToDense() const {
  Eigen::MatrixXd dense(rows(), cols());
  Vector unit = Vector::Zero(cols());
  Vector column;
  for (Eigen::Index j = 0; j < cols(); ++j) {
    unit[j] = 1.0;
    Apply(unit, column);
    dense.col(j) = column;
    unit[j] = 0.0;
  }
  return dense;
}

KroneckerOperator::KroneckerOperator(std::vector<KroneckerTerm> terms) {
  for (auto& term : terms) AddTerm(std::move(term.time), std::move(term.space));
}

void KroneckerOperator::AddTerm(SparseMatrix time, SparseMatrix space) {
  if (terms_.empty()) {
    time_rows_ = time.rows();
    time_cols_ = time.cols();
    space_rows_ = space.rows();
    space_cols_ = space.cols();
  } else if (time.rows() != time_rows_ || time.cols() != time_cols_ ||
             space.rows() != space_rows_ || space.cols() != space_cols_) {
    throw std::invalid_argument(
        "KroneckerOperator: term dimensions are inconsistent");
  }
  terms_.push_back({std::move(time), std::move(space)});
}

void KroneckerOperator::Apply(const Vector& x, Vector& y) const {
  if (x.size() != cols()) {
    throw std::invalid_argument("KroneckerOperator::Apply: size mismatch");
  }
  y.setZero(rows());
  if (rows() == 0 || cols() == 0) return;
  Eigen::Map<const Eigen::MatrixXd> in(x.data(), space_cols_, time_cols_);
  Eigen::Map<Eigen::MatrixXd> out(y.data(), space_rows_, time_rows_);
  Eigen::MatrixXd scratch(space_rows_, time_cols_);
  for (const auto& term : terms_) {
    scratch.noalias() = term.space * in;
    out.noalias() += scratch * term.time.transpose();
  }
}

void KroneckerOperator::ApplyTranspose(const Vector& x, Vector& y) const {
  if (x.size() != rows()) {
    throw std::invalid_argument(
        "KroneckerOperator::ApplyTranspose: size mismatch");
  }
  y.setZero(cols());
  if (rows() == 0 || cols() == 0) return;
  Eigen::Map<const Eigen::MatrixXd> in(x.data(), space_rows_, time_rows_);
  Eigen::Map<Eigen::MatrixXd> out(y.data(), space_cols_, time_cols_);
  Eigen::MatrixXd scratch(space_cols_, time_rows_);
  for (const auto& term : terms_) {
    scratch.noalias() = term.space.transpose() * in;
    out.noalias() += scratch * term.time;
  }
}

KroneckerOperator KroneckerOperator::Transposed() const {
  KroneckerOperator result;
  for (const auto& term : terms_) {
    result.AddTerm(SparseMatrix(term.time.transpose()),
                   SparseMatrix(term.space.transpose()));
  }
  return result;
}

SparseMatrix KroneckerOperator::Materialize() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& term : terms_) {
    for (int tk = 0; tk < term.time.outerSize(); ++tk) {
      for (SparseMatrix::InnerIterator ti(term.time, tk); ti; ++ti) {
        for (int sk = 0; sk < term.space.outerSize(); ++sk) {
          for (SparseMatrix::InnerIterator si(term.space, sk); si; ++si) {
            triplets.emplace_back(ti.row() * space_rows_ + si.row(),
                                  ti.col() * space_cols_ + si.col(),
                                  ti.value() * si.value());
          }
        }
      }
    }
  }
  SparseMatrix m(rows(), cols());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace backsolve
