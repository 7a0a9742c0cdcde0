#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <random>

#include "backsolve/linear_operator.hpp"
#include "backsolve/operators.hpp"
#include "backsolve/precond.hpp"
#include "test_util.hpp"

namespace backsolve {
namespace {

using testing::RandomVector;
using testing::RelativeError;

TEST(Kronecker, MatchesExplicitProduct) {
  std::mt19937_64 rng(3);
  SparseMatrix t1 = Eigen::MatrixXd::Random(3, 4).sparseView();
  SparseMatrix s1 = Eigen::MatrixXd::Random(5, 2).sparseView();
  SparseMatrix t2 = Eigen::MatrixXd::Random(3, 4).sparseView();
  SparseMatrix s2 = Eigen::MatrixXd::Random(5, 2).sparseView();
  KroneckerOperator op({{t1, s1}, {t2, s2}});
  EXPECT_EQ(op.rows(), 15);
  EXPECT_EQ(op.cols(), 8);
  // Time-major layout: entry ((i, a), (j, b)) = sum T(i, j) S(a, b).
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(15, 8);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 2; ++b)
          dense(i * 5 + a, j * 2 + b) = t1.coeff(i, j) * s1.coeff(a, b) +
                                        t2.coeff(i, j) * s2.coeff(a, b);
  EXPECT_NEAR((Eigen::MatrixXd(op.Materialize()) - dense).norm(), 0.0, 1e-14);
  const Vector x = RandomVector(8, rng);
  EXPECT_LT(RelativeError(op * x, dense * x), 1e-14);
  const Vector y = RandomVector(15, rng);
  Vector z;
  op.ApplyTranspose(y, z);
  EXPECT_LT(RelativeError(z, dense.transpose() * y), 1e-14);
  EXPECT_LT(RelativeError(op.Transposed() * y, dense.transpose() * y), 1e-14);
  EXPECT_THROW(op * Vector(3), std::invalid_argument);
  EXPECT_THROW(op.AddTerm(SparseMatrix(2, 2), SparseMatrix(5, 2)),
               std::invalid_argument);
}

class BOracle : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(BOracle, KroneckerBMatchesSpaceTimeAssembly) {
  const auto [d, level, l] = GetParam();
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, level);
  const SpatialMesh space = d == 2 ? RefineUniform(UnitSquareInitial(), 2 * level)
                                   : RefineUniform(UnitIntervalMesh(1), level + 1);
  const Eigen::MatrixXd dense = testing::DenseSpaceTimeB(time, space, l);
  const Eigen::MatrixXd kron = AssembleB(time, space, l).ToDense();
  ASSERT_EQ(dense.rows(), kron.rows());
  ASSERT_EQ(dense.cols(), kron.cols());
  EXPECT_LT((dense - kron).norm(), 1e-12 * dense.norm());
}

INSTANTIATE_TEST_SUITE_P(Meshes, BOracle,
                         ::testing::Values(std::tuple{1, 1, 0}, std::tuple{1, 2, 1},
                                           std::tuple{2, 1, 0}, std::tuple{2, 1, 1},
                                           std::tuple{2, 2, 0}));

TEST(GramX, MatchesDenseFormula) {
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 2);
  const SpatialMesh space = RefineUniform(UnitSquareInitial(), 2);
  const SpaceTimeDiscretization disc(time, space, 0);
  const Eigen::MatrixXd mt = disc.time_mass(), at = disc.time_stiffness();
  const Eigen::MatrixXd mx = disc.space_mass(), ax = disc.space_stiffness();
  const Eigen::MatrixXd middle = mx * ax.inverse() * mx;
  Eigen::MatrixXd expected(mt.rows() * mx.rows(), mt.cols() * mx.cols());
  for (int i = 0; i < mt.rows(); ++i)
    for (int j = 0; j < mt.cols(); ++j)
      expected.block(i * mx.rows(), j * mx.cols(), mx.rows(), mx.cols()) =
          mt(i, j) * ax + at(i, j) * middle;
  const Eigen::MatrixXd gram = GramX(disc).ToDense();
  EXPECT_LT((gram - expected).norm(), 1e-12 * expected.norm());
}

TEST(GramX, EigenvaluesFromOneDimensionalPencils) {
  // Gram_X is diagonalized by products of the temporal pencil (T_t, M_t)
  // and spatial pencil (A_x, M_x) eigenvectors; in the spatial mode with
  // eigenvalue mu the temporal operator is mu M_t + T_t / mu.
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 2);
  const SpatialMesh space = RefineUniform(UnitSquareInitial(), 2);
  const SpaceTimeDiscretization disc(time, space, 0);
  const Eigen::MatrixXd mx = disc.space_mass(), ax = disc.space_stiffness();
  const Eigen::MatrixXd mt = disc.time_mass(), at = disc.time_stiffness();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> spatial(ax, mx);
  std::vector<double> expected;
  for (int m = 0; m < spatial.eigenvalues().size(); ++m) {
    const double mu = spatial.eigenvalues()[m];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> temporal(mu * mt + at / mu);
    for (int i = 0; i < temporal.eigenvalues().size(); ++i) {
      expected.push_back(temporal.eigenvalues()[i]);
    }
  }
  std::sort(expected.begin(), expected.end());
  // Compare with the pencil (Gram_X, I_t x M_x) so that spatial modes are
  // M_x-orthonormal.
  const Eigen::MatrixXd gram = GramX(disc).ToDense();
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(gram.rows(), gram.cols());
  for (int i = 0; i < mt.rows(); ++i)
    weight.block(i * mx.rows(), i * mx.rows(), mx.rows(), mx.cols()) = mx;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> full(gram, weight);
  ASSERT_EQ(full.eigenvalues().size(), static_cast<Eigen::Index>(expected.size()));
  for (size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(full.eigenvalues()[i], expected[i], 1e-10 * expected.back());
  }
}

TEST(GramY, IsBlockStiffness) {
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 1);
  const SpatialMesh space = RefineUniform(UnitSquareInitial(), 2);
  const SpaceTimeDiscretization disc(time, space, 1);
  const Eigen::MatrixXd a = disc.test_stiffness();
  const Eigen::MatrixXd gram = GramY(disc).ToDense();
  ASSERT_EQ(gram.rows(), 4 * a.rows());
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Eigen::MatrixXd block =
          gram.block(i * a.rows(), j * a.rows(), a.rows(), a.rows());
      EXPECT_NEAR((block - (i == j ? a : Eigen::MatrixXd::Zero(a.rows(), a.rows())))
                      .norm(),
                  0.0, 1e-13);
    }
  }
}

TEST(Trace, PicksTimeSlice) {
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 2);
  const SpatialMesh space = RefineUniform(UnitSquareInitial(), 2);
  const SpaceTimeDiscretization disc(time, space, 0);
  std::mt19937_64 rng(5);
  const Vector x = RandomVector(disc.trial_size(), rng);
  const Eigen::Index n = disc.trial_space().size();
  EXPECT_LT(RelativeError(TraceOperator(disc, 1.0) * x, x.tail(n)), 1e-15);
  EXPECT_LT(RelativeError(TraceOperator(disc, 0.0) * x, x.head(n)), 1e-15);
  const Vector mid = TraceOperator(disc, 0.125) * x;
  EXPECT_LT(RelativeError(mid, 0.5 * (x.head(n) + x.segment(n, n))), 1e-15);
}

TEST(InfSup, BoundedAndTrivialForEqualSpaces) {
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 1);
  const SpatialMesh space = RefineUniform(UnitSquareInitial(), 2);
  EXPECT_EQ(InfSupConstant(time, space, 1, 1), 1.0);
  const double gamma = InfSupConstant(time, space, 0, 1);
  EXPECT_GT(gamma, 0.1);
  EXPECT_LE(gamma, 1.0 + 1e-12);
  EXPECT_THROW(InfSupConstant(time, space, 1, 0), std::invalid_argument);
}

TEST(Discretization, RejectsBadL) {
  EXPECT_THROW(SpaceTimeDiscretization(UniformTimeMesh(0, 1, 1),
                                       UnitSquareInitial(), 2),
               std::invalid_argument);
}

}  // namespace
}  // namespace backsolve
