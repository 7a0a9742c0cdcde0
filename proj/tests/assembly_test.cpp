#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "backsolve/assembly.hpp"
#include "backsolve/quadrature.hpp"

namespace backsolve {
namespace {

double Factorial(int n) { return std::tgamma(n + 1.0); }

TEST(Quadrature, GaussLegendreIsExact) {
  for (int n = 1; n <= 6; ++n) {
    const LineRule rule = GaussLegendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double sum = 0.0;
      for (size_t q = 0; q < rule.points.size(); ++q) {
        sum += rule.weights[q] * std::pow(rule.points[q], p);
      }
      EXPECT_NEAR(sum, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
    }
  }
  EXPECT_THROW(GaussLegendre(0), std::invalid_argument);
}

TEST(Quadrature, SimplexRuleIsExact) {
  // Mean of l1^a l2^b over a d-simplex is a! b! d! / (a + b + d)!.
  for (int d = 1; d <= 2; ++d) {
    for (int degree = 0; degree <= 8; ++degree) {
      const SimplexRule rule = SimplexRuleForDegree(d, degree);
      for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
          if (d == 1 && b > 0) continue;
          double sum = 0.0;
          for (size_t q = 0; q < rule.weights.size(); ++q) {
            sum += rule.weights[q] * std::pow(rule.barycentric[q][0], a) *
                   std::pow(rule.barycentric[q][1], b);
          }
          const double exact =
              Factorial(a) * Factorial(b) * Factorial(d) / Factorial(a + b + d);
          EXPECT_NEAR(sum, exact, 1e-14);
        }
      }
    }
  }
}

TEST(TimeMatrices, UniformMeshValues) {
  const TimeMesh mesh = UniformTimeMesh(0.0, 1.0, 2);
  const double h = 0.25;
  const Eigen::MatrixXd m = TimeMassTrial(mesh);
  const Eigen::MatrixXd a = TimeStiffnessTrial(mesh);
  EXPECT_NEAR(m(0, 0), h / 3, 1e-15);
  EXPECT_NEAR(m(1, 1), 2 * h / 3, 1e-15);
  EXPECT_NEAR(m(1, 2), h / 6, 1e-15);
  EXPECT_NEAR(m(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(a(1, 1), 2 / h, 1e-12);
  EXPECT_NEAR(a(1, 0), -1 / h, 1e-12);
  EXPECT_NEAR(m.sum(), 1.0, 1e-14);
  EXPECT_NEAR(a.rowwise().sum().norm(), 0.0, 1e-12);
}

TEST(TimeMatrices, LegendreTestBasis) {
  const TimeMesh mesh({0.0, 0.1, 0.4, 1.0});
  const TimeBasisSpec legendre = TimeBasisSpec::OrthonormalLegendre(1);
  const Eigen::MatrixXd gram = TimeMassTest(mesh, legendre);
  EXPECT_NEAR((gram - Eigen::MatrixXd::Identity(6, 6)).norm(), 0.0, 1e-14);

  // int phi_j' psi_i: the constant picks up the jump of the hat, the odd
  // Legendre function integrates a constant to zero.
  const Eigen::MatrixXd d = TimeDerivativeMixed(mesh, legendre);
  ASSERT_EQ(d.rows(), 6);
  ASSERT_EQ(d.cols(), 4);
  EXPECT_NEAR(d(2, 1), -1.0 / std::sqrt(0.3), 1e-14);
  EXPECT_NEAR(d(2, 2), 1.0 / std::sqrt(0.3), 1e-14);
  EXPECT_NEAR(d(3, 1), 0.0, 1e-14);

  // int phi_j psi_i: hats integrate to h/2 against the constant and
  // +-h/(2 sqrt 3) against the odd function.
  const Eigen::MatrixXd n = TimeMassMixed(mesh, legendre);
  const double h = 0.6;
  EXPECT_NEAR(n(4, 2), std::sqrt(h) / 2, 1e-14);
  EXPECT_NEAR(n(5, 2), -std::sqrt(3.0 * h) / 6, 1e-14);
  EXPECT_NEAR(n(5, 3), std::sqrt(3.0 * h) / 6, 1e-14);
  EXPECT_THROW(TimeMassMixed(mesh, TimeBasisSpec::ContinuousLinear()),
               std::invalid_argument);
}

TEST(TimeMatrices, TraceVector) {
  const TimeMesh mesh = UniformTimeMesh(0.0, 1.0, 2);
  const Vector v = TraceVector(mesh, 0.3);
  EXPECT_NEAR(v[1], 0.8, 1e-14);
  EXPECT_NEAR(v[2], 0.2, 1e-14);
  EXPECT_NEAR(v.sum(), 1.0, 1e-15);
  EXPECT_EQ(TraceVector(mesh, 1.0)[4], 1.0);
  EXPECT_EQ(TraceVector(mesh, 0.0)[0], 1.0);
}

TEST(SpaceMatrices, InitialSquareCenterHat) {
  // The center hat has gradient of length 2 on every quarter triangle.
  const SpatialMesh mesh = UnitSquareInitial();
  const Eigen::MatrixXd a = SpaceStiffness(mesh, {1, true});
  const Eigen::MatrixXd m = SpaceMass(mesh, {1, true});
  ASSERT_EQ(a.rows(), 1);
  EXPECT_NEAR(a(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(m(0, 0), 4.0 * 0.25 / 6.0, 1e-14);
}

TEST(SpaceMatrices, ExactOnPolynomials) {
  const SpatialMesh mesh = RefineUniform(UnitSquareInitial(), 3);
  for (int degree = 1; degree <= 2; ++degree) {
    const LagrangeSpace space(mesh, {degree, false});
    const SparseMatrix a = SpaceStiffness(mesh, {degree, false});
    const SparseMatrix m = SpaceMass(mesh, {degree, false});
    const Vector one = Vector::Ones(space.size());
    EXPECT_NEAR((a * one).norm(), 0.0, 1e-11);
    EXPECT_NEAR(one.dot(m * one), 1.0, 1e-13);
    const Vector lin =
        NodalInterpolant(space, [](const Vertex& x) { return 2 * x[0] + 3 * x[1]; });
    EXPECT_NEAR(lin.dot(a * lin), 13.0, 1e-11);
    // int (2x + 3y)^2 = 4/3 + 3 + 3 = 22/3
    EXPECT_NEAR(lin.dot(m * lin), 22.0 / 3.0, 1e-12);
    EXPECT_LT(SymmetryDefect(a), 1e-14);
    EXPECT_LT(SymmetryDefect(m), 1e-14);
  }
  // Quadratics are reproduced by P2 only.
  const LagrangeSpace p2(mesh, {2, false});
  const Vector q = NodalInterpolant(p2, [](const Vertex& x) { return x[0] * x[0]; });
  EXPECT_NEAR(q.dot(SpaceStiffness(mesh, {2, false}) * q), 4.0 / 3.0, 1e-12);
}

TEST(SpaceMatrices, MixedReducesToSquare) {
  const SpatialMesh mesh = RefineUniform(UnitSquareInitial(), 2);
  const MixedSpaceMatrices same = SpaceMixed(mesh, {1, true}, {1, true});
  const SparseMatrix m = SpaceMass(mesh, {1, true});
  const SparseMatrix a = SpaceStiffness(mesh, {1, true});
  EXPECT_NEAR((Eigen::MatrixXd(same.mass) - Eigen::MatrixXd(m)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((Eigen::MatrixXd(same.stiffness) - Eigen::MatrixXd(a)).norm(), 0.0,
              1e-14);

  // P1 functions are P2 functions: mixing P1 trial against the P2 test
  // basis reproduces integrals of P1 x P2 products.
  const LagrangeSpace p1(mesh, {1, true});
  const LagrangeSpace p2(mesh, {2, true});
  const MixedSpaceMatrices mixed = AssembleSpacePair(p1, p2);
  const auto f = [](const Vertex& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]); };
  const Vector u1 = NodalInterpolant(p1, f);
  const Vector u2 = NodalInterpolant(p2, f);
  const Vector u1_in_p2 = NodalInterpolant(p2, [&](const Vertex& x) {
    // Evaluate the P1 interpolant by barycentric interpolation on its cell.
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Eigen::MatrixXd g = p1.BarycentricGradients(c);
      const auto cell = mesh.cell(c);
      std::array<double, 4> bary{};
      double sum = 0.0;
      for (int i = 1; i <= 2; ++i) {
        bary[i] = g(i, 0) * (x[0] - mesh.vertex(cell[0])[0]) +
                  g(i, 1) * (x[1] - mesh.vertex(cell[0])[1]);
        sum += bary[i];
      }
      bary[0] = 1 - sum;
      if (std::min({bary[0], bary[1], bary[2]}) < -1e-12) continue;
      double value = 0.0;
      const auto dofs = p1.CellDofs(c);
      for (int i = 0; i < 3; ++i) {
        if (dofs[i] >= 0) value += bary[i] * u1[dofs[i]];
      }
      return value;
    }
    return 0.0;
  });
  const SparseMatrix m2 = SpaceMass(mesh, {2, true});
  const SparseMatrix a2 = SpaceStiffness(mesh, {2, true});
  EXPECT_NEAR(u2.dot(mixed.mass * u1), u2.dot(m2 * u1_in_p2), 1e-13);
  EXPECT_NEAR(u2.dot(mixed.stiffness * u1), u2.dot(a2 * u1_in_p2), 1e-12);
}

TEST(Loads, ProjectionAndLoadVectors) {
  const SpatialMesh mesh = RefineUniform(UnitSquareInitial(), 2);
  const LagrangeSpace space(mesh, {1, false});
  const SparseMatrix mass = SpaceMass(mesh, {1, false});
  const auto lin = [](const Vertex& x) { return 1 + x[0] - 2 * x[1]; };
  const Vector proj = L2Projection(space, mass, lin);
  const Vector interp = NodalInterpolant(space, lin);
  EXPECT_NEAR((proj - interp).norm(), 0.0, 1e-12);

  const Vector load = SpaceLoadVector(space, [](const Vertex&) { return 1.0; }, 2);
  EXPECT_NEAR(load.sum(), 1.0, 1e-14);
  EXPECT_NEAR(IntegrateSquare(mesh, lin), 1 + 1.0 / 3 + 4.0 / 3 + 1 - 2 - 1, 1e-13);

  // Space-time load of f = 1: only constants in time see it, with weight
  // sqrt(h) per element.
  const TimeMesh time = UniformTimeMesh(0.0, 1.0, 1);
  const LagrangeSpace interior(mesh, {1, true});
  const Vector f = LoadVectorF(TimeBasis(time, TimeBasisSpec::OrthonormalLegendre(1)),
                               interior, [](double, const Vertex&) { return 1.0; }, 2);
  const Vector space_load =
      SpaceLoadVector(interior, [](const Vertex&) { return 1.0; }, 2);
  const Eigen::Index n = interior.size();
  EXPECT_NEAR((f.segment(0, n) - std::sqrt(0.5) * space_load).norm(), 0.0, 1e-14);
  EXPECT_NEAR(f.segment(n, n).norm(), 0.0, 1e-14);
}

}  // namespace
}  // namespace backsolve
