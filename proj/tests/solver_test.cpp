#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "backsolve/manufactured.hpp"
#include "backsolve/solver.hpp"
#include "test_util.hpp"

namespace backsolve {
namespace {

using testing::RandomVector;
using testing::RelativeError;
constexpr double kPi = std::numbers::pi;

SparseMatrix RandomSpd(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j) a.col(j) = RandomVector(n, rng);
  Eigen::MatrixXd spd = a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  return spd.sparseView();
}

TEST(Epsilon, Strategies) {
  EXPECT_DOUBLE_EQ(ChooseEpsilon(EpsilonStrategy::kPlain, 16, 2, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(ChooseEpsilon(EpsilonStrategy::kDataAware, 16, 2, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(ChooseEpsilon(EpsilonStrategy::kPlain, 8, 1, 0.0), 0.125);
  EXPECT_DOUBLE_EQ(ChooseEpsilon(EpsilonStrategy::kExplicit, 8, 1, 0.0, 0.3), 0.3);
  EXPECT_THROW(ChooseEpsilon(EpsilonStrategy::kPlain, 0, 2, 0.0),
               std::invalid_argument);
  EXPECT_THROW(ChooseEpsilon(EpsilonStrategy::kDataAware, 4, 2, -1.0),
               std::invalid_argument);
}

TEST(Pcg, SolvesSpdSystem) {
  const SparseOperator a(RandomSpd(30, 1));
  std::mt19937_64 rng(7);
  const Vector b = RandomVector(30, rng);
  const Vector exact = Eigen::MatrixXd(RandomSpd(30, 1)).ldlt().solve(b);
  for (bool smoothing : {true, false}) {
    PcgOptions options;
    options.threshold = 1e-24;
    options.smoothing = smoothing;
    const PcgResult result = Pcg(a, b, IdentityOperator(30), options);
    EXPECT_TRUE(result.report.converged);
    EXPECT_LT(RelativeError(result.coefficients, exact), 1e-9);
    EXPECT_EQ(result.report.history.size(),
              static_cast<size_t>(result.report.iterations + 1));
    EXPECT_LE(result.report.stopping_value, options.threshold);
  }
}

TEST(Pcg, ExactPreconditionerConvergesInOneStep) {
  const SparseMatrix m = RandomSpd(20, 2);
  const SparseOperator a(m);
  const SparseOperator inverse(Eigen::MatrixXd(Eigen::MatrixXd(m).inverse()).sparseView());
  std::mt19937_64 rng(3);
  PcgOptions options;
  options.threshold = 1e-20;
  const PcgResult result = Pcg(a, RandomVector(20, rng), inverse, options);
  EXPECT_EQ(result.report.iterations, 1);
}

TEST(Pcg, SmoothedHistoryIsNonincreasing) {
  const SparseOperator a(RandomSpd(60, 5));
  std::mt19937_64 rng(1);
  PcgOptions options;
  options.threshold = 1e-26;
  const PcgResult result =
      Pcg(a, RandomVector(60, rng), IdentityOperator(60), options);
  const auto& h = result.report.history;
  for (size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
}

TEST(Pcg, FlagsNonConvergence) {
  const SparseOperator a(RandomSpd(40, 4));
  std::mt19937_64 rng(2);
  PcgOptions options;
  options.threshold = 1e-30;
  options.max_iterations = 3;
  const PcgResult result =
      Pcg(a, RandomVector(40, rng), IdentityOperator(40), options);
  EXPECT_FALSE(result.report.converged);
  EXPECT_EQ(result.report.iterations, 3);
  EXPECT_GT(result.report.stopping_value, options.threshold);
}

TEST(Pcg, RejectsBadInput) {
  const SparseOperator a(RandomSpd(5, 4));
  PcgOptions options;
  options.threshold = 0.0;
  EXPECT_THROW(Pcg(a, Vector::Ones(5), IdentityOperator(5), options),
               std::invalid_argument);
  options.threshold = 1e-10;
  EXPECT_THROW(Pcg(a, Vector::Ones(4), IdentityOperator(5), options),
               std::invalid_argument);
  const SparseOperator negative(SparseMatrix(-Eigen::MatrixXd(RandomSpd(5, 4)).sparseView()));
  EXPECT_THROW(Pcg(negative, Vector::Ones(5), IdentityOperator(5), options),
               std::runtime_error);
}

TEST(Pcg, ZeroRightHandSide) {
  const SparseOperator a(RandomSpd(5, 4));
  const PcgResult result = Pcg(a, Vector::Zero(5), IdentityOperator(5), {});
  EXPECT_EQ(result.report.iterations, 0);
  EXPECT_TRUE(result.report.converged);
  EXPECT_EQ(result.coefficients.norm(), 0.0);
}

struct SmallProblem {
  SpaceTimeDiscretization disc{UniformTimeMesh(0.0, 1.0, 2),
                               RefineUniform(UnitSquareInitial(), 2), 0};
};

TEST(LeastSquares, SymmetricQuadraticFunctional) {
  SmallProblem p;
  const ManufacturedSolution exact = PolynomialInTime(2);
  const LagrangeSpace& space = p.disc.trial_space();
  const EndTimeData g = EndTimeData::FromFunction(
      space, [&](const Vertex& x) { return exact.u(1.0, x); }, 8);
  const LeastSquaresSystem system = BuildSystem(p.disc, 0.2, exact.f, g, 6);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5; ++i) {
    const Vector x = RandomVector(system.cols(), rng);
    const Vector y = RandomVector(system.cols(), rng);
    EXPECT_NEAR(x.dot(system * y), y.dot(system * x),
                1e-12 * std::abs(x.dot(system * y)));
  }
  // F(z) = F(z*) + (z - z*)^T S (z - z*) around the minimizer z* = S^{-1} h.
  const Eigen::MatrixXd s = system.ToDense();
  const Vector z_star = s.ldlt().solve(system.rhs());
  const Vector dz = RandomVector(system.cols(), rng);
  EXPECT_NEAR(system.Functional(z_star + dz),
              system.Functional(z_star) + dz.dot(s * dz),
              1e-10 * system.Functional(z_star + dz));
  EXPECT_GE(system.Functional(z_star), -1e-12);
}

TEST(LeastSquares, RecoversTrialSpaceFunctionWithoutRegularization) {
  // Data generated by a trial function z0: F = B z0, g = gamma_T z0. With
  // eps = 0 the functional vanishes at z0 and nowhere else.
  SmallProblem p;
  std::mt19937_64 rng(21);
  const Vector z0 = RandomVector(p.disc.trial_size(), rng);
  const Eigen::Index n = p.disc.trial_space().size();
  const Vector end = z0.tail(n);
  EndTimeData g;
  g.load = p.disc.space_mass() * end;
  g.norm_squared = end.dot(g.load);
  const LeastSquaresSystem system(p.disc, 0.0, AssembleB(p.disc) * z0, g);
  EXPECT_NEAR(system.Functional(z0), 0.0, 1e-12);
  PcgOptions options;
  options.threshold = 1e-28;
  const PcgResult result = Pcg(system, system.rhs(), MakeGX(p.disc), options);
  EXPECT_TRUE(result.report.converged);
  EXPECT_LT(RelativeError(result.coefficients, z0), 1e-9);
}

TEST(EndTime, AddFiniteElement) {
  // The only interior hat of the initial square is the pyramid
  // 1 - 2 max(|x - 1/2|, |y - 1/2|).
  const SpatialMesh mesh = UnitSquareInitial();
  const LagrangeSpace space(mesh, {1, true});
  const SparseMatrix mass = SpaceMass(mesh, {1, true});
  const auto g = [](const Vertex& x) { return std::sin(kPi * x[0]) * x[1]; };
  const auto hat = [](const Vertex& x) {
    return 1 - 2 * std::max(std::abs(x[0] - 0.5), std::abs(x[1] - 0.5));
  };
  EndTimeData data = EndTimeData::FromFunction(space, g, 12);
  data.AddFiniteElement(Vector::Constant(1, 0.7), mass);
  const EndTimeData direct = EndTimeData::FromFunction(
      space, [&](const Vertex& x) { return g(x) + 0.7 * hat(x); }, 12);
  EXPECT_NEAR(data.norm_squared, direct.norm_squared, 1e-12);
  EXPECT_NEAR(data.load[0], direct.load[0], 1e-12);
  EXPECT_THROW(data.AddFiniteElement(Vector(2), mass), std::invalid_argument);
}

TEST(Errors, NormsOfTheExactSolution) {
  // With zero coefficients the errors are the norms of u itself:
  // ||u(t)|| = (1 + t^3) / 2, int (1 + t^3)^2 = 23/14,
  // ||grad sin sin||^2 = pi^2 / 2.
  const SpaceTimeDiscretization disc(UniformTimeMesh(0.0, 1.0, 3),
                                     RefineUniform(UnitSquareInitial(), 6), 0);
  const ManufacturedSolution u = PolynomialInTime(2);
  const ErrorReport report =
      ComputeErrors(disc, Vector::Zero(disc.trial_size()), u.u, u.grad_u,
                    {0.0, 0.5, 1.0});
  EXPECT_NEAR(report.l2_slices.at(0.0), 0.5, 1e-6);
  EXPECT_NEAR(report.l2_slices.at(0.5), 1.125 / 2, 1e-6);
  EXPECT_NEAR(report.l2_slices.at(1.0), 1.0, 1e-6);
  EXPECT_NEAR(report.l2l2, std::sqrt(23.0 / 14 / 4), 1e-6);
  EXPECT_NEAR(report.l2h1, std::sqrt(23.0 / 14 * (0.25 + kPi * kPi / 2)), 1e-5);
  EXPECT_EQ(report.dofs, disc.trial_size());
}

TEST(Errors, InterpolantErrorsConverge) {
  const ManufacturedSolution u = PolynomialInTime(2);
  std::vector<double> dofs, h1, x_err;
  for (int k = 1; k <= 4; ++k) {
    const SpaceTimeDiscretization disc(UniformTimeMesh(0.0, 1.0, k),
                                       RefineUniform(UnitSquareInitial(), 2 * k), 0);
    const ErrorReport report = ComputeErrors(
        disc, SpaceTimeInterpolant(disc, u.u), u.u, u.grad_u, {1.0});
    dofs.push_back(static_cast<double>(report.dofs));
    h1.push_back(report.l2h1);
    x_err.push_back(InterpolationErrorX(disc, u));
    EXPECT_GE(x_err.back(), 0.0);
  }
  // First order in h = DoFs^{-1/3} for the gradient.
  EXPECT_NEAR(FitRate(dofs, h1), -1.0 / 3, 0.05);
  EXPECT_NEAR(FitRate(dofs, x_err), -1.0 / 3, 0.05);
}

TEST(Errors, FitRate) {
  EXPECT_NEAR(FitRate({10, 100, 1000}, {1, 0.1, 0.01}), -1.0, 1e-12);
  EXPECT_NEAR(FitRate({1, 8, 64, 512}, {4, 2, 1, 0.5}), -1.0 / 3, 1e-12);
  EXPECT_THROW(FitRate({1, 2}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(FitRate({1, 2, 3}, {1, 0, 2}), std::invalid_argument);
}

TEST(Stopping, ThresholdRules) {
  EXPECT_DOUBLE_EQ(StoppingThreshold(StoppingRule::kLoose, 0.1, 0.2, 0.5, 0.1),
                   0.09 / 0.5);
  EXPECT_DOUBLE_EQ(
      StoppingThreshold(StoppingRule::kConsistent, 0.1, 0.2, 0.5, 0.1),
      0.01 * 0.09);
  EXPECT_TRUE(std::isinf(StoppingThreshold(StoppingRule::kLoose, 0.1, 0, 0, 1)));
  EXPECT_THROW(StoppingThreshold(StoppingRule::kLoose, -1, 0, 1, 1),
               std::invalid_argument);
}

TEST(Manufactured, DataIsConsistent) {
  // f = du/dt - Laplace u checked by central differences.
  for (int d = 1; d <= 2; ++d) {
    for (const std::string name : {"polynomial", "heat-mode", "zero"}) {
      const ManufacturedSolution m = ManufacturedByName(name, d);
      const Vertex x{0.31, 0.67, 0.0};
      const double t = 0.4, h = 1e-4;
      double laplace = 0.0;
      for (int i = 0; i < d; ++i) {
        Vertex xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        laplace += (m.u(t, xp) - 2 * m.u(t, x) + m.u(t, xm)) / (h * h);
        EXPECT_NEAR(m.grad_u(t, x)[i], (m.u(t, xp) - m.u(t, xm)) / (2 * h),
                    1e-6 * (1 + std::abs(m.u(t, x))));
      }
      const double dt = (m.u(t + h, x) - m.u(t - h, x)) / (2 * h);
      EXPECT_NEAR(m.du_dt(t, x), dt, 1e-5 * (1 + std::abs(dt)));
      EXPECT_NEAR(m.f(t, x), dt - laplace, 1e-4 * (1 + std::abs(dt)));
    }
  }
  EXPECT_THROW(ManufacturedByName("nope", 2), std::invalid_argument);
}

TEST(Backward, RequiresThresholdWithoutExactSolution) {
  BackwardProblem problem(UniformTimeMesh(0.0, 1.0, 1),
                          RefineUniform(UnitSquareInitial(), 2));
  problem.reg_epsilon = 0.1;
  problem.g.load = Vector::Zero(LagrangeSpace(problem.space_mesh, {1, true}).size());
  EXPECT_THROW(SolveBackward(problem), std::invalid_argument);
  problem.threshold = 1e-12;
  const BackwardResult result = SolveBackward(problem);
  EXPECT_FALSE(result.errors.has_value());
  EXPECT_EQ(result.coefficients.norm(), 0.0);
}

TEST(Backward, MinimizerBeatsInterpolant) {
  for (int k = 1; k <= 2; ++k) {
    BackwardProblem problem(UniformTimeMesh(0.0, 1.0, k),
                            RefineUniform(UnitSquareInitial(), 2 * k));
    const ManufacturedSolution u = PolynomialInTime(2);
    const LagrangeSpace space(problem.space_mesh, {1, true});
    problem.reg_epsilon = std::pow(problem.time_mesh.num_nodes() * space.size(), -0.5);
    problem.f = u.f;
    problem.g = EndTimeData::FromFunction(
        space, [&](const Vertex& x) { return u.u(1.0, x); }, 8);
    problem.exact = u;
    problem.slice_times = {1.0};
    const BackwardResult result = SolveBackward(problem);
    EXPECT_TRUE(result.report.converged);
    const SpaceTimeDiscretization disc(problem.time_mesh, problem.space_mesh, 0);
    const LeastSquaresSystem system =
        BuildSystem(disc, problem.reg_epsilon, u.f, problem.g, 6);
    EXPECT_LE(system.Functional(result.coefficients),
              system.Functional(SpaceTimeInterpolant(disc, u.u)));
    ASSERT_TRUE(result.errors.has_value());
    EXPECT_GT(result.errors->l2_slices.at(1.0), 0.0);
  }
}

}  // namespace
}  // namespace backsolve
