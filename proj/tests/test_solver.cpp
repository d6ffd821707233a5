#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cylasym/errors.hpp"
#include "cylasym/ode1d.hpp"
#include "cylasym/solver.hpp"

using namespace cylasym;

namespace {

const Nonlinearity kP23 = Nonlinearity::power(2, 3);
const Nonlinearity kLinear = Nonlinearity::power(1, 1);

GridFunction random_field(const RectGrid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(g.node_count());
  for (auto& x : v) x = u(rng);
  return {g, v};
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Energy, Examples) {
  const auto g = build_grid(0.5, {0, 1}, 5, 5);
  EXPECT_EQ(energy(GridFunction::constant(g, 0), Nonlinearity::zero(), 2, 0), 0.0);
  Eigen::VectorXd x(g.node_count());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) x[g.index(i, j)] = g.x(i);
  EXPECT_NEAR(energy({g, x}, Nonlinearity::zero(), 2, 0), 0.5, 1e-14);
  EXPECT_NEAR(energy(GridFunction::constant(g, 2), kP23, 2, 0), 8.0, 1e-13);
  // the eps^p shift keeps constants at the F term alone
  EXPECT_NEAR(energy(GridFunction::constant(g, 2), kP23, 1.5, 1e-2), 8.0, 1e-13);
  EXPECT_THROW(energy(GridFunction::constant(g, 2), kP23, 2, -1), DomainError);
}

TEST(EnergyGradient, CentralDifferences) {
  std::mt19937_64 rng(2024);
  const auto g = build_grid(1, {0, 1}, 9, 7);
  const std::vector<Nonlinearity> nls{kP23, Nonlinearity::exp_minus_one(1)};
  for (const auto& nl : nls)
    for (double p : {1.5, 2.0, 3.0})
      for (double eps : {1e-2, 1e-4}) {
        const auto u = random_field(g, rng, 0.5, 1.5);
        const Eigen::VectorXd grad = energy_gradient(u, nl, p, eps);
        const double delta = 1e-6;
        for (int k = 0; k < 50; ++k) {
          const auto v = random_field(g, rng, -1, 1);
          const double exact = grad.dot(v.values);
          const double plus = energy({g, u.values + delta * v.values}, nl, p, eps);
          const double minus = energy({g, u.values - delta * v.values}, nl, p, eps);
          const double fd = (plus - minus) / (2 * delta);
          EXPECT_NEAR(fd, exact, 1e-5 * std::abs(exact)) << "p=" << p << " eps=" << eps;
        }
      }
}

TEST(EnergyGradient, ConstantsAreStationaryWithoutAbsorption) {
  const auto g = build_grid(1, {0, 1}, 7, 7);
  for (double p : {1.5, 2.0, 3.0})
    EXPECT_EQ(energy_gradient(GridFunction::constant(g, 3.0), Nonlinearity::zero(), p, 1e-3)
                  .cwiseAbs()
                  .maxCoeff(),
              0.0);
}

TEST(SolveDirichlet, ConstantDataWithoutAbsorption) {
  const auto g = build_grid(2, {0, 1}, 17, 9);
  const auto cfg = default_solver_config(2, g);
  const auto r = solve_dirichlet(g, Nonlinearity::zero(), cfg, DirichletData::constant(1.25),
                                 GridFunction::constant(g, 0));
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.iterations[0], 1);
  EXPECT_LE((r.solution.values.array() - 1.25).abs().maxCoeff(), 1e-12);
  EXPECT_LE(r.residual, std::max(r.tol, r.residual_floor));
}

TEST(SolveDirichlet, BoundaryDataExactAndInteriorOptimal) {
  const auto g = build_grid(1, {0, 1}, 17, 9);
  for (double p : {1.5, 2.0, 3.0}) {
    auto cfg = default_solver_config(p, g);
    const auto data = DirichletData::cross_affine(g.cross(), 1.0, 2.0);
    const auto r = solve_dirichlet(g, kP23, cfg, data);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (g.on_boundary(i, j)) {
          EXPECT_EQ(r.solution.at(i, j), data.g(g.x(i), g.y(j)));
        }
    const Eigen::VectorXd grad = energy_gradient(r.solution, kP23, p, r.eps_final);
    double worst = 0;
    for (int j = 1; j + 1 < g.ny(); ++j)
      for (int i = 1; i + 1 < g.nx(); ++i) worst = std::max(worst, std::abs(grad[g.index(i, j)]));
    EXPECT_LE(worst / (g.hx() * g.hy()), std::max(r.tol, r.residual_floor) * (1 + 1e-6));
    EXPECT_TRUE(std::holds_alternative<DirichletMode>(r.boundary_mode));
  }
}

TEST(SolveDirichlet, CoshBenchmarkAtMidCylinder) {
  const auto g = build_grid(8, {0, 1}, 257, 65);
  const auto r = solve_dirichlet(g, kLinear, default_solver_config(2, g), DirichletData::constant(1));
  const int mid = 128;
  double worst = 0;
  for (int j = 0; j < g.ny(); ++j)
    worst = std::max(worst, std::abs(r.solution.at(mid, j) - std::cosh(g.y(j) - 0.5) / std::cosh(0.5)));
  EXPECT_LE(worst, 1e-3);
  EXPECT_NEAR(r.solution.at(mid, 32), 0.88681, 1e-4);
}

TEST(SolveDirichlet, ComparisonPrinciple) {
  const auto g = build_grid(1, {0, 1}, 17, 9);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto cfg = default_solver_config(p, g);
    for (int k = 0; k < 4; ++k) {
      // ordered non-constant data: a perturbation that is nonnegative everywhere
      const double c = u(rng), bump = u(rng);
      DirichletData lo{[c](double, double) { return c; }, "lo"};
      DirichletData hi{[c, bump](double x, double y) { return c + bump * (1 + std::sin(3 * x + y)) / 2; }, "hi"};
      const auto a = solve_dirichlet(g, kLinear, cfg, lo);
      const auto b = solve_dirichlet(g, kLinear, cfg, hi);
      EXPECT_LE((a.solution.values - b.solution.values).maxCoeff(), 2 * cfg.tol);
    }
  }
}

TEST(SolveDirichlet, EnergyDecreasesAlongAcceptedSteps) {
  const auto g = build_grid(2, {0, 1}, 33, 17);
  for (double p : {1.5, 3.0}) {
    const auto r = solve_dirichlet(g, kP23, default_solver_config(p, g),
                                   DirichletData::constant(3.0), GridFunction::constant(g, 0.0));
    ASSERT_GE(r.energy_trace.size(), 1u);
    for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
      EXPECT_LE(r.energy_trace[k], r.energy_trace[k - 1] + 1e-12 * std::abs(r.energy_trace[k - 1]));
  }
}

TEST(SolveDirichlet, EpsRobustness) {
  const auto g = build_grid(2, {0, 1}, 33, 17);
  for (double p : {1.5, 3.0}) {
    auto solve_to = [&](double eps_min) {
      SolverConfig cfg = default_solver_config(p, g);
      cfg.eps_schedule = {0.1, 0.03, eps_min};
      cfg.tol = 1e-11;
      return solve_dirichlet(g, kP23, cfg, DirichletData::cross_affine(g.cross(), 1.0, 2.0));
    };
    const auto r1 = solve_to(1e-2), r2 = solve_to(5e-3), r3 = solve_to(2.5e-3);
    const double d1 = max_abs_diff(r1.solution, r2.solution);
    const double d2 = max_abs_diff(r2.solution, r3.solution);
    EXPECT_GT(d1, 0.0);
    EXPECT_LE(d2, 10 * d1) << "p=" << p;
  }
}

TEST(SolveDirichlet, Deterministic) {
  const auto g = build_grid(2, {0, 1}, 33, 17);
  const auto cfg = default_solver_config(1.5, g);
  const auto a = solve_dirichlet(g, kP23, cfg, DirichletData::constant(2));
  const auto b = solve_dirichlet(g, kP23, cfg, DirichletData::constant(2));
  EXPECT_EQ(a.solution.values, b.solution.values);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SolveDirichlet, Errors) {
  const auto g = build_grid(1, {0, 1}, 5, 5);
  SolverConfig cfg = default_solver_config(2, g);
  cfg.tol = -1;
  EXPECT_THROW(solve_dirichlet(g, kP23, cfg, DirichletData::constant(1)), DomainError);
  cfg = default_solver_config(1.5, g);
  cfg.eps_schedule = {1e-2, 1e-1};
  EXPECT_THROW(solve_dirichlet(g, kP23, cfg, DirichletData::constant(1)), DomainError);
  cfg = default_solver_config(3, g);
  cfg.max_newton = 1;
  cfg.eps_schedule = {1e-6};
  EXPECT_THROW(solve_dirichlet(g, kP23, cfg, DirichletData::constant(50), GridFunction::constant(g, 0)),
               NumericalError);
  EXPECT_THROW(solve_dirichlet(g, kP23, default_solver_config(2, g),
                               DirichletData::constant(std::nan(""))),
               DomainError);
}

TEST(SolveBlowup, MonotoneStages) {
  const auto g = build_grid(2, {-1, 1}, 33, 33);
  const Window w{-1, 1, -0.5, 0.5};
  const std::vector<double> M{10, 1e2, 1e3, 1e4};
  for (double p : {1.5, 2.0}) {
    const auto rep = solve_blowup(g, kP23, default_solver_config(p, g), M, w);
    ASSERT_EQ(rep.stages.size(), M.size());
    EXPECT_TRUE(rep.monotone);
    for (std::size_t k = 1; k < rep.stages.size(); ++k) {
      EXPECT_GE((rep.stages[k].solution.values - rep.stages[k - 1].solution.values).minCoeff(),
                -2 * rep.stages[k].tol);
      EXPECT_EQ(std::get<BlowupStage>(rep.stages[k].boundary_mode).M, M[k]);
    }
    ASSERT_EQ(rep.window_change.size(), M.size() - 1);
    for (std::size_t k = 1; k < rep.window_change.size(); ++k)
      EXPECT_LT(rep.window_change[k], rep.window_change[k - 1]);
  }
}

TEST(SolveBlowup, CenterlineApproachesLargeSolution) {
  const auto g = build_grid(8, {-1, 1}, 129, 513);
  const Window w{-1, 1, -0.5, 0.5};
  const auto rep = solve_blowup(g, kP23, default_solver_config(2, g), {10, 1e2, 1e3, 1e4}, w);
  const double center = rep.stages.back().solution.at(64, 256);
  EXPECT_NEAR(center, solve_large_1d(kP23, 2, 1.0).a(), 1e-2);
}

TEST(SolveBlowup, RefusesWithoutKellerOsserman) {
  const auto g = build_grid(1, {-1, 1}, 9, 9);
  EXPECT_THROW(solve_blowup(g, kLinear, default_solver_config(2, g), {10, 100}, {-0.5, 0.5, -0.5, 0.5}),
               PreconditionError);
  EXPECT_THROW(solve_blowup(g, kP23, default_solver_config(2, g), {100, 10}, {-0.5, 0.5, -0.5, 0.5}),
               DomainError);
}
