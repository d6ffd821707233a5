#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cylasym/asymptotics.hpp"
#include "cylasym/errors.hpp"

using namespace cylasym;

namespace {

const Nonlinearity kP23 = Nonlinearity::power(2, 3);
const Nonlinearity kLinear = Nonlinearity::power(1, 1);

std::vector<RateRow> synthetic(const std::function<double(double)>& e) {
  std::vector<RateRow> rows;
  for (double ell : {2.0, 4.0, 8.0, 16.0}) rows.push_back({ell, e(ell), true, "", false});
  return rows;
}

SolveResult blowup_solve(double ell, double p, double M_max, int per_unit = 8) {
  const auto g = build_grid(ell, {-1, 1}, int(2 * ell * per_unit) + 1, 2 * 2 * per_unit + 1);
  std::vector<double> M;
  for (double m = 10; m <= M_max * (1 + 1e-12); m *= 10) M.push_back(m);
  auto rep = solve_blowup(g, kP23, default_solver_config(p, g), M, {-1, 1, -0.5, 0.5});
  return rep.stages.back();
}

}  // namespace

TEST(FitRate, SyntheticPowerLaws) {
  const auto half = fit_rate(synthetic([](double l) { return 7 * std::pow(l, -0.5); }), 2, 0);
  EXPECT_EQ(half.status, RateStatus::ok);
  EXPECT_NEAR(half.slope, -0.5, 1e-12);
  EXPECT_NEAR(half.intercept, std::log(7.0), 1e-12);
  EXPECT_TRUE(half.pass);
  EXPECT_DOUBLE_EQ(half.target_slope, -0.5);

  const auto fast = fit_rate(synthetic([](double l) { return 3 * std::pow(l, -2.0); }), 2, 0);
  EXPECT_NEAR(fast.slope, -2, 1e-12);
  EXPECT_TRUE(fast.pass);

  const auto slow = fit_rate(synthetic([](double l) { return std::pow(l, -0.2); }), 2, 0);
  EXPECT_NEAR(slow.slope, -0.2, 1e-12);
  EXPECT_FALSE(slow.pass);
}

TEST(FitRate, FloorExclusionAndStatus) {
  auto rows = synthetic([](double l) { return std::exp(-l); });
  // floor at e(8)/3 excludes rows 8 and 16
  const auto two = fit_rate(rows, 2, std::exp(-8.0) / 3 * 1.0001);
  EXPECT_EQ(two.status, RateStatus::unfittable);
  EXPECT_FALSE(two.pass);
  EXPECT_TRUE(two.rows[0].used_in_fit);
  EXPECT_FALSE(two.rows[2].used_in_fit);

  const auto zero = fit_rate(synthetic([](double) { return 0.0; }), 2, 0);
  EXPECT_EQ(zero.status, RateStatus::unresolvable);
  EXPECT_FALSE(zero.pass);

  rows[1].ok = false;
  rows[1].failure = "solver failed";
  const auto failed = fit_rate(rows, 3, 0);
  EXPECT_EQ(failed.status, RateStatus::ok);
  EXPECT_FALSE(failed.rows[1].used_in_fit);

  auto shuffled = synthetic([](double l) { return 1 / l; });
  std::swap(shuffled[0], shuffled[3]);
  const auto sorted = fit_rate(shuffled, 2, 0);
  for (std::size_t k = 1; k < sorted.rows.size(); ++k) EXPECT_LT(sorted.rows[k - 1].ell, sorted.rows[k].ell);
  EXPECT_TRUE(sorted.monotone_above_floor);
  EXPECT_THROW(fit_rate(rows, 1.0, 0), DomainError);
}

TEST(Sweep, ZeroNonlinearityGivesZeroErrors) {
  SweepSpec s;
  s.nl = Nonlinearity::zero();
  s.regime = FiniteRegime{2.5, 2.5};
  s.ell_list = {2, 4, 8};
  s.hx = s.hy = 1.0 / 8;
  s.window = {-1, 1, 0.25, 0.75};
  const auto out = sweep_ell(s);
  for (const auto& r : out.rows) {
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.error, 0.0);
  }
  EXPECT_EQ(fit_rate(out.rows, 2, out.floor).status, RateStatus::unresolvable);
}

TEST(Sweep, LinearBenchmarkDecreases) {
  SweepSpec s;
  s.nl = kLinear;
  s.ell_list = {2, 4, 8};
  s.threads = 0;
  const auto out = sweep_ell(s);
  ASSERT_EQ(out.rows.size(), 3u);
  EXPECT_GT(out.rows[0].error, out.rows[1].error);
  EXPECT_GT(out.rows[1].error, out.rows[2].error);
  EXPECT_TRUE(out.floor_failure.empty());
}

TEST(Sweep, BlowupRegimeDecreases) {
  SweepSpec s;
  s.nl = kP23;
  s.cross = {-1, 1};
  s.regime = BlowupRegime{{10, 1e2, 1e3}};
  s.ell_list = {2, 4, 8};
  s.window = {-1, 1, -0.75, 0.75};
  s.hx = 1.0 / 8;
  s.estimate_floor = false;
  s.threads = 0;
  const auto out = sweep_ell(s);
  EXPECT_GT(out.rows[0].error, out.rows[1].error);
  EXPECT_GT(out.rows[1].error, out.rows[2].error);
}

TEST(Sweep, RowsIndependentOfThreadCount) {
  SweepSpec s;
  s.nl = kP23;
  s.p = 1.5;
  s.ell_list = {2, 4};
  s.estimate_floor = false;
  const auto a = sweep_ell(s);
  s.threads = 3;
  const auto b = sweep_ell(s);
  for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_EQ(a.rows[k].error, b.rows[k].error);
}

TEST(Sweep, Validation) {
  SweepSpec s;
  s.window = {-1.5, 1.5, 0.25, 0.75};  // wider than S_{ell_min / 2}
  EXPECT_THROW(validate(s), DomainError);
  s = SweepSpec{};
  s.ell_list = {4, 2};
  EXPECT_THROW(validate(s), DomainError);
  s = SweepSpec{};
  s.hx = 0.3;
  EXPECT_THROW(validate(s), DomainError);
  s = SweepSpec{};
  s.regime = BlowupRegime{{}};
  EXPECT_THROW(validate(s), DomainError);
  EXPECT_NO_THROW(validate(SweepSpec{}));
}

TEST(Comparison, OrderedConstantDataAcrossMatrix) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  const auto g = build_grid(1, {0, 1}, 17, 9);
  for (const auto& nl : {kLinear, kP23})
    for (double p : {1.5, 2.0, 3.0}) {
      const auto cfg = default_solver_config(p, g);
      for (int k = 0; k < 20; ++k) {
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        const auto a = solve_dirichlet(g, nl, cfg, DirichletData::constant(lo));
        const auto b = solve_dirichlet(g, nl, cfg, DirichletData::constant(hi));
        const auto rep = verify_comparison(a, b);
        EXPECT_TRUE(rep.holds) << rep.detail;
        EXPECT_EQ(rep.checked, g.node_count());
      }
    }
}

TEST(Comparison, EqualDataAndErrors) {
  const auto g = build_grid(1, {0, 1}, 9, 9);
  const auto cfg = default_solver_config(2, g);
  const auto a = solve_dirichlet(g, kLinear, cfg, DirichletData::constant(1));
  const auto b = solve_dirichlet(g, kLinear, cfg, DirichletData::constant(1));
  const auto rep = verify_comparison(a, b);
  EXPECT_TRUE(rep.holds);
  EXPECT_LE(std::abs(rep.margin), 2 * cfg.tol);
  const auto c = solve_dirichlet(g, kLinear, cfg, DirichletData::constant(0.5));
  EXPECT_THROW(verify_comparison(a, c), PreconditionError);
  const auto g2 = build_grid(1, {0, 1}, 9, 11);
  const auto d = solve_dirichlet(g2, kLinear, default_solver_config(2, g2), DirichletData::constant(2));
  EXPECT_THROW(verify_comparison(a, d), DomainError);
}

TEST(Comparison, ConsecutiveBlowupStages) {
  const auto g = build_grid(2, {-1, 1}, 33, 33);
  const auto rep = solve_blowup(g, kP23, default_solver_config(2, g), {10, 1e2, 1e3}, {-1, 1, -0.5, 0.5});
  for (std::size_t k = 1; k < rep.stages.size(); ++k)
    EXPECT_TRUE(verify_comparison(rep.stages[k - 1], rep.stages[k]).holds);
}

TEST(MonotoneInEll, BlowupPairs) {
  const Window w{-1, 1, -0.75, 0.75};
  const auto r2 = blowup_solve(2, 2, 1e3), r4 = blowup_solve(4, 2, 1e3), r8 = blowup_solve(8, 2, 1e3);
  const auto a = verify_monotone_in_ell(r2, r4, w);
  EXPECT_TRUE(a.holds) << a.detail;
  EXPECT_GT(a.checked, 0);
  EXPECT_TRUE(verify_monotone_in_ell(r4, r8, w).holds);
  const auto same = verify_monotone_in_ell(r2, r2, w);
  EXPECT_TRUE(same.holds);
  EXPECT_EQ(same.margin, 0.0);
  const auto r4b = blowup_solve(4, 2, 1e2);
  EXPECT_THROW(verify_monotone_in_ell(r2, r4b, w), PreconditionError);
  EXPECT_THROW(verify_monotone_in_ell(r4, r2, w), DomainError);
}

TEST(MonotoneInEll, ConstantFiniteData) {
  const auto g2 = build_grid(2, {0, 1}, 17, 9), g4 = build_grid(4, {0, 1}, 33, 9);
  const auto a = solve_dirichlet(g2, Nonlinearity::zero(), default_solver_config(2, g2), DirichletData::constant(3));
  const auto b = solve_dirichlet(g4, Nonlinearity::zero(), default_solver_config(2, g4), DirichletData::constant(3));
  const auto rep = verify_monotone_in_ell(a, b, {-1, 1, 0.25, 0.75});
  EXPECT_TRUE(rep.holds);
  EXPECT_LE(std::abs(rep.margin), 1e-12);
}

TEST(Barrier, InteriorBallsOnBlowupSolve) {
  for (double p : {1.5, 2.0}) {
    const auto r = blowup_solve(4, p, 1e4);
    const std::vector<std::array<double, 3>> balls{
        {0, 0, 0.5}, {1, 0, 0.5}, {-2, 0.2, 0.4}, {2.5, -0.3, 0.35}, {0, 0.5, 0.25}};
    for (const auto& b : balls) {
      const auto rep = verify_barrier(r, kP23, p, b[0], b[1], b[2]);
      EXPECT_TRUE(rep.holds) << rep.detail;
      EXPECT_GT(rep.checked, 0);
    }
    EXPECT_THROW(verify_barrier(r, kP23, p, 0, 0, 1.0), DomainError);
  }
}

TEST(Barrier, ZeroDataAndShrinkingBalls) {
  const auto g = build_grid(2, {-1, 1}, 17, 17);
  const auto r = solve_dirichlet(g, kP23, default_solver_config(2, g), DirichletData::constant(0));
  EXPECT_EQ(r.solution.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(verify_barrier(r, kP23, 2, 0, 0, 0.5).holds);
  for (double R : {0.2, 0.5, 0.9}) {
    const double big = solve_large_1d(kP23, 2, R).value_at(R / 2);
    const double small = solve_large_1d(kP23, 2, R / 2).value_at(R / 4);
    EXPECT_LE(big, small);
  }
}

TEST(Caccioppoli, ConstantAndCoshBenchmark) {
  const auto g = build_grid(2, {0, 1}, 65, 33);
  const Window outer{-1, 1, 0.125, 0.875};
  const Window inner{-0.75, 0.75, 0.25, 0.75};
  const auto c = solve_dirichlet(g, Nonlinearity::zero(), default_solver_config(2, g), DirichletData::constant(2));
  const auto rc = verify_caccioppoli(c, Nonlinearity::zero(), 2, inner, outer);
  EXPECT_TRUE(rc.holds);
  EXPECT_NEAR(rc.observed, 0.0, 1e-20);

  const auto lin = solve_dirichlet(g, kLinear, default_solver_config(2, g), DirichletData::constant(1));
  const std::vector<std::pair<Window, Window>> pairs{
      {inner, outer}, {{-0.5, 0.5, 0.375, 0.625}, outer}, {{-1.25, 1.25, 0.1875, 0.8125}, {-1.5, 1.5, 0.0625, 0.9375}}};
  for (const auto& [in, out] : pairs) {
    const auto rep = verify_caccioppoli(lin, kLinear, 2, in, out);
    EXPECT_TRUE(rep.holds) << rep.detail;
    // the p = 2 constant 2^4 / 4 = 4
    const double lambda = [&] {
      double m = 0;
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
          if (out.contains(g.x(i), g.y(j))) m = std::max(m, std::abs(lin.solution.at(i, j)));
      return m;
    }();
    const double chi = std::pow(lp_norm_gradient(cutoff_function(in, out, g), 2, out), 2);
    EXPECT_NEAR(rep.bound, 1.05 * (2 * lambda * lambda * out.area() + 4 * chi * lambda * lambda), 1e-12);
  }
  EXPECT_THROW(verify_caccioppoli(lin, kLinear, 2, outer, inner), DomainError);
}

TEST(Caccioppoli, BlowupStages) {
  const auto g = build_grid(2, {-1, 1}, 33, 33);
  const auto rep = solve_blowup(g, kP23, default_solver_config(1.5, g), {10, 1e2, 1e3, 1e4}, {-1, 1, -0.5, 0.5});
  for (const auto& st : rep.stages) {
    const auto c = verify_caccioppoli(st, kP23, 1.5, {-0.5, 0.5, -0.25, 0.25}, {-1, 1, -0.5, 0.5});
    EXPECT_TRUE(c.holds) << c.detail;
  }
}
