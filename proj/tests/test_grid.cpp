#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cylasym/errors.hpp"
#include "cylasym/grid.hpp"

using namespace cylasym;

namespace {

GridFunction sample(const RectGrid& g, const std::function<double(double, double)>& f) {
  Eigen::VectorXd v(g.node_count());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v[g.index(i, j)] = f(g.x(i), g.y(j));
  return {g, v};
}

}  // namespace

TEST(Grid, Counting) {
  const auto g = build_grid(1, {0, 1}, 3, 3);
  EXPECT_EQ(g.triangle_count(), 8);
  EXPECT_DOUBLE_EQ(g.hx(), 1.0);
  EXPECT_DOUBLE_EQ(g.hy(), 0.5);
  const auto g2 = build_grid(4, {0, 1}, 9, 5);
  EXPECT_DOUBLE_EQ(g2.hx(), 1.0);
  EXPECT_DOUBLE_EQ(g2.hy(), 0.25);
  EXPECT_EQ(g2.x(8), 4.0);
  EXPECT_EQ(g2.y(4), 1.0);
}

TEST(Grid, Errors) {
  EXPECT_THROW(build_grid(1, {0, 1}, 2, 5), DomainError);
  EXPECT_THROW(build_grid(1, {0, 1}, 5, 2), DomainError);
  EXPECT_THROW(build_grid(0, {0, 1}, 5, 5), DomainError);
  EXPECT_THROW(build_grid(1, {1, 1}, 5, 5), DomainError);
}

TEST(Grid, TrianglesAreCounterClockwiseAndMassSumsToArea) {
  const auto g = build_grid(2, {-0.5, 1}, 7, 6);
  for (Eigen::Index t = 0; t < g.triangle_count(); ++t) {
    const auto n = g.triangle(t);
    auto xy = [&](Eigen::Index k) {
      return std::pair{g.x(int(k % g.nx())), g.y(int(k / g.nx()))};
    };
    auto [x0, y0] = xy(n[0]);
    auto [x1, y1] = xy(n[1]);
    auto [x2, y2] = xy(n[2]);
    const double area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0));
    EXPECT_NEAR(area, g.triangle_area(), 1e-14);
  }
  EXPECT_NEAR(g.lumped_mass().sum(), 4 * 1.5, 1e-12);
}

TEST(Gradient, AffineReproduction) {
  const auto g = build_grid(3, {0, 2}, 13, 9);
  const auto u = sample(g, [](double x, double y) { return 3 * x - 2 * y; });
  const auto grad = gradient_per_cell(u);
  ASSERT_EQ(grad.rows(), g.triangle_count());
  for (Eigen::Index t = 0; t < grad.rows(); ++t) {
    EXPECT_NEAR(grad(t, 0), 3.0, 1e-13);
    EXPECT_NEAR(grad(t, 1), -2.0, 1e-13);
  }
  const auto c = gradient_per_cell(GridFunction::constant(g, 4.2));
  EXPECT_EQ(c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, QuadraticWithinTaylorBound) {
  const auto g = build_grid(1, {0, 1}, 21, 5);
  const double h = g.hx();
  const auto grad = gradient_per_cell(sample(g, [](double x, double) { return x * x; }));
  for (Eigen::Index t = 0; t < grad.rows(); ++t) {
    const int i = int((t / 2) % (g.nx() - 1));
    const double xc = g.x(i) + 0.5 * h;
    EXPECT_LE(std::abs(grad(t, 0) - 2 * xc), h + 1e-12);
  }
}

TEST(LpNorm, ConstantIntegrands) {
  const auto g = build_grid(2, {0, 1}, 17, 9);
  const auto u = sample(g, [](double x, double y) { return 3 * x - 2 * y; });
  const Window w{-1, 1, 0.25, 0.75};
  EXPECT_NEAR(lp_norm_gradient(u, 2, w), std::sqrt(13 * w.area()), 1e-12);
  EXPECT_EQ(lp_norm_gradient(GridFunction::constant(g, 1.5), 3, w), 0.0);
  const auto x = sample(g, [](double x, double) { return x; });
  EXPECT_NEAR(lp_norm_gradient(x, 3, {-0.5, 0.5, 0.125, 0.875}), std::cbrt(0.75), 1e-12);
  EXPECT_NEAR(lp_norm_gradient(x, 3, {-1, 1, 0.125, 0.625}), 1.0, 1e-12);
}

TEST(LpNorm, PartialOverlapIsExactForConstantGradient) {
  const auto g = build_grid(2, {0, 1}, 9, 5);
  const auto u = sample(g, [](double x, double y) { return x + y; });
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-1.4, 1.4), uy(0.26, 0.74);
  for (int k = 0; k < 50; ++k) {
    double x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const Window w{x0, x1, y0, y1};
    EXPECT_NEAR(lp_norm_gradient(u, 2, w), std::sqrt(2 * w.area()), 1e-12);
  }
}

TEST(LpNorm, HomogeneityAndAdditivity) {
  const auto g = build_grid(2, {0, 1}, 33, 17);
  const auto u = sample(g, [](double x, double y) { return std::sin(3 * x) * std::cosh(y); });
  const Window a{-1, 0, 0.125, 0.875}, b{0, 1, 0.125, 0.875}, ab{-1, 1, 0.125, 0.875};
  for (double p : {1.5, 2.0, 3.0}) {
    const double na = lp_norm_gradient(u, p, a), nb = lp_norm_gradient(u, p, b);
    EXPECT_NEAR(std::pow(std::pow(na, p) + std::pow(nb, p), 1 / p), lp_norm_gradient(u, p, ab), 1e-12);
    EXPECT_NEAR(lp_norm_gradient(-2.5 * u, p, ab), 2.5 * lp_norm_gradient(u, p, ab), 1e-12);
  }
}

TEST(Window, Containment) {
  const auto g = build_grid(2, {0, 1}, 9, 5);
  EXPECT_NO_THROW(require_inside({-1.5, 1.5, 0.25, 0.75}, g));
  EXPECT_THROW(require_inside({-1.9, 1.5, 0.25, 0.75}, g), DomainError);
  EXPECT_THROW(require_inside({-1, 1, 0.1, 0.75}, g), DomainError);
}

TEST(Interpolate, ReproducesAffineAndNodes) {
  const auto g = build_grid(1, {0, 1}, 5, 5);
  const auto u = sample(g, [](double x, double y) { return 2 * x + 5 * y - 1; });
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(-1, 1), uy(0, 1);
  for (int k = 0; k < 200; ++k) {
    const double x = ux(rng), y = uy(rng);
    EXPECT_NEAR(interpolate(u, x, y), 2 * x + 5 * y - 1, 1e-13);
  }
  const auto w = sample(g, [](double x, double y) { return x * x * y; });
  EXPECT_DOUBLE_EQ(interpolate(w, g.x(3), g.y(2)), w.at(3, 2));
  EXPECT_THROW(interpolate(u, 1.5, 0.5), DomainError);
}

TEST(Embed, CrossSectionProfiles) {
  CrossProfile prof;
  prof.interval = {0, 1};
  prof.nodes = uniform_nodes({0, 1}, 401);
  for (double y : prof.nodes) prof.values.push_back(std::cosh(y - 0.5) / std::cosh(0.5));
  prof.mode = FiniteData{1, 1};

  const auto g = build_grid(2, {0, 1}, 9, 101);
  const auto u = embed_cross_section(prof, g);
  const auto grad = gradient_per_cell(u);
  EXPECT_EQ(grad.col(0).cwiseAbs().maxCoeff(), 0.0);
  // shared ordinates y_j = j / 100 coincide with every fourth profile node
  const double bound = std::pow(1.0 / 400, 2) / 8;  // max |prof''| = 1
  for (int j = 0; j < g.ny(); ++j)
    EXPECT_NEAR(u.at(4, j), std::cosh(g.y(j) - 0.5) / std::cosh(0.5), bound + 1e-15);

  CrossProfile c = prof;
  std::fill(c.values.begin(), c.values.end(), 2.0);
  const auto uc = embed_cross_section(c, g);
  EXPECT_EQ(uc.values.minCoeff(), 2.0);
  EXPECT_EQ(uc.values.maxCoeff(), 2.0);

  EXPECT_THROW(embed_cross_section(prof, build_grid(2, {0, 2}, 9, 9)), DomainError);
}

TEST(Cutoff, RampProperties) {
  const auto g = build_grid(2, {0, 2}, 81, 41);
  const double d = 10 * g.hx();
  const Window outer{-1.5, 1.5, 0.25, 1.75};
  const Window inner{outer.x_lo + d, outer.x_hi - d, outer.y_lo + d, outer.y_hi - d};
  const auto chi = cutoff_function(inner, outer, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double v = chi.at(i, j);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      if (inner.contains(g.x(i), g.y(j))) {
        EXPECT_EQ(v, 1.0);
      }
      if (!outer.contains(g.x(i), g.y(j))) {
        EXPECT_EQ(v, 0.0);
      }
    }
  const auto grad = gradient_per_cell(chi);
  double gmax = 0;
  for (Eigen::Index t = 0; t < grad.rows(); ++t) gmax = std::max(gmax, grad.row(t).norm());
  // the ramp slope is 1/d; cells cut by a corner diagonal reach sqrt(2)/d
  EXPECT_GE(gmax, 1 / d - 1e-9);
  EXPECT_LE(gmax, std::sqrt(2.0) / d + 1e-9);

  // |grad chi| = 1/d on the frame between the windows
  const double frame = outer.area() - inner.area();
  const Window all{-2 + g.hx(), 2 - g.hx(), g.hy(), 2 - g.hy()};
  const double integral = std::pow(lp_norm_gradient(chi, 2, all), 2);
  EXPECT_NEAR(integral / (frame / (d * d)), 1.0, 0.05);

  EXPECT_THROW(cutoff_function(outer, inner, g), DomainError);
}

TEST(Serialization, CsvRoundTrip) {
  const auto g = build_grid(1.5, {-1, 1}, 7, 5);
  const auto u = sample(g, [](double x, double y) { return std::exp(x) * y + 1.0 / 3.0; });
  std::stringstream ss;
  write_csv(u, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "x,y,value");
  std::stringstream in(text);
  const auto back = read_grid_function(in, sidecar_json(g));
  EXPECT_TRUE(back.grid == g);
  EXPECT_EQ(back.values, u.values);
  std::stringstream bad("x,y,value\n0,0,1\n");
  EXPECT_THROW(read_grid_function(bad, sidecar_json(g)), DomainError);
}
