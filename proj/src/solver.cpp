#include "cylasym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "absorption.hpp"
#include "cylasym/energy_density.hpp"
#include "cylasym/errors.hpp"
#include "cylasym/newton.hpp"

namespace cylasym {

DirichletData DirichletData::constant(double c) {
  std::ostringstream os;
  os << "constant " << c;
  return {[c](double, double) { return c; }, os.str()};
}

DirichletData DirichletData::cross_affine(Interval cross, double g0, double g1) {
  std::ostringstream os;
  os << "cross-affine g0=" << g0 << " g1=" << g1;
  return {[cross, g0, g1](double, double y) {
            return g0 + (g1 - g0) * (y - cross.lo) / cross.width();
          },
          os.str()};
}

namespace {

// Gradient operator of triangle t: g = B u_T with B a 2x3 matrix.
Eigen::Matrix<double, 2, 3> gradient_operator(const RectGrid& g, Eigen::Index t) {
  const double ix = 1.0 / g.hx(), iy = 1.0 / g.hy();
  Eigen::Matrix<double, 2, 3> B;
  if (t % 2 == 0)
    B << -ix, ix, 0.0, 0.0, -iy, iy;
  else
    B << 0.0, ix, -ix, -iy, 0.0, iy;
  return B;
}

double gradient_energy(const RectGrid& g, const Eigen::VectorXd& u, double p, double eps) {
  const double area = g.triangle_area();
  double e = 0.0;
  for (Eigen::Index t = 0; t < g.triangle_count(); ++t) {
    const auto v = g.triangle(t);
    const Eigen::Vector3d ut(u[v[0]], u[v[1]], u[v[2]]);
    const Eigen::Vector2d grad = gradient_operator(g, t) * ut;
    e += area * density(grad.squaredNorm(), p, eps);
  }
  return e;
}

// Energy over interior nodal values; boundary nodes are fixed and their F
// terms (constants) are dropped.
class CylinderEnergy final : public ConvexProblem {
 public:
  CylinderEnergy(const RectGrid& g, const Nonlinearity& nl, double p, Eigen::VectorXd base)
      : g_(g), nl_(nl), p_(p), base_(std::move(base)), mass_(g.lumped_mass()) {
    unknown_.assign(static_cast<std::size_t>(g.node_count()), -1);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (!g.on_boundary(i, j)) {
          unknown_[static_cast<std::size_t>(g.index(i, j))] = static_cast<Eigen::Index>(free_.size());
          free_.push_back(g.index(i, j));
        }
  }

  Eigen::Index size() const override { return static_cast<Eigen::Index>(free_.size()); }
  double residual_weight() const override { return g_.hx() * g_.hy(); }

  Eigen::VectorXd full(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u = base_;
    for (std::size_t k = 0; k < free_.size(); ++k) u[free_[k]] = x[static_cast<Eigen::Index>(k)];
    return u;
  }

  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x(size());
    for (std::size_t k = 0; k < free_.size(); ++k) x[static_cast<Eigen::Index>(k)] = u[free_[k]];
    return x;
  }

  double energy(const Eigen::VectorXd& x, double eps) const override {
    const Eigen::VectorXd u = full(x);
    double e = gradient_energy(g_, u, p_, eps);
    for (Eigen::Index n : free_) e += mass_[n] * detail::absorption_F(nl_, u[n]);
    return e;
  }

  void assemble(const Eigen::VectorXd& x, double eps, Eigen::VectorXd& grad,
                std::vector<Eigen::Triplet<double>>& hess,
                Eigen::VectorXd& scale) const override {
    const Eigen::VectorXd u = full(x);
    const Eigen::Index m = size();
    grad.setZero(m);
    scale.setZero(m);
    hess.reserve(static_cast<std::size_t>(g_.triangle_count()) * 9 + free_.size());
    const double area = g_.triangle_area();
    for (Eigen::Index t = 0; t < g_.triangle_count(); ++t) {
      const auto v = g_.triangle(t);
      const Eigen::Matrix<double, 2, 3> B = gradient_operator(g_, t);
      const Eigen::Vector3d ut(u[v[0]], u[v[1]], u[v[2]]);
      const Eigen::Vector2d gt = B * ut;
      const double g2 = gt.squaredNorm();
      const double a = flux_coefficient(g2, p_, eps);
      const double b = flux_coefficient_slope(g2, p_, eps);
      const Eigen::Vector3d local_grad = area * a * (B.transpose() * gt);
      const Eigen::Matrix2d H = a * Eigen::Matrix2d::Identity() + b * gt * gt.transpose();
      const Eigen::Matrix3d local_hess = area * B.transpose() * H * B;
      for (int r = 0; r < 3; ++r) {
        const Eigen::Index kr = unknown_[static_cast<std::size_t>(v[r])];
        if (kr < 0) continue;
        grad[kr] += local_grad[r];
        scale[kr] += std::abs(local_grad[r]);
        for (int c = 0; c < 3; ++c) {
          const Eigen::Index kc = unknown_[static_cast<std::size_t>(v[c])];
          if (kc >= 0) hess.emplace_back(kr, kc, local_hess(r, c));
        }
      }
    }
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const Eigen::Index n = free_[k];
      const Eigen::Index kk = static_cast<Eigen::Index>(k);
      const double r = mass_[n] * detail::absorption_f(nl_, u[n]);
      grad[kk] += r;
      scale[kk] += std::abs(r);
      hess.emplace_back(kk, kk, mass_[n] * detail::absorption_df(nl_, u[n]));
    }
  }

 private:
  const RectGrid& g_;
  const Nonlinearity& nl_;
  double p_;
  Eigen::VectorXd base_;
  Eigen::VectorXd mass_;
  std::vector<Eigen::Index> free_;
  std::vector<Eigen::Index> unknown_;
};

}  // namespace

double energy(const GridFunction& u, const Nonlinearity& nl, double p, double eps) {
  if (!(eps >= 0.0)) throw DomainError("energy: eps must be nonnegative");
  if (!(p > 1.0)) throw DomainError("energy: p must exceed 1");
  const Eigen::VectorXd mass = u.grid.lumped_mass();
  double e = gradient_energy(u.grid, u.values, p, eps);
  for (Eigen::Index n = 0; n < mass.size(); ++n) e += mass[n] * detail::absorption_F(nl, u.values[n]);
  return e;
}

Eigen::VectorXd energy_gradient(const GridFunction& u, const Nonlinearity& nl, double p, double eps) {
  if (!(eps >= 0.0)) throw DomainError("energy_gradient: eps must be nonnegative");
  if (!(p > 1.0)) throw DomainError("energy_gradient: p must exceed 1");
  const RectGrid& g = u.grid;
  const double area = g.triangle_area();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(g.node_count());
  for (Eigen::Index t = 0; t < g.triangle_count(); ++t) {
    const auto v = g.triangle(t);
    const Eigen::Matrix<double, 2, 3> B = gradient_operator(g, t);
    const Eigen::Vector3d ut(u.values[v[0]], u.values[v[1]], u.values[v[2]]);
    const Eigen::Vector2d gt = B * ut;
    const double g2 = gt.squaredNorm();
    // a(g2) g vanishes at g = 0 even where a is singular (p < 2, eps = 0)
    if (g2 == 0.0) continue;
    const Eigen::Vector3d local = area * flux_coefficient(g2, p, eps) * (B.transpose() * gt);
    for (int r = 0; r < 3; ++r) grad[v[r]] += local[r];
  }
  const Eigen::VectorXd mass = g.lumped_mass();
  for (Eigen::Index n = 0; n < mass.size(); ++n)
    grad[n] += mass[n] * detail::absorption_f(nl, u.values[n]);
  return grad;
}

SolverConfig default_solver_config(double p, const RectGrid& g) {
  SolverConfig cfg;
  cfg.p = p;
  if (p != 2.0) cfg.eps_schedule = default_eps_schedule(std::min(g.hx(), g.hy()));
  return cfg;
}

SolveResult solve_dirichlet(const RectGrid& g, const Nonlinearity& nl, const SolverConfig& cfg,
                            const DirichletData& bdata, const std::optional<GridFunction>& initial) {
  validate(cfg);
  if (!bdata.g) throw DomainError("solve_dirichlet: boundary data missing");
  if (initial && !(initial->grid == g)) throw DomainError("solve_dirichlet: initial guess on another grid");

  Eigen::VectorXd base(g.node_count());
  double boundary_sum = 0.0;
  int boundary_count = 0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const Eigen::Index n = g.index(i, j);
      if (g.on_boundary(i, j)) {
        const double v = bdata.g(g.x(i), g.y(j));
        if (!std::isfinite(v)) throw DomainError("solve_dirichlet: boundary data must be finite");
        base[n] = v;
        boundary_sum += v;
        ++boundary_count;
      }
    }
  }
  const double mean = boundary_sum / boundary_count;
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i)
      base[g.index(i, j)] = initial ? initial->values[g.index(i, j)] : mean;

  CylinderEnergy problem(g, nl, cfg.p, base);
  const std::vector<double> schedule = resolved_eps_schedule(cfg, std::min(g.hx(), g.hy()));
  NewtonOutcome out = minimize(problem, problem.restrict_to_free(base), schedule, cfg);

  GridFunction sol(g, problem.full(out.x));
  SolveResult res{sol,
                  out.iterations_per_stage,
                  energy(sol, nl, cfg.p, schedule.back()),
                  out.residual,
                  out.residual_floor,
                  cfg.tol,
                  schedule.back(),
                  out.energy_trace,
                  DirichletMode{bdata.description}};
  return res;
}

BlowupReport solve_blowup(const RectGrid& g, const Nonlinearity& nl, const SolverConfig& cfg,
                          const std::vector<double>& M_list, const Window& window) {
  validate(cfg);
  if (M_list.empty()) throw DomainError("solve_blowup: M_list must not be empty");
  for (std::size_t k = 0; k < M_list.size(); ++k) {
    if (!(M_list[k] > 0.0) || !std::isfinite(M_list[k]))
      throw DomainError("solve_blowup: M_list entries must be positive and finite");
    if (k > 0 && !(M_list[k] > M_list[k - 1]))
      throw DomainError("solve_blowup: M_list must be strictly increasing");
  }
  require_inside(window, g);
  if (!check_a1(nl, cfg.p)) throw PreconditionError("no large solution exists: (A1) fails");

  BlowupReport rep;
  std::optional<GridFunction> warm;
  for (double M : M_list) {
    SolveResult r = solve_dirichlet(g, nl, cfg, DirichletData::constant(M), warm);
    r.boundary_mode = BlowupStage{M};
    if (!rep.stages.empty()) {
      const GridFunction& prev = rep.stages.back().solution;
      double change = 0.0, violation = 0.0;
      for (int j = 1; j + 1 < g.ny(); ++j) {
        for (int i = 1; i + 1 < g.nx(); ++i) {
          const double d = r.solution.at(i, j) - prev.at(i, j);
          violation = std::max(violation, -d);
          if (window.contains(g.x(i), g.y(j))) change = std::max(change, std::abs(d));
        }
      }
      rep.window_change.push_back(change);
      rep.monotonicity_violation = std::max(rep.monotonicity_violation, violation);
    }
    warm = r.solution;
    rep.stages.push_back(std::move(r));
  }
  rep.monotone = rep.monotonicity_violation <= 2.0 * cfg.tol;
  return rep;
}

}  // namespace cylasym
