#include "cylasym/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "cylasym/errors.hpp"

namespace cylasym {

namespace {

int cell_count(double length, double h, const char* what) {
  const double n = length / h;
  const double k = std::round(n);
  if (k < 2.0 || std::abs(n - k) > 1e-9 * k)
    throw DomainError(std::string("sweep: ") + what + " must divide the extent into at least 2 cells");
  return static_cast<int>(k);
}

SolverConfig sweep_config(const SweepSpec& s) {
  SolverConfig c = s.solver ? *s.solver : SolverConfig{};
  c.p = s.p;
  if (!s.solver) c.tol = 1e-11;
  return c;
}

struct RowSolve {
  double error;
  double reference_norm;
};

// 2D solve at ell and the cross-sectional reference on the same y-nodes with
// the same eps schedule. With `null_probe` the 2D boundary data are the
// reference values themselves, so the exact discrete solution is the embedded
// reference and the measured error is solver noise.
RowSolve solve_row(const SweepSpec& s, double ell, double hx, double hy, bool null_probe = false) {
  const int nx = cell_count(2.0 * ell, hx, "hx") + 1;
  const int ny = cell_count(s.cross.width(), hy, "hy") + 1;
  const RectGrid g(ell, s.cross, nx, ny);
  SolverConfig cfg = sweep_config(s);
  cfg.eps_schedule = resolved_eps_schedule(cfg, std::min(g.hx(), g.hy()));
  if (cfg.p == 2.0) cfg.eps_schedule.clear();
  const std::vector<double> nodes = uniform_nodes(s.cross, ny);
  auto from_profile = [](const CrossProfile& ref) {
    return DirichletData{[ref](double, double y) { return ref.value_at(y); }, "cross-sectional reference"};
  };

  const auto [reference, u] = std::visit(
      [&](const auto& regime) -> std::pair<CrossProfile, GridFunction> {
        using T = std::decay_t<decltype(regime)>;
        if constexpr (std::is_same_v<T, FiniteRegime>) {
          CrossProfile ref = solve_cross_finite_on(s.nl, nodes, regime.g0, regime.g1, cfg);
          const DirichletData data =
              null_probe ? from_profile(ref) : DirichletData::cross_affine(s.cross, regime.g0, regime.g1);
          SolveResult r = solve_dirichlet(g, s.nl, cfg, data);
          return {std::move(ref), std::move(r.solution)};
        } else {
          CrossProfile ref = solve_cross_large_on(s.nl, nodes, regime.M_list, cfg);
          if (!null_probe) {
            BlowupReport rep = solve_blowup(g, s.nl, cfg, regime.M_list, s.window);
            return {std::move(ref), std::move(rep.stages.back().solution)};
          }
          std::optional<GridFunction> warm;
          std::vector<double> prefix;
          for (double M : regime.M_list) {
            prefix.push_back(M);
            const CrossProfile stage = solve_cross_large_on(s.nl, nodes, prefix, cfg);
            warm = solve_dirichlet(g, s.nl, cfg, from_profile(stage), warm).solution;
          }
          return {std::move(ref), std::move(*warm)};
        }
      },
      s.regime);
  const GridFunction embedded = embed_cross_section(reference, g);
  return {lp_norm_gradient(u - embedded, s.p, s.window), lp_norm_gradient(embedded, s.p, s.window)};
}

void run_parallel(std::vector<std::function<void()>>& jobs, int threads) {
  int n = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  n = std::clamp(n, 1, static_cast<int>(jobs.size()));
  if (n == 1) {
    for (auto& j : jobs) j();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) jobs[k]();
    });
  for (auto& t : pool) t.join();
}

}  // namespace

void validate(const SweepSpec& s) {
  if (!(s.p > 1.0)) throw DomainError("sweep: p must exceed 1");
  if (!(s.cross.hi > s.cross.lo)) throw DomainError("sweep: cross interval must satisfy y0 < y1");
  if (s.ell_list.empty()) throw DomainError("sweep: ell_list must not be empty");
  for (std::size_t k = 0; k < s.ell_list.size(); ++k) {
    if (!(s.ell_list[k] > 0.0)) throw DomainError("sweep: ell values must be positive");
    if (k > 0 && !(s.ell_list[k] > s.ell_list[k - 1]))
      throw DomainError("sweep: ell_list must be strictly increasing");
  }
  if (!(s.hx > 0.0) || !(s.hy > 0.0)) throw DomainError("sweep: hx and hy must be positive");
  if (s.threads < 0) throw DomainError("sweep: threads must be nonnegative");
  const Window& w = s.window;
  const double half = 0.5 * s.ell_list.front();
  if (!(w.x_lo < w.x_hi && w.y_lo < w.y_hi)) throw DomainError("sweep: empty window");
  if (!(w.x_lo >= -half && w.x_hi <= half && w.y_lo > s.cross.lo && w.y_hi < s.cross.hi))
    throw DomainError("sweep: window must lie inside S_{ell_min/2}");
  if (const auto* b = std::get_if<BlowupRegime>(&s.regime)) {
    if (b->M_list.empty()) throw DomainError("sweep: M_list must not be empty");
  }
  if (s.solver) validate(*s.solver);
  for (double ell : s.ell_list) {
    cell_count(2.0 * ell, s.hx, "hx");
    require_inside(w, RectGrid(ell, s.cross, cell_count(2.0 * ell, s.hx, "hx") + 1,
                               cell_count(s.cross.width(), s.hy, "hy") + 1));
  }
}

SweepOutcome sweep_ell(const SweepSpec& s) {
  validate(s);
  const std::size_t n = s.ell_list.size();
  SweepOutcome out;
  out.rows.resize(n);
  std::optional<RowSolve> fine, noise;
  std::string fine_failure, noise_failure;

  std::vector<std::function<void()>> jobs;
  for (std::size_t k = 0; k < n; ++k) {
    jobs.emplace_back([&, k] {
      RateRow& row = out.rows[k];
      row.ell = s.ell_list[k];
      try {
        const RowSolve r = solve_row(s, row.ell, s.hx, s.hy);
        row.error = r.error;
      } catch (const NumericalError& e) {
        row.ok = false;
        row.error = std::numeric_limits<double>::quiet_NaN();
        row.failure = e.what();
      }
    });
  }
  if (s.estimate_floor) {
    jobs.emplace_back([&] {
      try {
        fine = solve_row(s, s.ell_list.back(), 0.5 * s.hx, 0.5 * s.hy);
      } catch (const NumericalError& e) {
        fine_failure = e.what();
      }
    });
  }
  jobs.emplace_back([&] {
    try {
      noise = solve_row(s, s.ell_list.back(), s.hx, s.hy, true);
    } catch (const NumericalError& e) {
      noise_failure = e.what();
    }
  });
  run_parallel(jobs, s.threads);

  const RateRow& last = out.rows.back();
  // the probe error is noise; never let it fall below a few ulps of the reference
  if (noise)
    out.noise_level = std::max(noise->error, 4.0 * std::numeric_limits<double>::epsilon() * noise->reference_norm);
  if (!last.ok || (s.estimate_floor && !fine) || !noise) {
    // no usable floor estimate: every row is treated as unresolved
    out.floor = std::numeric_limits<double>::infinity();
    out.mesh_difference = std::numeric_limits<double>::quiet_NaN();
    out.floor_failure = !last.ok ? last.failure : !noise_failure.empty() ? noise_failure : fine_failure;
  } else {
    out.mesh_difference = s.estimate_floor ? std::abs(last.error - fine->error) : 0.0;
    out.floor = std::max(out.mesh_difference, out.noise_level);
  }
  return out;
}

const char* to_string(RateStatus s) {
  switch (s) {
    case RateStatus::ok: return "ok";
    case RateStatus::unfittable: return "unfittable";
    case RateStatus::unresolvable: return "unresolvable";
  }
  return "unknown";
}

RateReport fit_rate(std::vector<RateRow> rows, double p, double floor) {
  if (!(p > 1.0)) throw DomainError("fit_rate: p must exceed 1");
  if (!(floor >= 0.0)) throw DomainError("fit_rate: floor must be nonnegative");
  std::sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) { return a.ell < b.ell; });
  RateReport rep;
  rep.target_slope = -1.0 / p;
  rep.floor = floor;

  std::vector<double> xs, ys;
  int ok_rows = 0;
  for (RateRow& r : rows) {
    if (!(r.ell > 0.0)) throw DomainError("fit_rate: ell must be positive");
    if (r.ok && !(r.error >= 0.0)) throw DomainError("fit_rate: errors must be nonnegative");
    r.used_in_fit = r.ok && r.error > 3.0 * floor && r.error > 0.0;
    if (r.ok) ++ok_rows;
    if (r.used_in_fit) {
      if (!xs.empty() && r.error > std::exp(ys.back())) rep.monotone_above_floor = false;
      xs.push_back(std::log(r.ell));
      ys.push_back(std::log(r.error));
    }
  }
  rep.rows = std::move(rows);

  if (xs.empty() && ok_rows > 0) {
    rep.status = RateStatus::unresolvable;
    rep.message = "rate unresolvable at this resolution";
    return rep;
  }
  if (xs.size() < 3) {
    rep.status = RateStatus::unfittable;
    std::ostringstream os;
    os << "only " << xs.size() << " rows above the discretization floor; need 3";
    rep.message = os.str();
    return rep;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  rep.pass = rep.slope <= rep.target_slope + 0.1;
  rep.message = rep.pass ? "slope within the bound" : "slope exceeds -1/p + 0.1";
  return rep;
}

namespace {

double result_tol(const SolveResult& r) { return r.tol; }

void note_worst(CheckReport& rep, double bound, double observed, double x, double y) {
  const double margin = bound - observed;
  if (rep.checked == 0 || margin < rep.margin) {
    rep.margin = margin;
    rep.bound = bound;
    rep.observed = observed;
    rep.worst_x = x;
    rep.worst_y = y;
  }
  ++rep.checked;
}

void finish(CheckReport& rep, double allowance) {
  rep.holds = rep.checked == 0 || rep.margin >= -allowance;
  std::ostringstream os;
  if (rep.holds)
    os << "holds at " << rep.checked << " points; smallest margin " << rep.margin;
  else
    os << "violated at (" << rep.worst_x << ", " << rep.worst_y << "): observed " << rep.observed
       << " exceeds bound " << rep.bound;
  rep.detail = os.str();
}

}  // namespace

CheckReport verify_monotone_in_ell(const SolveResult& r1, const SolveResult& r2, const Window& window) {
  const RectGrid& g1 = r1.solution.grid;
  const RectGrid& g2 = r2.solution.grid;
  if (!(g1.ell() <= g2.ell())) throw DomainError("verify_monotone_in_ell: need ell1 <= ell2");
  if (g1.cross().lo != g2.cross().lo || g1.cross().hi != g2.cross().hi)
    throw DomainError("verify_monotone_in_ell: cross-sections differ");
  require_inside(window, g1);
  const auto* b1 = std::get_if<BlowupStage>(&r1.boundary_mode);
  const auto* b2 = std::get_if<BlowupStage>(&r2.boundary_mode);
  if ((b1 == nullptr) != (b2 == nullptr) || (b1 && b1->M != b2->M))
    throw PreconditionError("verify_monotone_in_ell: results must share the boundary regime and final M");

  const double tol = std::max(result_tol(r1), result_tol(r2));
  CheckReport rep;
  for (int j = 0; j < g1.ny(); ++j) {
    for (int i = 0; i < g1.nx(); ++i) {
      const double x = g1.x(i), y = g1.y(j);
      if (!window.contains(x, y)) continue;
      // u_{ell2} <= u_{ell1}: bound is u_{ell1}
      note_worst(rep, r1.solution.at(i, j), interpolate(r2.solution, x, y), x, y);
    }
  }
  finish(rep, 2.0 * tol);
  return rep;
}

CheckReport verify_barrier(const SolveResult& r, const Nonlinearity& nl, double p, double x0,
                           double y0, double R) {
  const RectGrid& g = r.solution.grid;
  if (!(R > 0.0)) throw DomainError("verify_barrier: R must be positive");
  if (!(x0 - R > -g.ell() && x0 + R < g.ell() && y0 - R > g.cross().lo && y0 + R < g.cross().hi))
    throw DomainError("verify_barrier: closed ball B_R(x0) must lie inside the rectangle");
  const LargeSolution1D phi = solve_large_1d(nl, p, R);
  const double bound = phi.value_at(0.5 * R);
  CheckReport rep;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x(i), y = g.y(j);
      if (std::hypot(x - x0, y - y0) > 0.5 * R) continue;
      note_worst(rep, bound, r.solution.at(i, j), x, y);
    }
  }
  rep.bound = bound;
  finish(rep, 2.0 * result_tol(r));
  return rep;
}

CheckReport verify_caccioppoli(const SolveResult& r, const Nonlinearity& nl, double p,
                               const Window& inner, const Window& outer) {
  if (!(p > 1.0)) throw DomainError("verify_caccioppoli: p must exceed 1");
  const GridFunction& u = r.solution;
  const RectGrid& g = u.grid;
  const GridFunction chi = cutoff_function(inner, outer, g);  // checks the nesting

  const double lhs = std::pow(lp_norm_gradient(u, p, inner), p);
  double lambda = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (outer.contains(g.x(i), g.y(j))) lambda = std::max(lambda, std::abs(u.at(i, j)));
  const double c_p = std::pow(2.0, 2.0 * p) * std::pow(p - 1.0, p - 1.0) / std::pow(p, p);
  const double cutoff = std::pow(lp_norm_gradient(chi, p, outer), p);
  const double rhs = 2.0 * eval_f(nl, lambda) * lambda * outer.area() + c_p * cutoff * std::pow(lambda, p);

  CheckReport rep;
  note_worst(rep, 1.05 * rhs, lhs, 0.5 * (inner.x_lo + inner.x_hi), 0.5 * (inner.y_lo + inner.y_hi));
  finish(rep, 0.0);
  std::ostringstream os;
  os << rep.detail << "; lhs " << lhs << ", rhs " << rhs << ", Lambda " << lambda;
  rep.detail = os.str();
  return rep;
}

CheckReport verify_comparison(const SolveResult& u, const SolveResult& v) {
  const RectGrid& g = u.solution.grid;
  if (!(g == v.solution.grid)) throw DomainError("verify_comparison: results live on different grids");
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (g.on_boundary(i, j) && u.solution.at(i, j) > v.solution.at(i, j))
        throw PreconditionError("verify_comparison: boundary data are not ordered");
  const double tol = std::max(result_tol(u), result_tol(v));
  CheckReport rep;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      note_worst(rep, v.solution.at(i, j), u.solution.at(i, j), g.x(i), g.y(j));
  finish(rep, 2.0 * tol);
  return rep;
}

}  // namespace cylasym
