#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cylasym/grid.hpp"
#include "cylasym/nonlinearity.hpp"
#include "cylasym/ode1d.hpp"
#include "cylasym/solver.hpp"
#include "cylasym/solver_config.hpp"

namespace cylasym {

/// Boundary data depending on the cross-sectional coordinate only:
/// g0 at y0, g1 at y1, affine in between.
struct FiniteRegime {
  double g0 = 1.0;
  double g1 = 1.0;
};
/// Constant data M along an increasing M_list; the reference is the
/// cross-sectional solve at the same final M.
struct BlowupRegime {
  std::vector<double> M_list;
};

struct SweepSpec {
  Nonlinearity nl = Nonlinearity::zero();
  double p = 2.0;
  Interval cross{0.0, 1.0};
  std::variant<FiniteRegime, BlowupRegime> regime = FiniteRegime{};
  std::vector<double> ell_list{2.0, 4.0, 8.0, 16.0};
  Window window{-1.0, 1.0, 0.125, 0.875};
  /// Fixed mesh spacings; 2 ell / hx and (y1 - y0) / hy must be integers.
  double hx = 1.0 / 16.0;
  double hy = 1.0 / 16.0;
  /// Solver controls (p is taken from the spec). Unset: mesh default with tol 1e-11.
  std::optional<SolverConfig> solver;
  /// Re-solve the largest ell at doubled resolution to estimate the floor.
  bool estimate_floor = true;
  /// Concurrent row solves; 0 = hardware concurrency.
  int threads = 1;
};

/// Throws DomainError on an invalid spec.
void validate(const SweepSpec& spec);

struct RateRow {
  double ell = 0.0;
  double error = 0.0;  ///< || grad(u_ell - u_inf) ||_{L^p(window)}
  bool ok = true;      ///< false when the row's solve failed
  std::string failure;
  bool used_in_fit = false;
};

struct SweepOutcome {
  std::vector<RateRow> rows;  ///< sorted by ell
  double floor = 0.0;
  double mesh_difference = 0.0;  ///< |e_h - e_{h/2}| at the largest ell
  /// error of a null solve whose exact discrete answer is the embedded reference
  double noise_level = 0.0;
  std::string floor_failure;  ///< set when the floor could not be estimated
};

SweepOutcome sweep_ell(const SweepSpec& spec);

enum class RateStatus { ok, unfittable, unresolvable };
const char* to_string(RateStatus s);

struct RateReport {
  std::vector<RateRow> rows;
  double slope = 0.0;
  double intercept = 0.0;  ///< log C in log e = log C + slope log ell
  double target_slope = 0.0;
  bool pass = false;
  double floor = 0.0;
  RateStatus status = RateStatus::ok;
  std::string message;
  /// errors of the rows used in the fit are nonincreasing in ell
  bool monotone_above_floor = true;
};

/// Least squares on (log ell, log e) over successful rows with e > 3 floor;
/// pass iff status is ok and slope <= -1/p + 0.1.
RateReport fit_rate(std::vector<RateRow> rows, double p, double floor);

/// Outcome of a pointwise or integral property check.
struct CheckReport {
  bool holds = true;
  /// smallest bound - observed over the checked set (negative on violation)
  double margin = 0.0;
  double observed = 0.0;  ///< value attaining the margin
  double bound = 0.0;
  double worst_x = 0.0, worst_y = 0.0;
  int checked = 0;
  std::string detail;
};

/// u_{ell1} >= u_{ell2} - 2 tol at the nodes of the ell1 grid inside the window,
/// with u_{ell2} interpolated there.
CheckReport verify_monotone_in_ell(const SolveResult& r1, const SolveResult& r2, const Window& window);

/// max of u over nodes in B_{R/2}(x0) <= phi_R(R/2) + 2 tol, phi_R the 1D large
/// solution on (-R, R).
CheckReport verify_barrier(const SolveResult& r, const Nonlinearity& nl, double p, double x0,
                           double y0, double R);

/// int_inner |grad u|^p <= 1.05 (2 f(L) L |outer| + C_p ||grad chi||^p_{L^p(outer)} L^p),
/// L = max |u| over outer nodes, C_p = 2^(2p) (p-1)^(p-1) / p^p.
CheckReport verify_caccioppoli(const SolveResult& r, const Nonlinearity& nl, double p,
                               const Window& inner, const Window& outer);

/// u <= v + 2 tol at every node; boundary values must be ordered.
CheckReport verify_comparison(const SolveResult& u, const SolveResult& v);

}  // namespace cylasym
