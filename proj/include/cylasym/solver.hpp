#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cylasym/grid.hpp"
#include "cylasym/nonlinearity.hpp"
#include "cylasym/solver_config.hpp"

namespace cylasym {

/// Dirichlet values on the boundary nodes of a RectGrid.
struct DirichletData {
  std::function<double(double x, double y)> g;
  std::string description;

  static DirichletData constant(double c);
  /// g(x, y) = g0 + (g1 - g0) (y - y0) / (y1 - y0): data depending on the
  /// cross-sectional coordinate only.
  static DirichletData cross_affine(Interval cross, double g0, double g1);
};

struct DirichletMode {
  std::string description;
};
struct BlowupStage {
  double M;
};

struct SolveResult {
  GridFunction solution;
  std::vector<int> iterations;  ///< Newton steps per eps stage
  double energy = 0.0;          ///< discrete energy at the final eps
  double residual = 0.0;        ///< max |dE/du_i| / (hx hy) at interior nodes
  double residual_floor = 0.0;  ///< roundoff level of the residual
  double tol = 0.0;
  double eps_final = 0.0;
  std::vector<double> energy_trace;  ///< accepted iterates, final eps stage
  std::variant<DirichletMode, BlowupStage> boundary_mode;
};

/// sum_T |T| ((|grad u|^2 + eps^2)^(p/2) - eps^p) / p + sum_i m_i F(u_i),
/// with F extended by zero below 0 and m the lumped mass.
double energy(const GridFunction& u, const Nonlinearity& nl, double p, double eps);

/// Exact gradient of `energy` with respect to every nodal value.
Eigen::VectorXd energy_gradient(const GridFunction& u, const Nonlinearity& nl, double p, double eps);

/// Solver controls with the mesh-default eps schedule filled in.
SolverConfig default_solver_config(double p, const RectGrid& g);

/// Minimizes the energy over interior values with boundary nodes fixed.
/// `initial` (optional) warm-starts the interior.
SolveResult solve_dirichlet(const RectGrid& g, const Nonlinearity& nl, const SolverConfig& cfg,
                            const DirichletData& bdata,
                            const std::optional<GridFunction>& initial = std::nullopt);

struct BlowupReport {
  std::vector<SolveResult> stages;
  /// max |u_{M_k} - u_{M_{k-1}}| over window nodes, k >= 1
  std::vector<double> window_change;
  /// largest decrease of an interior value between consecutive stages (>= 0)
  double monotonicity_violation = 0.0;
  /// monotonicity_violation <= 2 tol
  bool monotone = true;
};

/// One Dirichlet solve per M with data identically M, warm-started.
BlowupReport solve_blowup(const RectGrid& g, const Nonlinearity& nl, const SolverConfig& cfg,
                          const std::vector<double>& M_list, const Window& window);

}  // namespace cylasym
