#pragma once

#include <vector>

namespace cylasym {

/// Regularization schedule and Newton controls shared by the 1D and 2D solvers.
struct SolverConfig {
  double p = 2.0;
  /// Strictly decreasing, positive. Empty selects the mesh default
  /// (geometric from h down to 0.01 h^2 in five stages).
  std::vector<double> eps_schedule;
  /// Bound on max_i |dE/du_i| / cell_area at interior nodes.
  double tol = 1e-9;
  int max_newton = 200;
  double backtrack = 0.5;
  double armijo = 1e-4;
};

std::vector<double> default_eps_schedule(double h);

/// The schedule actually run: the configured one, the mesh default, or {0}
/// for p = 2 where regularization has no effect.
std::vector<double> resolved_eps_schedule(const SolverConfig& cfg, double h);

/// Throws DomainError on invalid fields.
void validate(const SolverConfig& cfg);

}  // namespace cylasym
