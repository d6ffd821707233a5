#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "cylasym/solver_config.hpp"

namespace cylasym {

/// A smooth strictly convex energy over the free nodal values, parameterized
/// by the regularization eps.
class ConvexProblem {
 public:
  virtual ~ConvexProblem() = default;

  virtual Eigen::Index size() const = 0;
  virtual double energy(const Eigen::VectorXd& x, double eps) const = 0;
  /// Gradient, Hessian triplets (same sparsity pattern on every call), and
  /// per-entry sum of absolute contributions to the gradient (roundoff scale).
  virtual void assemble(const Eigen::VectorXd& x, double eps, Eigen::VectorXd& grad,
                        std::vector<Eigen::Triplet<double>>& hessian,
                        Eigen::VectorXd& grad_scale) const = 0;
  /// Divisor turning gradient entries into the area-scaled residual.
  virtual double residual_weight() const = 0;
};

struct NewtonOutcome {
  Eigen::VectorXd x;
  std::vector<int> iterations_per_stage;
  /// energies of accepted iterates, final stage only
  std::vector<double> energy_trace;
  double energy = 0.0;
  double residual = 0.0;
  /// roundoff level of the residual; convergence is residual <= max(tol, floor)
  double residual_floor = 0.0;
};

/// Damped Newton with backtracking (Armijo) line search, warm-started through
/// the eps schedule. Throws NumericalError if the final stage does not converge
/// within max_newton steps.
NewtonOutcome minimize(const ConvexProblem& problem, Eigen::VectorXd x0,
                       const std::vector<double>& eps_schedule, const SolverConfig& cfg);

}  // namespace cylasym
