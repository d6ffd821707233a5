#include "cylasym/newton.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "cylasym/errors.hpp"

namespace cylasym {

std::vector<double> default_eps_schedule(double h) {
  std::vector<double> eps;
  const double last = 0.01 * h * h;
  for (int k = 0; k < 5; ++k) eps.push_back(h * std::pow(last / h, k / 4.0));
  return eps;
}

std::vector<double> resolved_eps_schedule(const SolverConfig& cfg, double h) {
  if (cfg.p == 2.0) return {0.0};
  if (!cfg.eps_schedule.empty()) return cfg.eps_schedule;
  return default_eps_schedule(h);
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.p > 1.0)) throw DomainError("solver: p must exceed 1");
  if (!(cfg.tol > 0.0)) throw DomainError("solver: tol must be positive");
  if (cfg.max_newton < 1) throw DomainError("solver: max_newton must be at least 1");
  if (!(cfg.backtrack > 0.0 && cfg.backtrack < 1.0))
    throw DomainError("solver: backtracking factor must lie in (0, 1)");
  if (!(cfg.armijo > 0.0 && cfg.armijo < 0.5))
    throw DomainError("solver: sufficient-decrease constant must lie in (0, 0.5)");
  for (std::size_t k = 0; k < cfg.eps_schedule.size(); ++k) {
    if (!(cfg.eps_schedule[k] > 0.0)) throw DomainError("solver: eps_schedule must be positive");
    if (k > 0 && !(cfg.eps_schedule[k] < cfg.eps_schedule[k - 1]))
      throw DomainError("solver: eps_schedule must be strictly decreasing");
  }
}

namespace {

struct Residual {
  double value;
  double floor;
};

// Roundoff level of the gradient: summation error of its terms plus the
// response to one-ulp perturbations of the unknowns, sum_j |H_ij| |x_j|.
Residual measure(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const Eigen::VectorXd& scale,
                 const std::vector<Eigen::Triplet<double>>& hess, double weight) {
  if (grad.size() == 0) return {0.0, 0.0};
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  Eigen::VectorXd sensitivity = Eigen::VectorXd::Zero(grad.size());
  for (const auto& t : hess) sensitivity[t.row()] += std::abs(t.value()) * std::abs(x[t.col()]);
  const double level = std::max(256.0 * kEps * scale.maxCoeff(), 4.0 * kEps * sensitivity.maxCoeff());
  return {grad.cwiseAbs().maxCoeff() / weight, level / weight};
}

}  // namespace

NewtonOutcome minimize(const ConvexProblem& problem, Eigen::VectorXd x0,
                       const std::vector<double>& eps_schedule, const SolverConfig& cfg) {
  validate(cfg);
  if (eps_schedule.empty()) throw DomainError("newton: empty eps schedule");
  const Eigen::Index n = problem.size();
  if (x0.size() != n) throw DomainError("newton: initial guess has the wrong size");

  NewtonOutcome out;
  out.x = std::move(x0);
  const double weight = problem.residual_weight();

  Eigen::VectorXd grad(n), scale(n), trial_grad(n), trial_scale(n);
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::SparseMatrix<double> hess(n, n);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  std::vector<std::string> trace;
  auto log = [&](const std::string& line) {
    trace.push_back(line);
    if (trace.size() > 200) trace.erase(trace.begin());
  };

  for (std::size_t stage = 0; stage < eps_schedule.size(); ++stage) {
    const double eps = eps_schedule[stage];
    const bool final_stage = stage + 1 == eps_schedule.size();
    const double stage_tol = final_stage ? cfg.tol : std::max(cfg.tol, 1e-6);
    int its = 0;
    double energy = problem.energy(out.x, eps);
    if (final_stage) out.energy_trace.push_back(energy);
    Residual res{};

    for (;;) {
      triplets.clear();
      problem.assemble(out.x, eps, grad, triplets, scale);
      if (!grad.allFinite())
        throw NumericalError("newton: non-finite gradient at eps = " + std::to_string(eps), trace);
      res = measure(out.x, grad, scale, triplets, weight);
      {
        std::ostringstream os;
        os << "stage " << stage << " eps=" << eps << " it=" << its << " E=" << energy
           << " residual=" << res.value;
        log(os.str());
      }
      if (res.value <= std::max(stage_tol, res.floor)) break;
      if (its >= cfg.max_newton) {
        if (final_stage)
          throw NumericalError("newton: max_newton exceeded at final eps", trace);
        break;
      }

      hess.setFromTriplets(triplets.begin(), triplets.end());
      for (int k = 0; k < hess.nonZeros(); ++k) {
        if (!std::isfinite(hess.valuePtr()[k]))
          throw NumericalError("newton: non-finite Hessian entry", trace);
      }
      if (!analyzed) {
        ldlt.analyzePattern(hess);
        analyzed = true;
      }
      ldlt.factorize(hess);
      if (ldlt.info() != Eigen::Success) {
        // numerically indefinite: fall back to a shifted factorization
        Eigen::SparseMatrix<double> shifted = hess;
        const double shift = 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
        ldlt.factorize(shifted);
        if (ldlt.info() != Eigen::Success)
          throw NumericalError("newton: Hessian factorization failed", trace);
      }
      Eigen::VectorXd step = ldlt.solve(-grad);
      double slope = grad.dot(step);
      if (!(slope < 0.0) || !step.allFinite()) {
        step = -grad;
        slope = -grad.squaredNorm();
      }

      // full step accepted when the energy stays within roundoff and the
      // residual drops
      auto try_full_step = [&](Eigen::VectorXd& trial, double& trial_energy) {
        trial = out.x + step;
        trial_energy = problem.energy(trial, eps);
        triplets.clear();
        problem.assemble(trial, eps, trial_grad, triplets, trial_scale);
        if (!trial_grad.allFinite()) return false;
        const Residual trial_res = measure(trial, trial_grad, trial_scale, triplets, weight);
        const double slack = 1e-12 * std::max(1.0, std::abs(energy));
        return std::isfinite(trial_energy) && trial_energy <= energy + slack &&
               trial_res.value < res.value;
      };

      double alpha = 1.0;
      bool accepted = false;
      Eigen::VectorXd trial;
      double trial_energy = energy;
      // predicted decrease below the roundoff of E: Armijo would only see noise
      const bool roundoff_regime = -slope <= 1e-11 * std::max(1.0, std::abs(energy));
      if (roundoff_regime && try_full_step(trial, trial_energy)) accepted = true;
      for (int k = 0; k < 60 && !accepted; ++k) {
        trial = out.x + alpha * step;
        trial_energy = problem.energy(trial, eps);
        if (std::isfinite(trial_energy) && trial_energy <= energy + cfg.armijo * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= cfg.backtrack;
      }
      if (!accepted && !roundoff_regime && try_full_step(trial, trial_energy)) accepted = true;
      if (!accepted) {
        if (final_stage) throw NumericalError("newton: line search failed", trace);
        break;
      }
      out.x = std::move(trial);
      energy = trial_energy;
      if (final_stage) out.energy_trace.push_back(energy);
      ++its;
    }
    out.iterations_per_stage.push_back(its);
    out.energy = energy;
    out.residual = res.value;
    out.residual_floor = res.floor;
  }
  return out;
}

}  // namespace cylasym
