#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "cylasym/nonlinearity.hpp"
#include "cylasym/solver_config.hpp"

namespace cylasym {

/// Half-length r(a) of the interval on which the symmetric blow-up profile
/// with center value a lives:
///   r(a) = int_a^inf [ p/(p-1) (F(s) - F(a)) ]^(-1/p) ds.
/// Throws DivergentError when the tail diverges.
double blowup_radius(const Nonlinearity& nl, double p, double a);

struct ProfileSample {
  double t;      ///< position in [0, r)
  double gap;    ///< r - t, computed directly (no cancellation near the blow-up end)
  double phi;    ///< phi(t)
  double dphi;   ///< phi'(t) >= 0
  double residual;  ///< first-integral residual, relative to max(1, F(phi) - F(a))
};

/// Symmetric blow-up solution of (|phi'|^(p-2) phi')' = f(phi) on (-r, r);
/// samples cover t >= 0, clustered toward the blow-up end.
class LargeSolution1D {
 public:
  LargeSolution1D(Nonlinearity nl, double p, double r, double a,
                  std::vector<ProfileSample> samples);

  double r() const noexcept { return r_; }
  double a() const noexcept { return a_; }
  double p() const noexcept { return p_; }
  const Nonlinearity& nonlinearity() const noexcept { return nl_; }
  const std::vector<ProfileSample>& samples() const noexcept { return samples_; }
  double residual_max() const;

  /// phi(t) for |t| < r, by inverting t(v) with quadrature.
  double value_at(double t) const;
  /// phi'(t) for t in [0, r), from the first integral.
  double slope_at(double t) const;
  /// t(v) for v >= a.
  double position_of(double v) const;
  /// r - t(v) for v >= a.
  double gap_of(double v) const;

 private:
  Nonlinearity nl_;
  double p_, r_, a_;
  double r_actual_;
  std::vector<ProfileSample> samples_;
};

/// Shooting on the center value: bisection for a with |r(a) - r| <= 1e-10 r.
LargeSolution1D solve_large_1d(const Nonlinearity& nl, double p, double r);
/// Profile with prescribed center value a; r = r(a).
LargeSolution1D large_1d_from_center(const Nonlinearity& nl, double p, double a);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
};

struct FiniteData {
  double g0, g1;
};

struct BlowupData {
  std::vector<double> M_list;
  /// max interior change between the last two M stages
  double stabilization_residual = 0.0;
  /// max decrease of an interior value between consecutive stages (>= 0)
  double monotonicity_violation = 0.0;
  /// nodal values per M stage
  std::vector<std::vector<double>> stages;
};

/// Discrete solution of the cross-sectional problem on a 1D node set.
struct CrossProfile {
  Interval interval;
  std::vector<double> nodes;
  std::vector<double> values;
  std::variant<FiniteData, BlowupData> mode;
  double residual = 0.0;
  double energy = 0.0;
  std::vector<int> iterations;

  /// piecewise-linear interpolation of the nodal values
  double value_at(double y) const;
};

std::vector<double> uniform_nodes(Interval interval, int n_nodes);
/// Nodes clustered at both ends: spacing grows like growth * distance from
/// h_min up to h_max.
std::vector<double> graded_nodes(Interval interval, double h_min, double growth, double h_max);

/// Solver controls for a 1D node set when none are supplied: p from the
/// argument, eps schedule from the mean spacing.
SolverConfig default_cross_config(double p, const std::vector<double>& nodes);

CrossProfile solve_cross_finite(const Nonlinearity& nl, double p, Interval interval, double g0,
                                double g1, int n_nodes,
                                const std::optional<SolverConfig>& cfg = std::nullopt);
CrossProfile solve_cross_finite_on(const Nonlinearity& nl, std::vector<double> nodes, double g0,
                                   double g1, const SolverConfig& cfg);

CrossProfile solve_cross_large(const Nonlinearity& nl, double p, Interval interval,
                               const std::vector<double>& M_list, int n_nodes,
                               const std::optional<SolverConfig>& cfg = std::nullopt);
CrossProfile solve_cross_large_on(const Nonlinearity& nl, std::vector<double> nodes,
                                  const std::vector<double>& M_list, const SolverConfig& cfg);

}  // namespace cylasym
