#pragma once

#include <functional>
#include <optional>

namespace cylasym::quad {

using Integrand = std::function<double(double)>;

struct Options {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_intervals = 2000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
  /// false if the integrand returned inf/nan at some node
  bool finite = true;
};

/// Globally adaptive 21-point Gauss-Kronrod quadrature on [a, b].
Result integrate(const Integrand& f, double a, double b, const Options& opts = {});

struct TailOptions {
  Options panel{1e-300, 1e-13, 400};
  /// relative size of the estimated remainder at which the sum is accepted
  double rel_tol = 1e-11;
  /// Cauchy test: increments must fall below this relative size eventually
  double cauchy_tol = 1e-8;
  int max_panels = 1000;
};

struct TailResult {
  /// nullopt when the integral is judged divergent
  std::optional<double> value;
  double abs_error = 0.0;
  int panels = 0;
  int evaluations = 0;
  /// the integrand was infinite somewhere (e.g. F vanishing on a subinterval)
  bool hit_nonfinite = false;
};

/// Integral of a nonnegative integrand over [a, inf), a > 0.
///
/// The half-line is cut into dyadic panels [a 2^k, a 2^(k+1)] (equivalently,
/// dyadic panels of tau in (0, 1] under s = a / tau). Panel sums are
/// accumulated until the remainder, extrapolated geometrically from the ratio
/// of consecutive panels, is negligible. If the ratio settles at 1 or the
/// panel budget / double range is exhausted, the integral is declared
/// divergent.
TailResult integrate_tail(const Integrand& f, double a, const TailOptions& opts = {});

}  // namespace cylasym::quad
