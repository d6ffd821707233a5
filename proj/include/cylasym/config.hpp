#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cylasym/asymptotics.hpp"
#include "cylasym/errors.hpp"
#include "cylasym/grid.hpp"
#include "cylasym/nonlinearity.hpp"
#include "cylasym/solver_config.hpp"

namespace cylasym {

/// Malformed configuration; `pointer()` is the JSON pointer of the offending key.
class ConfigError : public DomainError {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : DomainError(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct GeometryConfig {
  std::optional<double> ell;
  std::vector<double> ell_list;
  Interval cross{0.0, 1.0};
  std::optional<int> nx, ny;
  std::optional<double> hx, hy;
};

/// Solver fields present in the config; absent fields keep their defaults.
struct SolverOverrides {
  std::optional<double> tol;
  std::optional<int> max_newton;
  std::optional<std::vector<double>> eps_schedule;
  std::optional<double> backtrack;
  std::optional<double> armijo;

  SolverConfig apply(SolverConfig base) const;
  bool empty() const noexcept {
    return !tol && !max_newton && !eps_schedule && !backtrack && !armijo;
  }
};

struct NestedWindows {
  Window inner, outer;
};

struct PropertyConfig {
  std::vector<std::pair<double, double>> comparison_pairs;  ///< constant data (lo, hi)
  struct Ball {
    double x0, y0, R;
  };
  std::vector<Ball> barrier_balls;
  std::vector<NestedWindows> caccioppoli_windows;
  std::optional<std::pair<double, double>> monotone_ell_pair;
  bool empty() const noexcept {
    return comparison_pairs.empty() && barrier_balls.empty() && caccioppoli_windows.empty() &&
           !monotone_ell_pair;
  }
};

struct RunConfig {
  int schema_version = 1;
  Nonlinearity nl = Nonlinearity::zero();
  double p = 2.0;
  std::optional<GeometryConfig> geometry;
  std::optional<std::variant<FiniteRegime, BlowupRegime>> boundary;
  SolverOverrides solver;
  std::optional<Window> window;
  std::optional<std::string> output;

  std::vector<double> psi_r_values{0.5, 1.0, 2.0, 4.0};
  std::optional<double> ode1d_r, ode1d_a;
  std::vector<double> a2_beta{0.25, 0.5, 0.75};
  double a2_t_max = 1e6;
  PropertyConfig properties;
  bool estimate_floor = true;
  std::optional<std::string> rate_input;
};

/// Parses a schema_version 1 document; unknown keys are rejected.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace cylasym
