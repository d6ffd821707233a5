#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cylasym {

/// f(s) = coefficient * s^exponent
struct Power {
  double coefficient = 1.0;
  double exponent = 1.0;
};

/// f(s) = scale * (e^s - 1)
struct ExpMinusOne {
  double scale = 1.0;
};

/// f == 0
struct Zero {};

/// User-supplied f, with an optional closed-form antiderivative F (F(0) = 0).
struct Custom {
  std::function<double(double)> f;
  std::function<double(double)> F;
  std::string label = "custom";
};

/// Absorption nonlinearity f: [0, inf) -> [0, inf), continuous, nondecreasing,
/// f(0) = 0. Immutable once built; Custom kinds are validated by sampling.
class Nonlinearity {
 public:
  using Kind = std::variant<Power, ExpMinusOne, Zero, Custom>;

  static Nonlinearity power(double coefficient, double exponent);
  static Nonlinearity exp_minus_one(double scale);
  static Nonlinearity zero();
  /// `tail_exponent_hint` is a q with f(s) >= c s^q for large s.
  static Nonlinearity custom(std::function<double(double)> f,
                             std::function<double(double)> F = {},
                             std::optional<double> tail_exponent_hint = std::nullopt,
                             std::string label = "custom");

  const Kind& kind() const noexcept { return kind_; }
  std::optional<double> tail_exponent_hint() const noexcept { return hint_; }
  std::string describe() const;

 private:
  explicit Nonlinearity(Kind k, std::optional<double> hint = std::nullopt)
      : kind_(std::move(k)), hint_(hint) {}

  Kind kind_;
  std::optional<double> hint_;
};

double eval_f(const Nonlinearity& nl, double s);
double eval_F(const Nonlinearity& nl, double s);
/// F(s) - F(a) for 0 <= a <= s, without the cancellation of the naive difference.
double eval_F_increment(const Nonlinearity& nl, double a, double s);
/// F(a + d) - F(a) for a >= 0, d >= 0; exact in d even when d << a.
double eval_F_step(const Nonlinearity& nl, double a, double d);
/// f'(s), finite-differenced for Custom kinds; used for Newton Hessians.
double eval_df(const Nonlinearity& nl, double s);

/// Keller-Osserman integral (1 - 1/p)^(1/p) * int_r^inf F(s)^(-1/p) ds.
/// Returns nullopt when the integral diverges.
std::optional<double> psi_p(const Nonlinearity& nl, double p, double r);

/// (A1): psi_p finite at r in {1e-2, 1, 1e2}.
bool check_a1(const Nonlinearity& nl, double p);

struct A2Report {
  std::vector<double> beta_values;
  std::vector<double> t_values;
  /// ratio_matrix[i][j] = psi_p(beta_i t_j) / psi_p(t_j)
  std::vector<std::vector<double>> ratio_matrix;
  std::vector<double> estimated_liminf_per_beta;
  bool passes = false;
};

/// Numerical probe of liminf_{t -> inf} psi_p(beta t) / psi_p(t) > 1: the
/// minimum over the last decade of a geometric t-grid ending at t_max.
A2Report check_a2(const Nonlinearity& nl, double p, const std::vector<double>& beta_grid,
                  double t_max);

/// v with psi_p(v) = d (relative accuracy 1e-8 or better).
double psi_inverse(const Nonlinearity& nl, double p, double d);

}  // namespace cylasym
