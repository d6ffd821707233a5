#include "cylasym/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cylasym/errors.hpp"
#include "cylasym/quadrature.hpp"

namespace cylasym {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nonnegative(double s) {
  if (!(s >= 0.0)) throw DomainError("nonlinearity evaluated at negative argument");
}

void require_p(double p) {
  if (!(p > 1.0)) throw DomainError("exponent p must exceed 1");
}

// F(s) for a Custom nonlinearity without closed form
double custom_antiderivative(const Custom& c, double a, double s) {
  quad::Result r = quad::integrate(c.f, a, s, {1e-12, 1e-10, 4000});
  if (!r.converged) {
    std::ostringstream msg;
    msg << "antiderivative quadrature did not converge on [" << a << ", " << s
        << "], error estimate " << r.abs_error << " after " << r.evaluations << " evaluations";
    throw NumericalError(msg.str());
  }
  return r.value;
}

// expm1(d) - d without cancellation
double expm1_minus_x(double d) {
  if (std::abs(d) < 1e-2) {
    double term = d * d / 2.0;
    double sum = term;
    for (int k = 3; k < 12; ++k) {
      term *= d / k;
      sum += term;
    }
    return sum;
  }
  return std::expm1(d) - d;
}

}  // namespace

Nonlinearity Nonlinearity::power(double coefficient, double exponent) {
  if (!(coefficient > 0.0) || !(exponent > 0.0) || !std::isfinite(coefficient) ||
      !std::isfinite(exponent))
    throw DomainError("Power nonlinearity needs coefficient > 0 and exponent > 0");
  return Nonlinearity(Power{coefficient, exponent});
}

Nonlinearity Nonlinearity::exp_minus_one(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw DomainError("ExpMinusOne nonlinearity needs scale > 0");
  return Nonlinearity(ExpMinusOne{scale});
}

Nonlinearity Nonlinearity::zero() { return Nonlinearity(Zero{}); }

Nonlinearity Nonlinearity::custom(std::function<double(double)> f,
                                  std::function<double(double)> F,
                                  std::optional<double> tail_exponent_hint, std::string label) {
  if (!f) throw DomainError("custom nonlinearity needs an evaluator for f");
  const double f0 = f(0.0);
  if (f0 != 0.0) throw DomainError("custom nonlinearity violates f(0) = 0");
  double prev = 0.0;
  for (int k = 0; k <= 240; ++k) {
    const double s = std::pow(10.0, -6.0 + 0.05 * k);
    const double v = f(s);
    if (!std::isfinite(v)) break;  // past the overflow point of an exponential
    if (v < 0.0) throw DomainError("custom nonlinearity is negative at s = " + std::to_string(s));
    if (v < prev - 1e-12 * std::abs(prev))
      throw DomainError("custom nonlinearity is decreasing near s = " + std::to_string(s));
    prev = v;
  }
  if (F && std::abs(F(0.0)) > 1e-14) throw DomainError("custom antiderivative violates F(0) = 0");
  return Nonlinearity(Custom{std::move(f), std::move(F), std::move(label)}, tail_exponent_hint);
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Power& k) {
                   os << "Power(c=" << k.coefficient << ", q=" << k.exponent << ")";
                 },
                 [&](const ExpMinusOne& k) { os << "ExpMinusOne(lambda=" << k.scale << ")"; },
                 [&](const Zero&) { os << "Zero"; },
                 [&](const Custom& k) { os << "Custom(" << k.label << ")"; },
             },
             kind_);
  return os.str();
}

double eval_f(const Nonlinearity& nl, double s) {
  require_nonnegative(s);
  return std::visit(overloaded{
                        [&](const Power& k) { return k.coefficient * std::pow(s, k.exponent); },
                        [&](const ExpMinusOne& k) { return k.scale * std::expm1(s); },
                        [&](const Zero&) { return 0.0; },
                        [&](const Custom& k) { return k.f(s); },
                    },
                    nl.kind());
}

double eval_F(const Nonlinearity& nl, double s) {
  require_nonnegative(s);
  return std::visit(
      overloaded{
          [&](const Power& k) {
            return k.coefficient * std::pow(s, k.exponent + 1.0) / (k.exponent + 1.0);
          },
          [&](const ExpMinusOne& k) { return k.scale * expm1_minus_x(s); },
          [&](const Zero&) { return 0.0; },
          [&](const Custom& k) { return k.F ? k.F(s) : custom_antiderivative(k, 0.0, s); },
      },
      nl.kind());
}

double eval_F_increment(const Nonlinearity& nl, double a, double s) {
  require_nonnegative(a);
  if (s < a) throw DomainError("F increment needs s >= a");
  return eval_F_step(nl, a, s - a);
}

double eval_F_step(const Nonlinearity& nl, double a, double d) {
  require_nonnegative(a);
  require_nonnegative(d);
  if (a == 0.0) return eval_F(nl, d);
  return std::visit(
      overloaded{
          [&](const Power& k) {
            const double e = k.exponent + 1.0;
            return k.coefficient / e * std::pow(a, e) * std::expm1(e * std::log1p(d / a));
          },
          [&](const ExpMinusOne& k) {
            return k.scale * (std::expm1(a) * std::expm1(d) + expm1_minus_x(d));
          },
          [&](const Zero&) { return 0.0; },
          [&](const Custom& k) {
            return k.F ? k.F(a + d) - k.F(a) : custom_antiderivative(k, a, a + d);
          },
      },
      nl.kind());
}

double eval_df(const Nonlinearity& nl, double s) {
  require_nonnegative(s);
  return std::visit(overloaded{
                        [&](const Power& k) {
                          if (k.exponent == 1.0) return k.coefficient;
                          const double base = std::max(s, 1e-12);
                          return k.coefficient * k.exponent * std::pow(base, k.exponent - 1.0);
                        },
                        [&](const ExpMinusOne& k) { return k.scale * std::exp(s); },
                        [&](const Zero&) { return 0.0; },
                        [&](const Custom& k) {
                          const double h = 1e-6 * std::max(1.0, s);
                          if (s < h) return (k.f(s + h) - k.f(s)) / h;
                          return (k.f(s + h) - k.f(s - h)) / (2.0 * h);
                        },
                    },
                    nl.kind());
}

std::optional<double> psi_p(const Nonlinearity& nl, double p, double r) {
  require_p(p);
  if (!(r > 0.0)) throw DomainError("psi_p needs r > 0");
  if (std::holds_alternative<Zero>(nl.kind())) return std::nullopt;
  if (const auto* k = std::get_if<Power>(&nl.kind())) {
    // F(s) = c s^(q+1) / (q+1): the tail converges iff q + 1 > p
    if (k->exponent + 1.0 <= p) return std::nullopt;
  }
  const double inv_p = 1.0 / p;
  auto integrand = [&](double s) {
    const double F = eval_F(nl, s);
    if (F <= 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(F, -inv_p);
  };
  quad::TailResult tail = quad::integrate_tail(integrand, r);
  if (!tail.value) {
    // f >= c s^q with q + 1 > p forces convergence, so a failed Cauchy test
    // means the quadrature, not the integral, broke down
    if (!tail.hit_nonfinite && nl.tail_exponent_hint() && *nl.tail_exponent_hint() + 1.0 > p)
      throw NumericalError("psi_p tail did not converge although the tail exponent hint implies it");
    return std::nullopt;
  }
  return std::pow(1.0 - inv_p, inv_p) * *tail.value;
}

bool check_a1(const Nonlinearity& nl, double p) {
  require_p(p);
  for (double r : {1e-2, 1.0, 1e2}) {
    if (!psi_p(nl, p, r)) return false;
  }
  return true;
}

A2Report check_a2(const Nonlinearity& nl, double p, const std::vector<double>& beta_grid,
                  double t_max) {
  require_p(p);
  if (beta_grid.empty()) throw DomainError("check_a2 needs at least one beta");
  for (double b : beta_grid)
    if (!(b > 0.0 && b < 1.0)) throw DomainError("check_a2 needs beta in (0, 1)");
  if (!(t_max > 0.0)) throw DomainError("check_a2 needs t_max > 0");
  if (!check_a1(nl, p)) throw PreconditionError("(A1) fails: psi_p is undefined");

  constexpr int kPerDecade = 8;
  constexpr int kDecades = 3;
  A2Report rep;
  rep.beta_values = beta_grid;
  for (int k = kPerDecade * kDecades; k >= 0; --k)
    rep.t_values.push_back(t_max * std::pow(10.0, -static_cast<double>(k) / kPerDecade));

  std::vector<double> psi_t;
  for (double t : rep.t_values) {
    auto v = psi_p(nl, p, t);
    if (!v || !(*v > 0.0)) throw NumericalError("psi_p unresolvable at t = " + std::to_string(t));
    psi_t.push_back(*v);
  }
  rep.passes = true;
  for (double b : beta_grid) {
    std::vector<double> row;
    double liminf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rep.t_values.size(); ++j) {
      auto v = psi_p(nl, p, b * rep.t_values[j]);
      if (!v) throw NumericalError("psi_p diverged inside the (A2) probe");
      const double ratio = *v / psi_t[j];
      row.push_back(ratio);
      if (j + kPerDecade >= rep.t_values.size() - 1) liminf = std::min(liminf, ratio);
    }
    rep.ratio_matrix.push_back(std::move(row));
    rep.estimated_liminf_per_beta.push_back(liminf);
    if (!(liminf > 1.0 + 1e-3)) rep.passes = false;
  }
  return rep;
}

double psi_inverse(const Nonlinearity& nl, double p, double d) {
  require_p(p);
  if (!(d > 0.0)) throw DomainError("psi_inverse needs d > 0");
  // divergence at small v counts as +inf, which is above any target
  auto psi = [&](double v) {
    auto r = psi_p(nl, p, v);
    return r ? *r : std::numeric_limits<double>::infinity();
  };
  double lo = 1.0, hi = 1.0;
  double plo = psi(1.0);
  if (plo == std::numeric_limits<double>::infinity() && !check_a1(nl, p))
    throw PreconditionError("(A1) fails: psi_p cannot be inverted");
  if (plo > d) {
    double phi_v = plo;
    int n = 0;
    while (phi_v > d) {
      if (++n > 60) throw DomainError("psi_inverse: target below the representable range");
      lo = hi;
      hi *= 2.0;
      phi_v = psi(hi);
    }
  } else {
    double plo_v = plo;
    int n = 0;
    while (plo_v < d) {
      if (++n > 60) throw DomainError("psi_inverse: target exceeds sup psi_p over the probe range");
      hi = lo;
      lo *= 0.5;
      plo_v = psi(lo);
    }
  }
  double v = std::sqrt(lo * hi);
  for (int it = 0; it < 200; ++it) {
    v = std::sqrt(lo * hi);
    const double pv = psi(v);
    if (std::abs(pv - d) <= 1e-13 * d || hi / lo - 1.0 < 1e-15) break;
    if (pv > d)
      lo = v;
    else
      hi = v;
  }
  const double pv = psi(v);
  if (!(std::abs(pv - d) <= 1e-8 * d))
    throw NumericalError("psi_inverse did not reach relative accuracy 1e-8");
  return v;
}

}  // namespace cylasym
