#pragma once

#include <cmath>

namespace cylasym {

// Regularized p-Dirichlet density W(g) = ((|g|^2 + eps^2)^(p/2) - eps^p) / p,
// written in terms of g2 = |g|^2. W is smooth and strictly convex for eps > 0;
// eps = 0 is only meaningful for p = 2.

template <class Scalar>
Scalar density(Scalar g2, Scalar p, Scalar eps) {
  using std::expm1;
  using std::log1p;
  using std::pow;
  if (eps == Scalar(0)) return pow(g2, p / Scalar(2)) / p;
  const Scalar e2 = eps * eps;
  return pow(eps, p) * expm1(p / Scalar(2) * log1p(g2 / e2)) / p;
}

/// a(g2) with dW/dg = a g.
template <class Scalar>
Scalar flux_coefficient(Scalar g2, Scalar p, Scalar eps) {
  using std::pow;
  if (p == Scalar(2)) return Scalar(1);
  return pow(g2 + eps * eps, (p - Scalar(2)) / Scalar(2));
}

/// b(g2) with d^2W/dg^2 = a I + b g g^T.
template <class Scalar>
Scalar flux_coefficient_slope(Scalar g2, Scalar p, Scalar eps) {
  using std::pow;
  if (p == Scalar(2)) return Scalar(0);
  return (p - Scalar(2)) * pow(g2 + eps * eps, (p - Scalar(4)) / Scalar(2));
}

}  // namespace cylasym
