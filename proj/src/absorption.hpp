#pragma once

#include "cylasym/nonlinearity.hpp"

namespace cylasym::detail {

// f and F extended by zero to negative arguments. The extension keeps F convex
// and C^1, so Newton iterates may undershoot zero without leaving the domain.

inline double absorption_F(const Nonlinearity& nl, double u) {
  return u > 0.0 ? eval_F(nl, u) : 0.0;
}

inline double absorption_f(const Nonlinearity& nl, double u) {
  return u > 0.0 ? eval_f(nl, u) : 0.0;
}

inline double absorption_df(const Nonlinearity& nl, double u) {
  return u >= 0.0 ? eval_df(nl, u) : 0.0;
}

}  // namespace cylasym::detail
