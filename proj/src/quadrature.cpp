#include "cylasym/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace cylasym::quad {

namespace {

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980221107, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk21(const Integrand& f, double a, double b, bool& finite) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = kWgk[10] * fc;
  double gauss = 0.0;
  if (!std::isfinite(fc)) finite = false;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    if (!std::isfinite(f1) || !std::isfinite(f2)) finite = false;
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Options& opts) {
  Result res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::priority_queue<Panel> heap;
  bool finite = true;
  Panel first = gk21(f, a, b, finite);
  res.evaluations = 21;
  heap.push(first);
  double total = first.value;
  double err = first.error;
  int intervals = 1;
  while (finite && err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
         intervals < opts.max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval can no longer be split in double precision
      heap.push(worst);
      break;
    }
    Panel left = gk21(f, worst.a, mid, finite);
    Panel right = gk21(f, mid, worst.b, finite);
    res.evaluations += 42;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // re-sum to shed the drift of the running updates
  total = 0.0;
  err = 0.0;
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  for (auto it = panels.rbegin(); it != panels.rend(); ++it) {
    total += it->value;
    err += it->error;
  }
  res.value = total;
  res.abs_error = err;
  res.finite = finite;
  res.converged = finite && err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  return res;
}

TailResult integrate_tail(const Integrand& f, double a, const TailOptions& opts) {
  TailResult out;
  double sum = 0.0;
  double err = 0.0;
  double prev_inc = -1.0;
  double prev_rho = -1.0;
  int flat_run = 0;
  constexpr int kFlatLimit = 64;
  constexpr double kFlatRatio = 0.999;

  for (int k = 0; k < opts.max_panels; ++k) {
    const double lo = std::ldexp(a, k);
    const double hi = 2.0 * lo;
    if (!(hi < 1e300)) break;
    Result r = integrate(f, lo, hi, opts.panel);
    out.evaluations += r.evaluations;
    out.panels = k + 1;
    if (!r.finite) {
      out.hit_nonfinite = true;
      return out;
    }
    const double inc = r.value;
    sum += inc;
    err += r.abs_error;

    if (inc == 0.0) {
      // integrand underflowed (e.g. exponential growth of F)
      if (sum > 0.0 || k > 0) {
        out.value = sum;
        out.abs_error = err;
        return out;
      }
      prev_inc = inc;
      continue;
    }
    if (prev_inc > 0.0) {
      const double rho = inc / prev_inc;
      const bool stable =
          prev_rho > 0.0 && std::abs(rho - prev_rho) <= 1e-3 * std::max(rho, prev_rho);
      const bool shrinking_ratio = prev_rho > 0.0 && rho <= prev_rho;
      if (rho < kFlatRatio && (stable || shrinking_ratio)) {
        const double tail = inc * rho / (1.0 - rho);
        if (tail <= opts.rel_tol * sum) {
          out.value = sum + tail;
          out.abs_error = err + 1e-3 * tail;
          return out;
        }
      }
      flat_run = (rho >= kFlatRatio) ? flat_run + 1 : 0;
      if (flat_run >= kFlatLimit && inc > opts.cauchy_tol * sum) return out;
      prev_rho = rho;
    }
    prev_inc = inc;
  }
  return out;
}

}  // namespace cylasym::quad
