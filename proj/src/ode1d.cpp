#include "cylasym/ode1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "absorption.hpp"
#include "cylasym/energy_density.hpp"
#include "cylasym/errors.hpp"
#include "cylasym/newton.hpp"
#include "cylasym/quadrature.hpp"

namespace cylasym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_p(double p) {
  if (!(p > 1.0)) throw DomainError("exponent p must exceed 1");
}

// The quadratures behind t(v) = int_a^v [kappa (F(s) - F(a))]^(-1/p) ds,
// kappa = p / (p - 1).
class TimeIntegrals {
 public:
  TimeIntegrals(const Nonlinearity& nl, double p, double a)
      : nl_(nl), a_(a), inv_p_(1.0 / p), kappa_(p / (p - 1.0)) {}

  double integrand_step(double d) const {
    const double dF = eval_F_step(nl_, a_, d);
    if (!(dF > 0.0)) return kInf;
    return std::pow(kappa_ * dF, -inv_p_);
  }

  // int_a^v, with s = a + sigma^kappa removing the (s - a)^(-1/p) singularity
  double near(double v) const {
    if (v <= a_) return 0.0;
    const double smax = std::pow(v - a_, 1.0 / kappa_);
    auto g = [&](double sigma) {
      const double d = std::pow(sigma, kappa_);
      return kappa_ * std::pow(sigma, kappa_ - 1.0) * integrand_step(d);
    };
    quad::Result r = quad::integrate(g, 0.0, smax, {1e-300, 1e-13, 2000});
    if (!r.finite)
      throw DivergentError("F(s) - F(a) vanishes just above a: the profile never leaves a");
    if (!r.converged) throw NumericalError("profile quadrature near the center did not converge");
    return r.value;
  }

  // int_v^inf
  double tail(double v) const {
    auto g = [&](double s) { return integrand_step(s - a_); };
    quad::TailResult t = quad::integrate_tail(g, v);
    if (!t.value)
      throw DivergentError("blow-up radius integral diverges (Keller-Osserman condition fails)");
    return *t.value;
  }

  double radius() const { return near(2.0 * a_) + tail(2.0 * a_); }

 private:
  const Nonlinearity& nl_;
  double a_, inv_p_, kappa_;
};

}  // namespace

double blowup_radius(const Nonlinearity& nl, double p, double a) {
  require_p(p);
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("blowup_radius needs a > 0");
  return TimeIntegrals(nl, p, a).radius();
}

LargeSolution1D::LargeSolution1D(Nonlinearity nl, double p, double r, double a,
                                 std::vector<ProfileSample> samples)
    : nl_(std::move(nl)), p_(p), r_(r), a_(a), samples_(std::move(samples)) {
  r_actual_ = blowup_radius(nl_, p_, a_);
}

double LargeSolution1D::residual_max() const {
  double m = 0.0;
  for (const auto& s : samples_)
    if (!(s.residual <= m)) m = s.residual;
  return m;
}

double LargeSolution1D::position_of(double v) const {
  if (v < a_) throw DomainError("profile value below the center value");
  TimeIntegrals ti(nl_, p_, a_);
  if (v <= 2.0 * a_) return ti.near(v);
  return r_actual_ - ti.tail(v);
}

double LargeSolution1D::gap_of(double v) const {
  if (v < a_) throw DomainError("profile value below the center value");
  TimeIntegrals ti(nl_, p_, a_);
  if (v <= 2.0 * a_) return r_actual_ - ti.near(v);
  return ti.tail(v);
}

double LargeSolution1D::value_at(double t) const {
  t = std::abs(t);
  if (!(t < r_actual_)) throw DomainError("profile evaluated outside (-r, r)");
  if (t == 0.0) return a_;
  // bisection on log(v - a); t(v) is increasing
  double lo = std::log(a_) - 60.0;
  double hi = std::log(a_);
  int guard = 0;
  while (position_of(a_ + std::exp(hi)) < t) {
    lo = hi;
    hi += 2.0;
    if (++guard > 400) throw NumericalError("profile inversion: no bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (position_of(a_ + std::exp(mid)) < t)
      lo = mid;
    else
      hi = mid;
  }
  return a_ + std::exp(0.5 * (lo + hi));
}

double LargeSolution1D::slope_at(double t) const {
  const double v = value_at(t);
  const double dF = eval_F_increment(nl_, a_, v);
  return std::pow(p_ / (p_ - 1.0) * dF, 1.0 / p_);
}

namespace {

LargeSolution1D tabulate(const Nonlinearity& nl, double p, double r_requested, double a) {
  TimeIntegrals ti(nl, p, a);
  const double r_actual = ti.radius();
  const double kappa = p / (p - 1.0);
  std::vector<ProfileSample> samples;
  samples.push_back({0.0, r_actual, a, 0.0, 0.0});
  // phi - a geometric from 1e-8 a to 1e8 a; in t this clusters toward r
  constexpr int kSamples = 321;
  for (int k = 0; k < kSamples; ++k) {
    const double d = a * std::pow(10.0, -8.0 + 16.0 * k / (kSamples - 1));
    const double v = a + d;
    const double dF = eval_F_step(nl, a, d);
    // fast-growing f: stop once F leaves the double range
    if (!std::isfinite(dF)) break;
    double t, gap;
    if (d <= a) {
      t = ti.near(v);
      gap = r_actual - t;
    } else {
      gap = ti.tail(v);
      t = r_actual - gap;
    }
    if (!(gap > 0.0)) break;
    const double dphi = std::pow(kappa * dF, 1.0 / p);
    const double lhs = (1.0 - 1.0 / p) * std::pow(dphi, p);
    const double residual = std::abs(lhs - dF) / std::max(1.0, dF);
    samples.push_back({t, gap, v, dphi, residual});
  }
  return LargeSolution1D(nl, p, r_requested, a, std::move(samples));
}

}  // namespace

LargeSolution1D large_1d_from_center(const Nonlinearity& nl, double p, double a) {
  require_p(p);
  if (!(a > 0.0)) throw DomainError("center value must be positive");
  const double r = blowup_radius(nl, p, a);
  return tabulate(nl, p, r, a);
}

LargeSolution1D solve_large_1d(const Nonlinearity& nl, double p, double r) {
  require_p(p);
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("solve_large_1d needs r > 0");
  if (!check_a1(nl, p)) throw PreconditionError("(A1) fails: no large solution exists");

  // r(a) is strictly decreasing; grow a bracket geometrically from a = 1
  double a_lo = 1.0, a_hi = 1.0;
  double r_lo = blowup_radius(nl, p, 1.0), r_hi = r_lo;
  int doublings = 0;
  if (r_lo > r) {
    while (r_hi > r) {
      if (++doublings > 60) throw NumericalError("infeasible radius: no bracket within 60 doublings");
      a_lo = a_hi;
      r_lo = r_hi;
      a_hi *= 2.0;
      r_hi = blowup_radius(nl, p, a_hi);
      if (!(r_hi < r_lo)) {
        std::ostringstream os;
        os << "a -> r(a) is not decreasing: r(" << a_lo << ") = " << r_lo << ", r(" << a_hi
           << ") = " << r_hi;
        throw NumericalError(os.str());
      }
    }
  } else {
    while (r_lo < r) {
      if (++doublings > 60) throw NumericalError("infeasible radius: no bracket within 60 doublings");
      a_hi = a_lo;
      r_hi = r_lo;
      a_lo *= 0.5;
      r_lo = blowup_radius(nl, p, a_lo);
      if (!(r_lo > r_hi)) {
        std::ostringstream os;
        os << "a -> r(a) is not decreasing: r(" << a_lo << ") = " << r_lo << ", r(" << a_hi
           << ") = " << r_hi;
        throw NumericalError(os.str());
      }
    }
  }
  double a = std::sqrt(a_lo * a_hi);
  for (int it = 0; it < 200; ++it) {
    a = std::sqrt(a_lo * a_hi);
    const double ra = blowup_radius(nl, p, a);
    if (std::abs(ra - r) <= 1e-13 * r || a_hi / a_lo - 1.0 < 1e-15) break;
    if (ra > r)
      a_lo = a;
    else
      a_hi = a;
  }
  if (!(std::abs(blowup_radius(nl, p, a) - r) <= 1e-10 * r))
    throw NumericalError("solve_large_1d: center value not resolved to 1e-10");
  return tabulate(nl, p, r, a);
}

// ---------------------------------------------------------------------------
// cross-sectional problem

double CrossProfile::value_at(double y) const {
  if (nodes.empty()) throw DomainError("empty cross profile");
  if (y <= nodes.front()) return values.front();
  if (y >= nodes.back()) return values.back();
  auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  const double w = (y - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

std::vector<double> uniform_nodes(Interval interval, int n_nodes) {
  if (n_nodes < 3) throw DomainError("cross grid needs at least 3 nodes");
  if (!(interval.hi > interval.lo)) throw DomainError("degenerate cross interval");
  std::vector<double> y(static_cast<std::size_t>(n_nodes));
  const double h = interval.width() / (n_nodes - 1);
  for (int j = 0; j < n_nodes; ++j) y[static_cast<std::size_t>(j)] = interval.lo + j * h;
  y.back() = interval.hi;
  return y;
}

std::vector<double> graded_nodes(Interval interval, double h_min, double growth, double h_max) {
  if (!(interval.hi > interval.lo)) throw DomainError("degenerate cross interval");
  if (!(h_min > 0.0 && growth > 0.0 && h_max >= h_min))
    throw DomainError("graded nodes need 0 < h_min <= h_max and growth > 0");
  const double half = 0.5 * interval.width();
  std::vector<double> dist{0.0};
  while (dist.back() < half) {
    const double d = dist.back();
    dist.push_back(d + std::clamp(growth * d, h_min, h_max));
  }
  // the halves meet at the midpoint; a sliver last cell is merged by
  // splitting the last two cells evenly
  dist.back() = half;
  const std::size_t n = dist.size();
  if (n >= 3 && half - dist[n - 2] < 0.5 * (dist[n - 2] - dist[n - 3]))
    dist[n - 2] = 0.5 * (dist[n - 3] + half);
  std::vector<double> y;
  for (double d : dist) y.push_back(interval.lo + d);
  for (auto it = dist.rbegin() + 1; it != dist.rend(); ++it) y.push_back(interval.hi - *it);
  y.front() = interval.lo;
  y.back() = interval.hi;
  return y;
}

SolverConfig default_cross_config(double p, const std::vector<double>& nodes) {
  SolverConfig cfg;
  cfg.p = p;
  const double h = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
  if (p != 2.0) cfg.eps_schedule = default_eps_schedule(h);
  return cfg;
}

namespace {

// Discrete 1D energy over the interior nodal values (boundary F terms omitted,
// they are constant):
//   sum_e h_e W((u_{i+1} - u_i) / h_e) + sum_{interior} w_i F(u_i)
class CrossEnergy final : public ConvexProblem {
 public:
  CrossEnergy(const Nonlinearity& nl, const std::vector<double>& nodes, double p, double g0,
              double g1)
      : nl_(nl), y_(nodes), p_(p), g0_(g0), g1_(g1) {
    const std::size_t n = y_.size();
    w_.assign(n, 0.0);
    for (std::size_t e = 0; e + 1 < n; ++e) {
      const double h = y_[e + 1] - y_[e];
      w_[e] += 0.5 * h;
      w_[e + 1] += 0.5 * h;
    }
    mean_h_ = (y_.back() - y_.front()) / static_cast<double>(n - 1);
  }

  Eigen::Index size() const override { return static_cast<Eigen::Index>(y_.size()) - 2; }
  double residual_weight() const override { return mean_h_; }

  double value(const Eigen::VectorXd& x, std::size_t i) const {
    if (i == 0) return g0_;
    if (i + 1 == y_.size()) return g1_;
    return x[static_cast<Eigen::Index>(i) - 1];
  }

  double energy(const Eigen::VectorXd& x, double eps) const override {
    double e_grad = 0.0, e_abs = 0.0;
    for (std::size_t e = 0; e + 1 < y_.size(); ++e) {
      const double h = y_[e + 1] - y_[e];
      const double g = (value(x, e + 1) - value(x, e)) / h;
      e_grad += h * density(g * g, p_, eps);
    }
    for (std::size_t i = 1; i + 1 < y_.size(); ++i)
      e_abs += w_[i] * detail::absorption_F(nl_, value(x, i));
    return e_grad + e_abs;
  }

  void assemble(const Eigen::VectorXd& x, double eps, Eigen::VectorXd& grad,
                std::vector<Eigen::Triplet<double>>& hess,
                Eigen::VectorXd& scale) const override {
    const Eigen::Index m = size();
    grad.setZero(m);
    scale.setZero(m);
    std::vector<double> diag(static_cast<std::size_t>(m), 0.0);
    std::vector<double> off(static_cast<std::size_t>(m), 0.0);  // (k, k+1)
    for (std::size_t e = 0; e + 1 < y_.size(); ++e) {
      const double h = y_[e + 1] - y_[e];
      const double g = (value(x, e + 1) - value(x, e)) / h;
      const double g2 = g * g;
      const double a = flux_coefficient(g2, p_, eps);
      const double flux = a * g;
      const double curv = (a + flux_coefficient_slope(g2, p_, eps) * g2) / h;
      const Eigen::Index kl = static_cast<Eigen::Index>(e) - 1;  // unknown of node e
      const Eigen::Index kr = static_cast<Eigen::Index>(e);      // unknown of node e+1
      const bool left_free = e >= 1;
      const bool right_free = e + 2 < y_.size();
      if (left_free) {
        grad[kl] -= flux;
        scale[kl] += std::abs(flux);
        diag[static_cast<std::size_t>(kl)] += curv;
      }
      if (right_free) {
        grad[kr] += flux;
        scale[kr] += std::abs(flux);
        diag[static_cast<std::size_t>(kr)] += curv;
      }
      if (left_free && right_free) off[static_cast<std::size_t>(kl)] -= curv;
    }
    for (std::size_t i = 1; i + 1 < y_.size(); ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(i) - 1;
      const double u = value(x, i);
      const double r = w_[i] * detail::absorption_f(nl_, u);
      grad[k] += r;
      scale[k] += std::abs(r);
      diag[static_cast<std::size_t>(k)] += w_[i] * detail::absorption_df(nl_, u);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      hess.emplace_back(k, k, diag[static_cast<std::size_t>(k)]);
      if (k + 1 < m) {
        hess.emplace_back(k, k + 1, off[static_cast<std::size_t>(k)]);
        hess.emplace_back(k + 1, k, off[static_cast<std::size_t>(k)]);
      }
    }
  }

 private:
  const Nonlinearity& nl_;
  const std::vector<double>& y_;
  double p_, g0_, g1_;
  std::vector<double> w_;
  double mean_h_;
};

void check_nodes(const std::vector<double>& nodes) {
  if (nodes.size() < 3) throw DomainError("cross grid needs at least 3 nodes");
  for (std::size_t j = 1; j < nodes.size(); ++j)
    if (!(nodes[j] > nodes[j - 1])) throw DomainError("cross nodes must be strictly increasing");
}

struct CrossSolve {
  std::vector<double> values;
  NewtonOutcome outcome;
};

CrossSolve run_cross(const Nonlinearity& nl, const std::vector<double>& nodes, double g0,
                     double g1, const SolverConfig& cfg, const std::vector<double>* warm) {
  CrossEnergy problem(nl, nodes, cfg.p, g0, g1);
  const Eigen::Index m = problem.size();
  Eigen::VectorXd x0(m);
  for (Eigen::Index k = 0; k < m; ++k)
    x0[k] = warm ? (*warm)[static_cast<std::size_t>(k) + 1] : 0.5 * (g0 + g1);
  const double mean_h = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
  NewtonOutcome out = minimize(problem, std::move(x0), resolved_eps_schedule(cfg, mean_h), cfg);
  CrossSolve res;
  res.values.resize(nodes.size());
  res.values.front() = g0;
  res.values.back() = g1;
  for (Eigen::Index k = 0; k < m; ++k) res.values[static_cast<std::size_t>(k) + 1] = out.x[k];
  res.outcome = std::move(out);
  return res;
}

}  // namespace

CrossProfile solve_cross_finite_on(const Nonlinearity& nl, std::vector<double> nodes, double g0,
                                   double g1, const SolverConfig& cfg) {
  check_nodes(nodes);
  validate(cfg);
  if (!std::isfinite(g0) || !std::isfinite(g1)) throw DomainError("boundary data must be finite");
  CrossSolve s = run_cross(nl, nodes, g0, g1, cfg, nullptr);
  CrossProfile prof;
  prof.interval = {nodes.front(), nodes.back()};
  prof.nodes = std::move(nodes);
  prof.values = std::move(s.values);
  prof.mode = FiniteData{g0, g1};
  prof.residual = s.outcome.residual;
  prof.energy = s.outcome.energy;
  prof.iterations = s.outcome.iterations_per_stage;
  return prof;
}

CrossProfile solve_cross_finite(const Nonlinearity& nl, double p, Interval interval, double g0,
                                double g1, int n_nodes, const std::optional<SolverConfig>& cfg) {
  std::vector<double> nodes = uniform_nodes(interval, n_nodes);
  SolverConfig c = cfg ? *cfg : default_cross_config(p, nodes);
  c.p = p;
  return solve_cross_finite_on(nl, std::move(nodes), g0, g1, c);
}

CrossProfile solve_cross_large_on(const Nonlinearity& nl, std::vector<double> nodes,
                                  const std::vector<double>& M_list, const SolverConfig& cfg) {
  check_nodes(nodes);
  validate(cfg);
  if (M_list.empty()) throw DomainError("M_list must not be empty");
  for (std::size_t k = 0; k < M_list.size(); ++k) {
    if (!(M_list[k] > 0.0) || !std::isfinite(M_list[k]))
      throw DomainError("M_list entries must be positive and finite");
    if (k > 0 && !(M_list[k] > M_list[k - 1]))
      throw DomainError("M_list must be strictly increasing");
  }
  if (!check_a1(nl, cfg.p)) throw PreconditionError("no large solution exists: (A1) fails");

  BlowupData data;
  data.M_list = M_list;
  CrossSolve last;
  const std::vector<double>* warm = nullptr;
  std::vector<int> iterations;
  for (double M : M_list) {
    CrossSolve s = run_cross(nl, nodes, M, M, cfg, warm);
    if (!data.stages.empty()) {
      const auto& prev = data.stages.back();
      double change = 0.0, violation = 0.0;
      for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        change = std::max(change, std::abs(s.values[i] - prev[i]));
        violation = std::max(violation, prev[i] - s.values[i]);
      }
      data.stabilization_residual = change;
      data.monotonicity_violation = std::max(data.monotonicity_violation, violation);
    }
    for (int it : s.outcome.iterations_per_stage) iterations.push_back(it);
    data.stages.push_back(s.values);
    last = std::move(s);
    warm = &data.stages.back();
  }
  CrossProfile prof;
  prof.interval = {nodes.front(), nodes.back()};
  prof.nodes = std::move(nodes);
  prof.values = last.values;
  prof.residual = last.outcome.residual;
  prof.energy = last.outcome.energy;
  prof.iterations = std::move(iterations);
  prof.mode = std::move(data);
  return prof;
}

CrossProfile solve_cross_large(const Nonlinearity& nl, double p, Interval interval,
                               const std::vector<double>& M_list, int n_nodes,
                               const std::optional<SolverConfig>& cfg) {
  std::vector<double> nodes = uniform_nodes(interval, n_nodes);
  SolverConfig c = cfg ? *cfg : default_cross_config(p, nodes);
  c.p = p;
  return solve_cross_large_on(nl, std::move(nodes), M_list, c);
}

}  // namespace cylasym
