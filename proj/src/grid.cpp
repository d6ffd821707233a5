#include "cylasym/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cylasym/errors.hpp"

namespace cylasym {

RectGrid::RectGrid(double ell, Interval cross, int nx, int ny)
    : ell_(ell), cross_(cross), nx_(nx), ny_(ny) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw DomainError("grid: ell must be positive");
  if (!(cross.hi > cross.lo)) throw DomainError("grid: cross-section must satisfy y0 < y1");
  if (nx < 3 || ny < 3) throw DomainError("grid: nx and ny must be at least 3");
  hx_ = 2.0 * ell / (nx - 1);
  hy_ = cross.width() / (ny - 1);
}

RectGrid build_grid(double ell, Interval cross, int nx, int ny) {
  return RectGrid(ell, cross, nx, ny);
}

std::array<Eigen::Index, 3> RectGrid::triangle(Eigen::Index t) const noexcept {
  const Eigen::Index cell = t / 2;
  const int i = static_cast<int>(cell % (nx_ - 1));
  const int j = static_cast<int>(cell / (nx_ - 1));
  if (t % 2 == 0) return {index(i, j), index(i + 1, j), index(i + 1, j + 1)};
  return {index(i, j), index(i + 1, j + 1), index(i, j + 1)};
}

Eigen::VectorXd RectGrid::lumped_mass() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(node_count());
  const double share = triangle_area() / 3.0;
  for (Eigen::Index t = 0; t < triangle_count(); ++t)
    for (Eigen::Index k : triangle(t)) m[k] += share;
  return m;
}

GridFunction::GridFunction(RectGrid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count())
    throw DomainError("grid function: value count must equal nx * ny");
  if (!values.allFinite()) throw DomainError("grid function: values must be finite");
}

GridFunction GridFunction::constant(const RectGrid& g, double c) {
  return GridFunction(g, Eigen::VectorXd::Constant(g.node_count(), c));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw DomainError("grid functions live on different grids");
  return GridFunction(a.grid, a.values - b.values);
}

GridFunction operator*(double s, const GridFunction& a) { return GridFunction(a.grid, s * a.values); }

double interpolate(const GridFunction& u, double x, double y) {
  const RectGrid& g = u.grid;
  const double slack = 1e-12 * std::max(g.ell(), g.cross().width());
  if (!(x >= -g.ell() - slack && x <= g.ell() + slack && y >= g.cross().lo - slack &&
        y <= g.cross().hi + slack))
    throw DomainError("interpolate: point outside the grid");
  const int i = std::clamp(static_cast<int>(std::floor((x + g.ell()) / g.hx())), 0, g.nx() - 2);
  const int j = std::clamp(static_cast<int>(std::floor((y - g.cross().lo) / g.hy())), 0, g.ny() - 2);
  const double s = std::clamp((x - g.x(i)) / g.hx(), 0.0, 1.0);
  const double t = std::clamp((y - g.y(j)) / g.hy(), 0.0, 1.0);
  const double u00 = u.at(i, j), u10 = u.at(i + 1, j), u11 = u.at(i + 1, j + 1), u01 = u.at(i, j + 1);
  if (t <= s) return u00 + s * (u10 - u00) + t * (u11 - u10);
  return u00 + t * (u01 - u00) + s * (u11 - u01);
}

void require_inside(const Window& w, const RectGrid& g) {
  const double tx = g.hx() * (1.0 - 1e-9);
  const double ty = g.hy() * (1.0 - 1e-9);
  if (!(w.x_lo < w.x_hi && w.y_lo < w.y_hi)) throw DomainError("window: empty rectangle");
  if (!(w.x_lo >= -g.ell() + tx && w.x_hi <= g.ell() - tx && w.y_lo >= g.cross().lo + ty &&
        w.y_hi <= g.cross().hi - ty))
    throw DomainError("window must stay at least one cell inside the grid");
}

Eigen::Matrix<double, Eigen::Dynamic, 2> gradient_per_cell(const GridFunction& u) {
  const RectGrid& g = u.grid;
  Eigen::Matrix<double, Eigen::Dynamic, 2> grad(g.triangle_count(), 2);
  for (Eigen::Index t = 0; t < g.triangle_count(); ++t) {
    const auto v = g.triangle(t);
    if (t % 2 == 0) {
      // (i,j), (i+1,j), (i+1,j+1)
      grad(t, 0) = (u.values[v[1]] - u.values[v[0]]) / g.hx();
      grad(t, 1) = (u.values[v[2]] - u.values[v[1]]) / g.hy();
    } else {
      // (i,j), (i+1,j+1), (i,j+1)
      grad(t, 0) = (u.values[v[1]] - u.values[v[2]]) / g.hx();
      grad(t, 1) = (u.values[v[2]] - u.values[v[0]]) / g.hy();
    }
  }
  return grad;
}

namespace {

struct Pt {
  double x, y;
};

std::array<Pt, 3> corners(const RectGrid& g, Eigen::Index t) {
  const Eigen::Index cell = t / 2;
  const int i = static_cast<int>(cell % (g.nx() - 1));
  const int j = static_cast<int>(cell / (g.nx() - 1));
  const Pt sw{g.x(i), g.y(j)}, se{g.x(i + 1), g.y(j)}, ne{g.x(i + 1), g.y(j + 1)},
      nw{g.x(i), g.y(j + 1)};
  if (t % 2 == 0) return {sw, se, ne};
  return {sw, ne, nw};
}

// Sutherland-Hodgman against one axis-aligned half-plane
template <class Inside, class Cross>
std::vector<Pt> clip(const std::vector<Pt>& poly, Inside inside, Cross cross) {
  std::vector<Pt> out;
  if (poly.empty()) return out;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Pt& cur = poly[k];
    const Pt& prev = poly[(k + poly.size() - 1) % poly.size()];
    const bool ci = inside(cur), pi = inside(prev);
    if (ci) {
      if (!pi) out.push_back(cross(prev, cur));
      out.push_back(cur);
    } else if (pi) {
      out.push_back(cross(prev, cur));
    }
  }
  return out;
}

double polygon_area(const std::vector<Pt>& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Pt& p = poly[k];
    const Pt& q = poly[(k + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(a);
}

}  // namespace

double overlap_area(const RectGrid& g, Eigen::Index t, const Window& w) {
  const auto c = corners(g, t);
  const double xmin = std::min({c[0].x, c[1].x, c[2].x}), xmax = std::max({c[0].x, c[1].x, c[2].x});
  const double ymin = std::min({c[0].y, c[1].y, c[2].y}), ymax = std::max({c[0].y, c[1].y, c[2].y});
  if (xmax <= w.x_lo || xmin >= w.x_hi || ymax <= w.y_lo || ymin >= w.y_hi) return 0.0;
  if (xmin >= w.x_lo && xmax <= w.x_hi && ymin >= w.y_lo && ymax <= w.y_hi)
    return g.triangle_area();
  std::vector<Pt> poly(c.begin(), c.end());
  auto at_x = [](double x0) {
    return [x0](const Pt& a, const Pt& b) {
      const double s = (x0 - a.x) / (b.x - a.x);
      return Pt{x0, a.y + s * (b.y - a.y)};
    };
  };
  auto at_y = [](double y0) {
    return [y0](const Pt& a, const Pt& b) {
      const double s = (y0 - a.y) / (b.y - a.y);
      return Pt{a.x + s * (b.x - a.x), y0};
    };
  };
  poly = clip(poly, [&](const Pt& p) { return p.x >= w.x_lo; }, at_x(w.x_lo));
  poly = clip(poly, [&](const Pt& p) { return p.x <= w.x_hi; }, at_x(w.x_hi));
  poly = clip(poly, [&](const Pt& p) { return p.y >= w.y_lo; }, at_y(w.y_lo));
  poly = clip(poly, [&](const Pt& p) { return p.y <= w.y_hi; }, at_y(w.y_hi));
  return polygon_area(poly);
}

double lp_norm_gradient(const GridFunction& u, double p, const Window& w) {
  if (!(p >= 1.0)) throw DomainError("lp_norm_gradient: p must be at least 1");
  const auto grad = gradient_per_cell(u);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < grad.rows(); ++t) {
    const double area = overlap_area(u.grid, t, w);
    if (area == 0.0) continue;
    const double mag = grad.row(t).norm();
    if (mag == 0.0) continue;
    sum += area * std::pow(mag, p);
  }
  return std::pow(sum, 1.0 / p);
}

GridFunction embed_cross_section(const CrossProfile& prof, const RectGrid& g) {
  const double tol = 1e-12 * g.cross().width();
  if (std::abs(prof.interval.lo - g.cross().lo) > tol || std::abs(prof.interval.hi - g.cross().hi) > tol)
    throw DomainError("embed_cross_section: profile interval differs from the grid cross-section");
  Eigen::VectorXd v(g.node_count());
  for (int j = 0; j < g.ny(); ++j) {
    // exact nodal value where the profile has a node at this ordinate
    double val;
    if (j == 0)
      val = prof.values.front();
    else if (j == g.ny() - 1)
      val = prof.values.back();
    else
      val = prof.value_at(g.y(j));
    for (int i = 0; i < g.nx(); ++i) v[g.index(i, j)] = val;
  }
  return GridFunction(g, std::move(v));
}

GridFunction cutoff_function(const Window& inner, const Window& outer, const RectGrid& g) {
  require_inside(outer, g);
  if (!(inner.x_lo > outer.x_lo && inner.x_hi < outer.x_hi && inner.y_lo > outer.y_lo &&
        inner.y_hi < outer.y_hi && inner.x_lo < inner.x_hi && inner.y_lo < inner.y_hi))
    throw DomainError("cutoff_function: inner window must lie strictly inside outer");
  const double gap = std::min({inner.x_lo - outer.x_lo, outer.x_hi - inner.x_hi,
                               inner.y_lo - outer.y_lo, outer.y_hi - inner.y_hi});
  Eigen::VectorXd v(g.node_count());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x(i), y = g.y(j);
      const double dx = std::max({inner.x_lo - x, 0.0, x - inner.x_hi});
      const double dy = std::max({inner.y_lo - y, 0.0, y - inner.y_hi});
      v[g.index(i, j)] = std::max(0.0, 1.0 - std::max(dx, dy) / gap);
    }
  }
  return GridFunction(g, std::move(v));
}

void write_csv(const GridFunction& u, std::ostream& os) {
  const RectGrid& g = u.grid;
  os << "x,y,value\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      line.str("");
      line << g.x(i) << ',' << g.y(j) << ',' << u.at(i, j) << '\n';
      os << line.str();
    }
  }
}

std::string sidecar_json(const RectGrid& g) {
  nlohmann::ordered_json j;
  j["ell"] = g.ell();
  j["cross"] = {g.cross().lo, g.cross().hi};
  j["nx"] = g.nx();
  j["ny"] = g.ny();
  return j.dump(2);
}

GridFunction read_grid_function(std::istream& csv, const std::string& sidecar) {
  nlohmann::json j = nlohmann::json::parse(sidecar);
  RectGrid g(j.at("ell").get<double>(), {j.at("cross").at(0).get<double>(), j.at("cross").at(1).get<double>()},
             j.at("nx").get<int>(), j.at("ny").get<int>());
  std::string line;
  if (!std::getline(csv, line) || line != "x,y,value")
    throw DomainError("grid function CSV: missing header x,y,value");
  Eigen::VectorXd v(g.node_count());
  Eigen::Index k = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (k >= v.size()) throw DomainError("grid function CSV: too many rows");
    const auto last = line.rfind(',');
    if (last == std::string::npos) throw DomainError("grid function CSV: malformed row");
    v[k++] = std::stod(line.substr(last + 1));
  }
  if (k != v.size()) throw DomainError("grid function CSV: row count differs from nx * ny");
  return GridFunction(g, std::move(v));
}

}  // namespace cylasym
