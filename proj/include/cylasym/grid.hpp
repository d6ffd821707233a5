#pragma once

#include <Eigen/Core>
#include <array>
#include <iosfwd>
#include <string>

#include "cylasym/ode1d.hpp"

namespace cylasym {

/// Structured triangulation of the rectangle (-ell, ell) x (cross.lo, cross.hi).
/// Node (i, j) sits at (-ell + i hx, cross.lo + j hy) and has index j nx + i
/// (row-major, x fastest). Each cell is split along its SW-NE diagonal.
class RectGrid {
 public:
  RectGrid(double ell, Interval cross, int nx, int ny);

  double ell() const noexcept { return ell_; }
  const Interval& cross() const noexcept { return cross_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  Eigen::Index node_count() const noexcept { return Eigen::Index(nx_) * ny_; }
  Eigen::Index triangle_count() const noexcept { return 2 * Eigen::Index(nx_ - 1) * (ny_ - 1); }

  double x(int i) const noexcept { return i == nx_ - 1 ? ell_ : -ell_ + i * hx_; }
  double y(int j) const noexcept { return j == ny_ - 1 ? cross_.hi : cross_.lo + j * hy_; }
  Eigen::Index index(int i, int j) const noexcept { return Eigen::Index(j) * nx_ + i; }
  bool on_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }

  /// Node indices of triangle t, counter-clockwise. Even t: (i,j), (i+1,j),
  /// (i+1,j+1); odd t: (i,j), (i+1,j+1), (i,j+1), for cell (i, j) = t / 2.
  std::array<Eigen::Index, 3> triangle(Eigen::Index t) const noexcept;
  double triangle_area() const noexcept { return 0.5 * hx_ * hy_; }

  /// Lumped (barycentric) mass per node: one third of the adjacent triangle area.
  Eigen::VectorXd lumped_mass() const;

  bool operator==(const RectGrid& o) const noexcept {
    return ell_ == o.ell_ && cross_.lo == o.cross_.lo && cross_.hi == o.cross_.hi &&
           nx_ == o.nx_ && ny_ == o.ny_;
  }

 private:
  double ell_;
  Interval cross_;
  int nx_, ny_;
  double hx_, hy_;
};

RectGrid build_grid(double ell, Interval cross, int nx, int ny);

/// Piecewise-linear nodal field on a RectGrid.
struct GridFunction {
  RectGrid grid;
  Eigen::VectorXd values;

  GridFunction(RectGrid g, Eigen::VectorXd v);
  static GridFunction constant(const RectGrid& g, double c);

  double at(int i, int j) const { return values[grid.index(i, j)]; }
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);

/// Value of the piecewise-linear interpolant at (x, y); points outside the
/// rectangle throw DomainError.
double interpolate(const GridFunction& u, double x, double y);

/// Axis-aligned rectangle (x_lo, x_hi) x (y_lo, y_hi).
struct Window {
  double x_lo, x_hi, y_lo, y_hi;
  double area() const noexcept { return (x_hi - x_lo) * (y_hi - y_lo); }
  bool contains(double x, double y) const noexcept {
    return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
  }
};

/// Throws DomainError unless w stays at least one cell away from the grid boundary.
void require_inside(const Window& w, const RectGrid& g);

/// Constant gradient of the affine interpolant on each triangle (rows = triangles).
Eigen::Matrix<double, Eigen::Dynamic, 2> gradient_per_cell(const GridFunction& u);

/// Area of the intersection of triangle t with w.
double overlap_area(const RectGrid& g, Eigen::Index t, const Window& w);

/// ( sum_T |T cap w| |grad u_T|^p )^(1/p)
double lp_norm_gradient(const GridFunction& u, double p, const Window& w);

/// u(x, y) = prof(y), linearly interpolating prof between its nodes.
GridFunction embed_cross_section(const CrossProfile& prof, const RectGrid& g);

/// Piecewise-linear cutoff: 1 on inner, 1 - d/gap at Chebyshev distance d
/// from inner, 0 beyond gap = smallest margin between inner and outer.
GridFunction cutoff_function(const Window& inner, const Window& outer, const RectGrid& g);

// CSV (x,y,value) in row-major node order, and a JSON sidecar {ell, cross, nx, ny}.
void write_csv(const GridFunction& u, std::ostream& os);
std::string sidecar_json(const RectGrid& g);
GridFunction read_grid_function(std::istream& csv, const std::string& sidecar);

}  // namespace cylasym
