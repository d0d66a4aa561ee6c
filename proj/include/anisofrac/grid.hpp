#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "anisofrac/point.hpp"

namespace anisofrac {

struct FractionalParams {
  double s;
  double p;
  FractionalParams(double s_, double p_);  // s in (0,1), p >= 1
};

// Uniform tensor grid on a box in R^n, n in {1,2}. Node index i0 + N*i1.
class Grid {
 public:
  Grid(int dimension, std::vector<double> box, int nodes_per_axis);  // box = {a1,b1[,a2,b2]}

  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] int nodes_per_axis() const { return N_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] double lower(int axis) const { return lo_[static_cast<std::size_t>(axis)]; }
  [[nodiscard]] double upper(int axis) const { return hi_[static_cast<std::size_t>(axis)]; }
  [[nodiscard]] double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  [[nodiscard]] double min_spacing() const;
  [[nodiscard]] double diameter() const;
  [[nodiscard]] std::vector<double> box() const;

  [[nodiscard]] std::array<int, 2> multi_index(std::size_t index) const;
  [[nodiscard]] std::size_t index(int i0, int i1 = 0) const;
  [[nodiscard]] Point node(std::size_t index) const;
  [[nodiscard]] bool on_boundary(std::size_t index) const;
  [[nodiscard]] bool contains(const Point& x) const;

  // Composite trapezoid weights (tensor product in 2D).
  [[nodiscard]] std::vector<double> trapezoid_weights() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
  int N_;
  std::size_t size_;
  std::array<double, 2> lo_{}, hi_{}, h_{};
};

// Piecewise-multilinear function on a grid, extended by zero outside the box.
class GridFunction {
 public:
  // When pinned, boundary-node values are set to exactly 0.
  GridFunction(Grid grid, std::vector<double> values, bool pinned = true);

  static GridFunction zero(const Grid& grid, bool pinned = true);
  static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& f, bool pinned = true);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] bool pinned() const { return pinned_; }
  [[nodiscard]] double max_abs() const;

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator*(double c, const GridFunction& a);

 private:
  Grid grid_;
  std::vector<double> values_;
  bool pinned_;
};

[[nodiscard]] double eval(const GridFunction& u, const Point& x);
// The same multilinear interpolant on the grid with half the spacing.
[[nodiscard]] GridFunction refine(const GridFunction& u);
[[nodiscard]] double lp_norm(const GridFunction& u, double p);
// ||grad u||_p from cell-centred differences.
[[nodiscard]] double gradient_lp(const GridFunction& u, double p);
// Same norm with |grad u|^p averaged over cell corners. For the multilinear interpolant this never
// falls below the exact value (the integrand is convex on each cell); equal to gradient_lp in 1D.
[[nodiscard]] double gradient_lp_upper(const GridFunction& u, double p);
// Cell-centred gradient of cell c (index of its lower-left node) and the cell centre.
struct CellGradient {
  Point centre;
  Point gradient;
  double measure;
};
[[nodiscard]] std::vector<CellGradient> cell_gradients(const GridFunction& u);

void write_csv(const GridFunction& u, std::ostream& out);
[[nodiscard]] GridFunction read_csv(std::istream& in);
// Shortest round-trip decimal form, used for all CSV numbers.
[[nodiscard]] std::string format_number(double v);

}  // namespace anisofrac
