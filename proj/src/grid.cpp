#include "anisofrac/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "anisofrac/parallel.hpp"

namespace anisofrac {

FractionalParams::FractionalParams(double s_, double p_) : s(s_), p(p_) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be >= 1");
}

Grid::Grid(int dimension, std::vector<double> box, int nodes_per_axis) : n_(dimension), N_(nodes_per_axis) {
  if (n_ != 1 && n_ != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (box.size() != static_cast<std::size_t>(2 * n_)) throw std::invalid_argument("box needs 2n coordinates");
  if (N_ < 3) throw std::invalid_argument("grid needs N >= 3");
  for (int k = 0; k < n_; ++k) {
    const auto a = box[static_cast<std::size_t>(2 * k)], b = box[static_cast<std::size_t>(2 * k + 1)];
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("grid box is degenerate");
    lo_[static_cast<std::size_t>(k)] = a;
    hi_[static_cast<std::size_t>(k)] = b;
    h_[static_cast<std::size_t>(k)] = (b - a) / (N_ - 1);
  }
  size_ = n_ == 1 ? static_cast<std::size_t>(N_) : static_cast<std::size_t>(N_) * static_cast<std::size_t>(N_);
}

double Grid::min_spacing() const { return n_ == 1 ? h_[0] : std::min(h_[0], h_[1]); }

double Grid::diameter() const {
  double s = 0.0;
  for (int k = 0; k < n_; ++k) s += std::pow(hi_[static_cast<std::size_t>(k)] - lo_[static_cast<std::size_t>(k)], 2);
  return std::sqrt(s);
}

std::vector<double> Grid::box() const {
  std::vector<double> b;
  for (int k = 0; k < n_; ++k) {
    b.push_back(lo_[static_cast<std::size_t>(k)]);
    b.push_back(hi_[static_cast<std::size_t>(k)]);
  }
  return b;
}

std::array<int, 2> Grid::multi_index(std::size_t index) const {
  const auto N = static_cast<std::size_t>(N_);
  return {static_cast<int>(index % N), static_cast<int>(index / N)};
}

std::size_t Grid::index(int i0, int i1) const {
  return static_cast<std::size_t>(i0) + static_cast<std::size_t>(N_) * static_cast<std::size_t>(i1);
}

Point Grid::node(std::size_t index) const {
  const auto [i0, i1] = multi_index(index);
  Point x;
  // endpoints exact so that boundary exit distances are exactly zero
  auto coord = [&](int k, int i) { return i == N_ - 1 ? hi_[static_cast<std::size_t>(k)] : lo_[static_cast<std::size_t>(k)] + i * h_[static_cast<std::size_t>(k)]; };
  x[0] = coord(0, i0);
  if (n_ == 2) x[1] = coord(1, i1);
  return x;
}

bool Grid::on_boundary(std::size_t index) const {
  const auto [i0, i1] = multi_index(index);
  if (i0 == 0 || i0 == N_ - 1) return true;
  return n_ == 2 && (i1 == 0 || i1 == N_ - 1);
}

bool Grid::contains(const Point& x) const {
  for (int k = 0; k < n_; ++k)
    if (x[static_cast<std::size_t>(k)] < lo_[static_cast<std::size_t>(k)] || x[static_cast<std::size_t>(k)] > hi_[static_cast<std::size_t>(k)]) return false;
  return true;
}

std::vector<double> Grid::trapezoid_weights() const {
  std::vector<double> w(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto mi = multi_index(i);
    double v = 1.0;
    for (int k = 0; k < n_; ++k) {
      const int j = mi[static_cast<std::size_t>(k)];
      v *= h_[static_cast<std::size_t>(k)] * ((j == 0 || j == N_ - 1) ? 0.5 : 1.0);
    }
    w[i] = v;
  }
  return w;
}

GridFunction::GridFunction(Grid grid, std::vector<double> values, bool pinned)
    : grid_(std::move(grid)), values_(std::move(values)), pinned_(pinned) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("grid function has the wrong number of values");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
  if (pinned_)
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (grid_.on_boundary(i)) values_[i] = 0.0;
}

GridFunction GridFunction::zero(const Grid& grid, bool pinned) {
  return GridFunction(grid, std::vector<double>(grid.size(), 0.0), pinned);
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Point&)>& f, bool pinned) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
  return GridFunction(grid, std::move(v), pinned);
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {
void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("grid functions live on different grids");
}
}  // namespace

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b[i];
  return GridFunction(a.grid(), std::move(v), a.pinned() && b.pinned());
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) { return a + (-1.0) * b; }

GridFunction operator*(double c, const GridFunction& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= c;
  return GridFunction(a.grid(), std::move(v), a.pinned());
}

GridFunction refine(const GridFunction& u) {
  const Grid& g = u.grid();
  const Grid fine(g.dimension(), g.box(), 2 * g.nodes_per_axis() - 1);
  std::vector<double> v(fine.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto mi = fine.multi_index(i);
    const int a = mi[0] / 2, b = mi[1] / 2, da = mi[0] % 2, db = mi[1] % 2;
    double sum = 0.0;
    for (int j = 0; j <= db; ++j)
      for (int k = 0; k <= da; ++k) sum += u[g.index(a + k, b + j)];
    v[i] = sum / ((1 + da) * (1 + db));
  }
  return GridFunction(fine, std::move(v), u.pinned());
}

double eval(const GridFunction& u, const Point& x) {
  const Grid& g = u.grid();
  if (!g.contains(x)) return 0.0;
  const int N = g.nodes_per_axis();
  std::array<int, 2> cell{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int k = 0; k < g.dimension(); ++k) {
    const double r = (x[static_cast<std::size_t>(k)] - g.lower(k)) / g.spacing(k);
    int c = std::clamp(static_cast<int>(std::floor(r)), 0, N - 2);
    cell[static_cast<std::size_t>(k)] = c;
    t[static_cast<std::size_t>(k)] = std::clamp(r - c, 0.0, 1.0);
  }
  if (g.dimension() == 1) return (1 - t[0]) * u[g.index(cell[0])] + t[0] * u[g.index(cell[0] + 1)];
  const int a = cell[0], b = cell[1];
  return (1 - t[0]) * (1 - t[1]) * u[g.index(a, b)] + t[0] * (1 - t[1]) * u[g.index(a + 1, b)] +
         (1 - t[0]) * t[1] * u[g.index(a, b + 1)] + t[0] * t[1] * u[g.index(a + 1, b + 1)];
}

double lp_norm(const GridFunction& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const auto w = u.grid().trapezoid_weights();
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = w[i] * std::pow(std::abs(u[i]), p);
  return std::pow(pairwise_sum(terms), 1.0 / p);
}

std::vector<CellGradient> cell_gradients(const GridFunction& u) {
  const Grid& g = u.grid();
  const int N = g.nodes_per_axis();
  std::vector<CellGradient> out;
  if (g.dimension() == 1) {
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < N; ++c)
      out.push_back({Point(g.lower(0) + (c + 0.5) * h), Point((u[g.index(c + 1)] - u[g.index(c)]) / h), h});
    return out;
  }
  const double hx = g.spacing(0), hy = g.spacing(1);
  for (int b = 0; b + 1 < N; ++b)
    for (int a = 0; a + 1 < N; ++a) {
      const double u00 = u[g.index(a, b)], u10 = u[g.index(a + 1, b)], u01 = u[g.index(a, b + 1)], u11 = u[g.index(a + 1, b + 1)];
      out.push_back({Point(g.lower(0) + (a + 0.5) * hx, g.lower(1) + (b + 0.5) * hy),
                     Point(0.5 * ((u10 - u00) + (u11 - u01)) / hx, 0.5 * ((u01 - u00) + (u11 - u10)) / hy), hx * hy});
    }
  return out;
}

double gradient_lp(const GridFunction& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const auto cells = cell_gradients(u);
  std::vector<double> terms(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = cells[i].measure * std::pow(norm(cells[i].gradient), p);
  return std::pow(pairwise_sum(terms), 1.0 / p);
}

double gradient_lp_upper(const GridFunction& u, double p) {
  const Grid& g = u.grid();
  if (g.dimension() == 1) return gradient_lp(u, p);
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const int N = g.nodes_per_axis();
  const double hx = g.spacing(0), hy = g.spacing(1);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(N - 1) * (N - 1));
  for (int b = 0; b + 1 < N; ++b)
    for (int a = 0; a + 1 < N; ++a) {
      const double u00 = u[g.index(a, b)], u10 = u[g.index(a + 1, b)], u01 = u[g.index(a, b + 1)], u11 = u[g.index(a + 1, b + 1)];
      const double gx[2] = {(u10 - u00) / hx, (u11 - u01) / hx}, gy[2] = {(u01 - u00) / hy, (u11 - u10) / hy};
      double corners = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) corners += std::pow(std::hypot(gx[j], gy[i]), p);
      terms.push_back(0.25 * hx * hy * corners);
    }
  return std::pow(pairwise_sum(terms), 1.0 / p);
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

void write_csv(const GridFunction& u, std::ostream& out) {
  const Grid& g = u.grid();
  std::string box;
  for (double b : g.box()) box += (box.empty() ? "" : ",") + format_number(b);
  out << "# grid n=" << g.dimension() << " box=" << box << " N=" << g.nodes_per_axis() << '\n';
  for (double v : u.values()) out << format_number(v) << '\n';
}

GridFunction read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("empty grid function file");
  int n = 0, N = 0;
  std::vector<double> box;
  std::istringstream hs(header);
  std::string tok;
  hs >> tok >> tok;
  if (tok != "grid") throw std::invalid_argument("grid function header must start with '# grid'");
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed grid header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "n") {
      n = std::stoi(value);
    } else if (key == "N") {
      N = std::stoi(value);
    } else if (key == "box") {
      std::istringstream bs(value);
      std::string part;
      while (std::getline(bs, part, ',')) box.push_back(std::stod(part));
    } else {
      throw std::invalid_argument("unknown grid header key '" + key + "'");
    }
  }
  Grid grid(n, box, N);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) values.push_back(std::stod(line));
  bool zero_boundary = true;
  for (std::size_t i = 0; i < values.size() && i < grid.size(); ++i)
    zero_boundary = zero_boundary && (!grid.on_boundary(i) || values[i] == 0.0);
  return GridFunction(grid, std::move(values), zero_boundary);
}

}  // namespace anisofrac
