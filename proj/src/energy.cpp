#include "anisofrac/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "anisofrac/parallel.hpp"
#include "anisofrac/quadrature.hpp"

namespace anisofrac {

namespace {

enum Part { kNear = 0, kBulk = 1, kTail = 2 };

struct Exterior {
  double bulk = 0.0;
  double tail = 0.0;
  double uncertainty = 0.0;
};

inline double abs_pow(double t, double p) {
  const double a = std::abs(t);
  return p == 2.0 ? a * a : std::pow(a, p);
}

// Polar quadrature of the inner h-integral around one grid node. Emitted weights
// exclude the outer trapezoid weight of the node.
class Scheme {
 public:
  Scheme(const Kernel& k, const Grid& g, FractionalParams fp, const QuadratureSettings& q)
      : k_(k), g_(g), q_(q), s_(fp.s), p_(fp.p), sp_(fp.s * fp.p), expo_(fp.p * (1.0 - fp.s)),
        T_(std::pow(q.h_max, -fp.s * fp.p)), traits_(k.traits()), bounds_(k.bounds()) {
    const SphereRule rule = sphere_rule(g.dimension(), g.dimension() == 2 ? q.angles : 0);
    for (std::size_t j = 0; j < rule.directions.size(); ++j) {
      Point w = rule.directions[j];
      for (auto& c : w.c)
        if (std::abs(c) < 1e-15) c = 0.0;
      dirs_.push_back(w);
      lambda_.push_back(rule.weights[j]);
    }
  }

  template <class Emit>
  void visit(std::size_t i, Emit&& emit) const {
    const Point x = g_.node(i);
    const bool free = !g_.on_boundary(i);
    double ext_bulk = 0.0, ext_tail = 0.0, ext_unc = 0.0;
    for (std::size_t q = 0; q < dirs_.size(); ++q) {
      const Point& w = dirs_[q];
      const double lam = lambda_[q];
      const double d = exit_distance(x, w);
      if (d > 0.0) {
        const double r0 = std::min(q_.h_min, d);
        const double a = k_.radial_limit(x, w);
        const double grade = std::pow(r0, expo_);
        const double model = std::abs(k_(x, r0 * w) - a) * grade / (expo_ + 1.0);
        emit(kNear, lam * a * grade / expo_, lam * model, near_form(i, w));
        if (d > r0) {
          const double m_const = traits_.radially_constant ? k_(x, w) : 0.0;
          for (const auto& node : geometric_ladder(r0, d, q_.ratio, q_.points)) {
            const double m = traits_.radially_constant ? m_const : k_(x, node.r * w);
            emit(kBulk, lam * m * node.weight * std::pow(node.r, -1.0 - sp_), 0.0, difference_form(i, x - node.r * w));
          }
        }
      }
      if (free) {
        const Exterior in = fixed_x(x, w, d);
        const Point back = -w;
        const double dplus = exit_distance(x, back);
        const Exterior out = traits_.symmetric ? fixed_x(x, back, dplus) : moving_x(x, w, dplus);
        ext_bulk += lam * (in.bulk + out.bulk);
        ext_tail += lam * (in.tail + out.tail);
        ext_unc += lam * (in.uncertainty + out.uncertainty);
      }
    }
    if (free) {
      SparseForm e;
      e.add(static_cast<std::uint32_t>(i), 1.0);
      emit(kBulk, ext_bulk, 0.0, e);
      emit(kTail, ext_tail, ext_unc, e);
    }
  }

 private:
  // Largest r with x - r w still in the box.
  double exit_distance(const Point& x, const Point& w) const {
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < g_.dimension(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (w[kk] > 0.0) d = std::min(d, (x[kk] - g_.lower(k)) / w[kk]);
      if (w[kk] < 0.0) d = std::min(d, (g_.upper(k) - x[kk]) / -w[kk]);
    }
    return std::max(d, 0.0);
  }

  // Directional slope of u at node i towards -w, from the cell that x - r w enters.
  SparseForm near_form(std::size_t i, const Point& w) const {
    SparseForm f;
    auto mi = g_.multi_index(i);
    for (int k = 0; k < g_.dimension(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (w[kk] == 0.0) continue;
      auto nb = mi;
      nb[kk] += w[kk] > 0.0 ? -1 : 1;
      const double c = std::abs(w[kk]) / g_.spacing(k);
      f.add(static_cast<std::uint32_t>(i), c);
      f.add(static_cast<std::uint32_t>(g_.index(nb[0], nb[1])), -c);
    }
    return f;
  }

  // u(x_i) - u(y) with u(y) by multilinear interpolation.
  SparseForm difference_form(std::size_t i, const Point& y) const {
    SparseForm f;
    f.add(static_cast<std::uint32_t>(i), 1.0);
    const int N = g_.nodes_per_axis();
    std::array<int, 2> cell{0, 0};
    std::array<double, 2> t{0.0, 0.0};
    for (int k = 0; k < g_.dimension(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double r = (y[kk] - g_.lower(k)) / g_.spacing(k);
      cell[kk] = std::clamp(static_cast<int>(std::floor(r)), 0, N - 2);
      t[kk] = std::clamp(r - cell[kk], 0.0, 1.0);
    }
    if (g_.dimension() == 1) {
      f.add(static_cast<std::uint32_t>(cell[0]), -(1.0 - t[0]));
      f.add(static_cast<std::uint32_t>(cell[0] + 1), -t[0]);
    } else {
      const int a = cell[0], b = cell[1];
      f.add(static_cast<std::uint32_t>(g_.index(a, b)), -(1.0 - t[0]) * (1.0 - t[1]));
      f.add(static_cast<std::uint32_t>(g_.index(a + 1, b)), -t[0] * (1.0 - t[1]));
      f.add(static_cast<std::uint32_t>(g_.index(a, b + 1)), -(1.0 - t[0]) * t[1]);
      f.add(static_cast<std::uint32_t>(g_.index(a + 1, b + 1)), -t[0] * t[1]);
    }
    return f;
  }

  // int_{h_max}^inf f(r) r^{-1-sp} dr after t = r^{-sp}.
  template <class F>
  Exterior tail_integral(F&& f, bool declared_limit) const {
    auto rule = [&](int order) {
      const GaussRule& g = gauss_legendre(order);
      double acc = 0.0;
      for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        const double t = 0.5 * T_ * (1.0 + g.nodes[j]);
        const double r = std::min(std::pow(t, -1.0 / sp_), 1e300);
        acc += 0.5 * T_ * g.weights[j] * f(r);
      }
      return acc / sp_;
    };
    const double fine = rule(16), coarse = rule(8);
    Exterior e;
    e.tail = fine;
    e.uncertainty = std::abs(fine - coarse);
    if (!declared_limit) e.uncertainty = std::max(e.uncertainty, (bounds_.upper - bounds_.lower) * T_ / sp_);
    return e;
  }

  // int_d^inf m(x, r w) r^{-1-sp} dr
  Exterior fixed_x(const Point& x, const Point& w, double d) const {
    if (traits_.radially_constant) {
      const double c = k_(x, w);
      return {c * (std::pow(d, -sp_) - T_) / sp_, c * T_ / sp_, 0.0};
    }
    Exterior e = tail_integral([&](double r) { return k_(x, r * w); }, k_.has_tail_limit());
    for (const auto& node : geometric_ladder(d, q_.h_max, q_.ratio, q_.points))
      e.bulk += node.weight * k_(x, node.r * w) * std::pow(node.r, -1.0 - sp_);
    return e;
  }

  // int_d^inf m(x + r w, r w) r^{-1-sp} dr: pairs whose first point lies outside the box.
  Exterior moving_x(const Point& x, const Point& w, double d) const {
    auto g = [&](double r) { return k_(x + r * w, r * w); };
    const auto period = k_.period();
    Exterior e;
    const double max_panel = period ? 0.25 * *period : std::numeric_limits<double>::infinity();
    for (const auto& node : geometric_ladder(d, q_.h_max, q_.ratio, q_.points, max_panel))
      e.bulk += node.weight * g(node.r) * std::pow(node.r, -1.0 - sp_);
    if (period) {
      auto mean = [&](double r0) {
        double acc = 0.0;
        for (int j = 0; j < 32; ++j) acc += g(r0 + *period * j / 32.0);
        return acc / 32.0;
      };
      const double m1 = mean(q_.h_max), m2 = mean(2.0 * q_.h_max);
      e.tail = m1 * T_ / sp_;
      e.uncertainty = (bounds_.upper - bounds_.lower) * *period * std::pow(q_.h_max, -1.0 - sp_) +
                      std::abs(m1 - m2) * T_ / sp_;
      return e;
    }
    const Exterior t = tail_integral(g, k_.has_tail_limit());
    e.tail = t.tail;
    e.uncertainty = t.uncertainty;
    return e;
  }

  const Kernel& k_;
  const Grid& g_;
  QuadratureSettings q_;
  double s_, p_, sp_, expo_, T_;
  KernelTraits traits_;
  KernelBounds bounds_;
  std::vector<Point> dirs_;
  std::vector<double> lambda_;
};

struct NodeTotals {
  std::array<double, 3> part{};
  double uncertainty = 0.0;
  [[nodiscard]] double total() const { return (part[0] + part[1]) + part[2]; }
};

std::vector<NodeTotals> node_totals(const Scheme& scheme, const GridFunction& u, double p) {
  const auto values = u.values();
  std::vector<NodeTotals> out(u.grid().size());
  parallel_for(out.size(), [&](std::size_t i) {
    NodeTotals t;
    scheme.visit(i, [&](int part, double weight, double unc, const SparseForm& form) {
      const double v = abs_pow(form.apply(values), p);
      t.part[static_cast<std::size_t>(part)] += weight * v;
      t.uncertainty += unc * v;
    });
    out[i] = t;
  });
  return out;
}

double weighted_sum(const std::vector<double>& w, const std::vector<NodeTotals>& t, int part) {
  std::vector<double> v(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    v[i] = w[i] * (part < 0 ? t[i].total() : (part == 3 ? t[i].uncertainty : t[i].part[static_cast<std::size_t>(part)]));
  return pairwise_sum(v);
}

void check_inputs(const Kernel& k, const GridFunction& u, const QuadratureSettings& q) {
  const Grid& g = u.grid();
  if (k.dimension() != g.dimension())
    throw std::invalid_argument(fmt::format("kernel dimension {} does not match grid dimension {}", k.dimension(), g.dimension()));
  std::array<double, 2> lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::array<double, 2> hi{-lo[0], -lo[1]};
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] == 0.0) continue;
    if (g.on_boundary(i)) throw std::invalid_argument("energy needs zero boundary values (zero extension)");
    any = true;
    const Point x = g.node(i);
    for (int kk = 0; kk < g.dimension(); ++kk) {
      lo[static_cast<std::size_t>(kk)] = std::min(lo[static_cast<std::size_t>(kk)], x[static_cast<std::size_t>(kk)]);
      hi[static_cast<std::size_t>(kk)] = std::max(hi[static_cast<std::size_t>(kk)], x[static_cast<std::size_t>(kk)]);
    }
  }
  if (!any) return;
  // hat support one spacing beyond the outer nonzero nodes, never past the box
  const auto box = g.box();
  double diam = 0.0;
  for (int kk = 0; kk < g.dimension(); ++kk) {
    const auto k2 = static_cast<std::size_t>(kk);
    diam += std::pow(std::min(hi[k2] - lo[k2] + 2.0 * g.spacing(kk), box[2 * k2 + 1] - box[2 * k2]), 2);
  }
  diam = std::sqrt(diam);
  if (q.h_max < 2.0 * diam)
    throw std::invalid_argument(fmt::format("h_max = {} is smaller than twice the support diameter {}", q.h_max, diam));
}

}  // namespace

QuadratureSettings resolve(const QuadratureSettings& s, const Grid& grid) {
  QuadratureSettings r = s;
  if (r.h_min <= 0.0) r.h_min = grid.min_spacing() / 8.0;
  if (r.h_split <= 0.0) r.h_split = grid.diameter();
  if (r.h_max <= 0.0) r.h_max = 2.0 * grid.diameter();
  if (r.h_min > grid.min_spacing()) throw std::invalid_argument("h_min must not exceed the grid spacing");
  if (r.h_max < grid.diameter()) throw std::invalid_argument("h_max must be at least the box diameter");
  if (!(r.ratio > 1.0)) throw std::invalid_argument("radial ratio must exceed 1");
  if (r.points < 1 || r.points > 64) throw std::invalid_argument("radial points must lie in [1, 64]");
  if (r.angles < 4 || r.angles % 2 != 0) throw std::invalid_argument("angle count must be even and >= 4");
  return r;
}

EnergyReport interaction_integral(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                  const QuadratureSettings& settings) {
  const Grid& g = u.grid();
  const QuadratureSettings q = resolve(settings, g);
  check_inputs(k, u, q);
  const auto w = g.trapezoid_weights();

  const Scheme fine(k, g, fp, q);
  const auto totals = node_totals(fine, u, fp.p);
  EnergyReport rep;
  rep.quadrature = q;
  rep.near_diagonal = weighted_sum(w, totals, kNear);
  rep.bulk = weighted_sum(w, totals, kBulk);
  rep.tail = weighted_sum(w, totals, kTail);
  rep.value = (rep.near_diagonal + rep.bulk) + rep.tail;
  if (!q.estimate_error) return rep;

  QuadratureSettings cq = q;
  cq.h_min = 2.0 * q.h_min;
  cq.ratio = q.ratio * q.ratio;
  cq.angles = std::max(4, (q.angles / 2 + 1) / 2 * 2);
  if (cq.h_min > g.min_spacing()) cq.h_min = g.min_spacing();
  const Scheme coarse(k, g, fp, cq);
  const double coarse_value = weighted_sum(w, node_totals(coarse, u, fp.p), -1);
  // the outer rule sees u only at the nodes; rerun it on the exact prolongation of u
  QuadratureSettings rq = q;
  const GridFunction v = refine(u);
  rq.h_min = std::min(q.h_min, v.grid().min_spacing());
  const Scheme halved(k, v.grid(), fp, rq);
  const double outer_refined = weighted_sum(v.grid().trapezoid_weights(), node_totals(halved, v, fp.p), -1);
  // kinks of u at the nodes leave cusps |x - x_k|^{p(1-s)} in the outer integrand
  const double gain = std::pow(2.0, std::min(2.0, fp.p * (1.0 - fp.s)));
  rep.error_bound = std::abs(rep.value - coarse_value) + gain / (gain - 1.0) * std::abs(rep.value - outer_refined) +
                    weighted_sum(w, totals, 3) + 1e-13 * std::abs(rep.value);
  return rep;
}

EnergyReport gagliardo(const GridFunction& u, FractionalParams fp, const QuadratureSettings& settings) {
  return interaction_integral(builtin("constant", {{"n", static_cast<double>(u.grid().dimension())}}), u, fp, settings);
}

EnergyReport anisotropic_energy(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                const QuadratureSettings& settings) {
  EnergyReport r = interaction_integral(k, u, fp, settings);
  const double c = (1.0 - fp.s) / fp.p;
  r.near_diagonal *= c;
  r.bulk *= c;
  r.tail *= c;
  r.value = (r.near_diagonal + r.bulk) + r.tail;
  r.error_bound *= c;
  return r;
}

PowerSum energy_power_sum(const Kernel& k, const Grid& grid, FractionalParams fp, const QuadratureSettings& settings) {
  const QuadratureSettings q = resolve(settings, grid);
  if (k.dimension() != grid.dimension()) throw std::invalid_argument("kernel and grid dimensions differ");
  const Scheme scheme(k, grid, fp, q);
  const auto w = grid.trapezoid_weights();
  std::vector<std::vector<PowerTerm>> per_node(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    scheme.visit(i, [&](int, double weight, double, const SparseForm& form) {
      per_node[i].push_back({w[i] * weight, form, 0.0});
    });
  });
  PowerSum sum(grid.size());
  for (const auto& terms : per_node)
    for (const auto& t : terms) sum.add(t.weight, t.form);
  return sum;
}

InequalityCheck bbm_upper_bound_check(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                      const QuadratureSettings& settings) {
  const int n = u.grid().dimension();
  const EnergyReport I = interaction_integral(k, u, fp, settings);
  const EnergyReport G = gagliardo(u, fp, settings);
  const double m_plus = k.bounds().upper;
  const double mid = m_plus * G.value;
  const double rhs = sphere_measure(n) * m_plus / fp.p *
                     (std::pow(gradient_lp_upper(u, fp.p), fp.p) / (1.0 - fp.s) +
                      std::pow(2.0, fp.p) * std::pow(lp_norm(u, fp.p), fp.p) / fp.s);
  const double tol_left = I.error_bound + m_plus * G.error_bound;
  const double tol_right = m_plus * G.error_bound;
  InequalityCheck c;
  c.lhs = I.value;
  c.rhs = rhs;
  c.slack = rhs - I.value;
  c.tolerance = std::max(tol_left, tol_right);
  c.passes = I.value <= mid + tol_left && mid <= rhs + tol_right;
  return c;
}

InequalityCheck interpolation_check(const Kernel& k, const GridFunction& u, double s1, double s2, double p,
                                    const QuadratureSettings& settings) {
  if (!(s1 < s2)) throw std::invalid_argument("interpolation check needs s1 < s2");
  const EnergyReport J1 = anisotropic_energy(k, u, FractionalParams(s1, p), settings);
  const EnergyReport J2 = anisotropic_energy(k, u, FractionalParams(s2, p), settings);
  const double factor = std::pow(2.0, p * (1.0 - s1));
  InequalityCheck c;
  c.lhs = J1.value;
  c.rhs = factor * J2.value + std::pow(2.0, p - 1.0) * k.bounds().upper * sphere_measure(u.grid().dimension()) *
                                  (1.0 - s1) / s1 * std::pow(lp_norm(u, p), p);
  c.slack = c.rhs - c.lhs;
  c.tolerance = J1.error_bound + factor * J2.error_bound;
  c.passes = c.lhs <= c.rhs + c.tolerance;
  return c;
}

}  // namespace anisofrac
