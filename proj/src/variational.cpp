#include "anisofrac/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

namespace anisofrac {

double ConvexObjective::value(std::span<const double> v) const {
  double lin = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) lin += load[i] * v[i];
  return sum.value(v, p) - lin;
}

double ConvexObjective::change(std::span<const double> v, std::span<const double> d) const {
  double lin = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) lin += load[i] * d[i];
  return sum.change(v, d, p) - lin;
}

void ConvexObjective::gradient(std::span<const double> v, std::span<double> out) const {
  sum.gradient(v, p, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= load[i];
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Curvature floor for |t|^{p-2}: relative to the current scale, 1 at the origin.
// Small for p < 2, where the gradient is only Holder and a coarse floor stalls the endgame.
double floor_for(const ConvexObjective& f, std::span<const double> x) {
  const double m = f.sum.max_argument(x);
  if (!(m > 0.0)) return 1.0;
  double delta = std::max((f.p < 2.0 ? 1e-12 : 1e-6) * m, 1e-300);
  return delta;
}

std::vector<double> newton_direction(const ConvexObjective& f, const std::vector<double>& x,
                                     const std::vector<double>& g, bool sparse, double delta, bool majorant = false) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::Map<const Eigen::VectorXd> rhs(g.data(), n);
  Eigen::VectorXd d;
  if (sparse) {
    Eigen::SparseMatrix<double> H = f.sum.sparse_hessian(x, f.p, delta, majorant);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(H);
    if (solver.info() == Eigen::Success) d = solver.solve(-rhs);
    if (solver.info() != Eigen::Success || !d.allFinite()) {
      Eigen::SparseMatrix<double> I(n, n);
      I.setIdentity();
      const double shift = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      Eigen::SparseMatrix<double> Hs = H + shift * I;
      solver.compute(Hs);
      d = solver.solve(-rhs);
    }
  } else {
    Eigen::MatrixXd H = f.sum.dense_hessian(x, f.p, delta, majorant);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      const double shift = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += shift;
      llt.compute(H);
    }
    d = llt.solve(-rhs);
  }
  return std::vector<double>(d.data(), d.data() + n);
}

struct LineSearch {
  bool accepted = false;
  bool full_step = false;
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> g;
};

// Backtracking from step t0 on the change of the objective, which stays accurate where the
// value itself has run out of digits. Accepts Armijo decrease, or any step that does not
// increase the objective and reduces the gradient.
LineSearch backtrack(const ConvexObjective& f, const std::vector<double>& x, double fx, double res,
                     const std::vector<double>& d, double slope, double t0) {
  LineSearch ls;
  ls.x.resize(x.size());
  ls.g.resize(x.size());
  std::vector<double> step(x.size());
  double t = t0;
  for (int k = 0; k < 80; ++k, t *= 0.5) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      step[i] = t * d[i];
      ls.x[i] = x[i] + step[i];
    }
    const double delta = f.change(x, step);
    if (!std::isfinite(delta)) continue;
    ls.value = delta < 0.0 ? fx + delta : fx;
    if (delta <= 1e-4 * t * slope) {
      f.gradient(ls.x, ls.g);
      ls.accepted = true;
      ls.full_step = k == 0;
      return ls;
    }
    if (delta <= 0.0) {
      f.gradient(ls.x, ls.g);
      if (sup_norm(ls.g) < res) {
        ls.accepted = true;
        return ls;
      }
    }
  }
  return ls;
}

}  // namespace

MinimizeResult minimize(const ConvexObjective& f, std::vector<double> x0, double tolerance, int max_iterations,
                        SolverMethod method, bool sparse) {
  const std::size_t n = f.sum.dimension();
  if (f.load.size() != n) throw std::invalid_argument("objective load has the wrong size");
  if (x0.empty()) x0.assign(n, 0.0);
  if (x0.size() != n) throw std::invalid_argument("initial guess has the wrong size");
  if (method == SolverMethod::automatic) method = f.p == 2.0 ? SolverMethod::direct : SolverMethod::newton;
  if (method == SolverMethod::direct && f.p != 2.0) throw std::invalid_argument("the direct solver needs p = 2");

  MinimizeResult r;
  r.x = std::move(x0);
  r.objective = f.value(r.x);
  r.trace.push_back(r.objective);
  std::vector<double> g(n);
  f.gradient(r.x, g);
  r.residual = sup_norm(g);
  if (n == 0) {
    r.converged = true;
    return r;
  }

  if (method == SolverMethod::direct) {
    if (r.residual <= tolerance) {
      r.converged = true;
      return r;
    }
    const auto d = newton_direction(f, r.x, g, sparse, floor_for(f, r.x));
    std::vector<double> x1(n);
    for (std::size_t i = 0; i < n; ++i) x1[i] = r.x[i] + d[i];
    const double v1 = f.value(x1);
    r.iterations = 1;
    if (v1 <= r.objective) {
      r.x = std::move(x1);
      r.objective = v1;
      r.trace.push_back(v1);
      f.gradient(r.x, g);
      r.residual = sup_norm(g);
    }
    r.converged = r.residual <= tolerance;
    return r;
  }

  std::vector<double> d(n), g_prev;
  for (int it = 0; it < max_iterations; ++it) {
    if (r.residual <= tolerance) break;
    double t0 = 1.0;
    if (method == SolverMethod::newton) {
      d = newton_direction(f, r.x, g, sparse, floor_for(f, r.x));
    } else {
      const bool restart = it == 0 || it % static_cast<int>(std::max<std::size_t>(n, 1)) == 0;
      if (restart) {
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      } else {
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += g[i] * (g[i] - g_prev[i]);
        const double beta = std::max(0.0, num / dot(g_prev, g_prev));
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] + beta * d[i];
      }
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -dot(g, g);
    }
    if (method == SolverMethod::conjugate_gradient) {
      const auto [first, second] = f.sum.directional(r.x, d, f.p, floor_for(f, r.x));
      const double lin = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += f.load[i] * d[i];
        return s;
      }();
      const double dphi = first - lin;
      t0 = second > 0.0 ? std::max(-dphi / second, 0.0) : 1.0;
      if (!(t0 > 0.0) || !std::isfinite(t0)) t0 = 1.0;
    }
    LineSearch ls = backtrack(f, r.x, r.objective, r.residual, d, slope, t0);
    if (method == SolverMethod::newton && f.p < 2.0 && !(ls.full_step && sup_norm(ls.g) < r.residual)) {
      // the Newton model misjudges steps across a kink of |t|^p; fall back on the majorizing model
      auto dm = newton_direction(f, r.x, g, sparse, floor_for(f, r.x), true);
      const double sm = dot(g, dm);
      if (sm < 0.0) {
        LineSearch alt = backtrack(f, r.x, r.objective, r.residual, dm, sm, 1.0);
        if (alt.accepted) {
          ls = std::move(alt);
          d = std::move(dm);
        }
      }
    }
    if (!ls.accepted) break;
    if (ls.value > r.objective) throw std::logic_error("objective increased during descent");
    g_prev = g;
    r.x = std::move(ls.x);
    r.objective = ls.value;
    g = std::move(ls.g);
    r.residual = sup_norm(g);
    r.trace.push_back(r.objective);
    r.iterations = it + 1;
  }
  r.converged = r.residual <= tolerance;
  return r;
}

namespace {

struct Unknowns {
  std::vector<std::int64_t> map;   // grid node -> unknown, -1 when pinned
  std::vector<std::size_t> nodes;  // unknown -> grid node
};

Unknowns interior(const Grid& g) {
  Unknowns u;
  u.map.assign(g.size(), -1);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g.on_boundary(i)) {
      u.map[i] = static_cast<std::int64_t>(u.nodes.size());
      u.nodes.push_back(i);
    }
  return u;
}

std::vector<double> load_vector(const GridFunction& f, const Unknowns& u) {
  const auto w = f.grid().trapezoid_weights();
  std::vector<double> b(u.nodes.size());
  for (std::size_t j = 0; j < b.size(); ++j) b[j] = w[u.nodes[j]] * f[u.nodes[j]];
  return b;
}

double resolve_tolerance(const SolverSettings& s, const GridFunction& f) {
  return s.tolerance > 0.0 ? s.tolerance : 1e-8 * (1.0 + f.max_abs());
}

SolveResult finish(const MinimizeResult& m, const Grid& g, const Unknowns& u, double tol) {
  std::vector<double> values(g.size(), 0.0);
  for (std::size_t j = 0; j < u.nodes.size(); ++j) values[u.nodes[j]] = m.x[j];
  SolveResult r{.minimizer = GridFunction(g, std::move(values), true), .objective_trace = {}};
  r.objective = m.objective;
  r.residual = m.residual;
  r.tolerance = tol;
  r.iterations = m.iterations;
  r.converged = m.converged;
  r.objective_trace = m.trace;
  return r;
}

std::vector<double> initial_unknowns(const SolverSettings& s, const Unknowns& u, std::size_t grid_size) {
  if (s.initial.empty()) return {};
  if (s.initial.size() != grid_size) throw std::invalid_argument("initial values must cover every grid node");
  std::vector<double> x(u.nodes.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = s.initial[u.nodes[j]];
  return x;
}

void require_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("the variational problems need p > 1");
}

}  // namespace

ConvexObjective nonlocal_objective(const NonlocalProblem& prob) {
  require_p(prob.fp.p);
  const Grid& g = prob.source.grid();
  const Unknowns u = interior(g);
  PowerSum full = energy_power_sum(prob.kernel, g, prob.fp, prob.settings.quadrature);
  PowerSum scaled(full.dimension());
  for (const auto& t : full.terms()) scaled.add((1.0 - prob.fp.s) * t.weight, t.form, t.offset);
  return {scaled.restrict(u.map, u.nodes.size()), prob.fp.p, load_vector(prob.source, u)};
}

SolveResult solve_nonlocal(const NonlocalProblem& prob) {
  const Grid& g = prob.source.grid();
  const Unknowns u = interior(g);
  const ConvexObjective f = nonlocal_objective(prob);
  const double tol = resolve_tolerance(prob.settings, prob.source);
  const auto m = minimize(f, initial_unknowns(prob.settings, u, g.size()), tol, prob.settings.max_iterations,
                          prob.settings.method, false);
  return finish(m, g, u, tol);
}

ConvexObjective local_objective(const LocalProblem& prob) {
  require_p(prob.p);
  const Grid& g = prob.source.grid();
  const Unknowns u = interior(g);
  const int n = g.dimension();
  if (n == 2 && prob.p != 2.0) throw std::invalid_argument("2D local problems are implemented for p = 2 only");
  if (const auto* ld = std::get_if<LimitDensity>(&prob.coefficient)) {
    if (ld->dimension() != n) throw std::invalid_argument("limit density and grid dimensions differ");
    if (ld->p() != prob.p) throw std::invalid_argument("limit density exponent differs from p");
  }
  PowerSum sum(g.size());
  const int N = g.nodes_per_axis();
  if (n == 1) {
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < N; ++c) {
      const Point xm(g.lower(0) + (c + 0.5) * h);
      const double A = std::visit(
          [&](const auto& coef) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(coef)>, LimitDensity>)
              return coef(xm, Point(1.0));
            else
              return coef(xm);
          },
          prob.coefficient);
      SparseForm form;
      form.add(static_cast<std::uint32_t>(c + 1), 1.0 / h);
      form.add(static_cast<std::uint32_t>(c), -1.0 / h);
      sum.add(h * A, form);
    }
  } else {
    // P1 triangles; each cell split along its anti-diagonal.
    const double hx = g.spacing(0), hy = g.spacing(1), area = 0.5 * hx * hy;
    for (int b = 0; b + 1 < N; ++b)
      for (int a = 0; a + 1 < N; ++a) {
        const auto i00 = static_cast<std::uint32_t>(g.index(a, b)), i10 = static_cast<std::uint32_t>(g.index(a + 1, b));
        const auto i01 = static_cast<std::uint32_t>(g.index(a, b + 1)), i11 = static_cast<std::uint32_t>(g.index(a + 1, b + 1));
        struct Tri {
          Point centroid;
          // grad v = (cx . v, cy . v) as (node, coefficient) pairs
          std::array<std::pair<std::uint32_t, double>, 2> gx, gy;
        };
        const double x0 = g.lower(0) + a * hx, y0 = g.lower(1) + b * hy;
        const Tri tris[2] = {
            {Point(x0 + hx / 3, y0 + hy / 3), {{{i10, 1 / hx}, {i00, -1 / hx}}}, {{{i01, 1 / hy}, {i00, -1 / hy}}}},
            {Point(x0 + 2 * hx / 3, y0 + 2 * hy / 3), {{{i11, 1 / hx}, {i01, -1 / hx}}}, {{{i11, 1 / hy}, {i10, -1 / hy}}}},
        };
        for (const Tri& t : tris) {
          SmallMatrix A(2, 2);
          if (const auto* ld = std::get_if<LimitDensity>(&prob.coefficient)) {
            A = limit_matrix(*ld, t.centroid);
          } else {
            A.setIdentity();
            A *= std::get<ScalarCoefficient>(prob.coefficient)(t.centroid);
          }
          Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(A);
          for (int k = 0; k < 2; ++k) {
            const double lam = eig.eigenvalues()(k);
            if (!(lam > 0.0)) throw std::invalid_argument("local coefficient is not positive definite");
            const double qx = eig.eigenvectors()(0, k), qy = eig.eigenvectors()(1, k);
            SparseForm form;
            for (const auto& [node, c] : t.gx) form.add(node, qx * c);
            for (const auto& [node, c] : t.gy) form.add(node, qy * c);
            sum.add(area * lam, form);
          }
        }
      }
  }
  return {sum.restrict(u.map, u.nodes.size()), prob.p, load_vector(prob.source, u)};
}

SolveResult solve_local(const LocalProblem& prob) {
  const Grid& g = prob.source.grid();
  const Unknowns u = interior(g);
  const ConvexObjective f = local_objective(prob);
  const double tol = resolve_tolerance(prob.settings, prob.source);
  const auto m = minimize(f, initial_unknowns(prob.settings, u, g.size()), tol, prob.settings.max_iterations,
                          prob.settings.method, true);
  return finish(m, g, u, tol);
}

ConvergenceTable localization_sweep(const Kernel& k, double p, const GridFunction& f, std::vector<double> s_list,
                                    const SolverSettings& settings) {
  if (s_list.empty()) s_list = default_bbm_s_list();
  for (std::size_t i = 0; i < s_list.size(); ++i)
    if (i > 0 && !(s_list[i] > s_list[i - 1])) throw std::invalid_argument("s_list must increase towards 1");
  const SolveResult local = solve_local({LimitDensity(k, p), p, f, settings});
  if (!local.converged) throw SolverDidNotConverge("local problem did not converge");
  const double scale = lp_norm(local.minimizer, p);
  ConvergenceTable table;
  table.method = "none";
  for (double s : s_list) {
    const SolveResult us = solve_nonlocal({k, FractionalParams(s, p), f, settings});
    if (!us.converged) throw SolverDidNotConverge(fmt::format("nonlocal problem at s = {} did not converge", s));
    ConvergenceRow row;
    row.param = s;
    row.value = lp_norm(us.minimizer - local.minimizer, p);
    row.reference = 0.0;
    row.rel_error = scale > 0.0 ? row.value / scale : row.value;
    table.rows.push_back(row);
  }
  return table;
}

bool tail_decreasing(const ConvergenceTable& table, double noise) {
  const auto& r = table.rows;
  if (r.size() < 3) return true;
  for (std::size_t i = r.size() - 2; i < r.size(); ++i)
    if (r[i].value > r[i - 1].value * (1.0 + noise) + 1e-300) return false;
  return true;
}

}  // namespace anisofrac
