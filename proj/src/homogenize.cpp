#include "anisofrac/homogenize.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "anisofrac/parallel.hpp"

namespace anisofrac {

namespace {

constexpr int kCellSamples = 4096;

// Midpoint rule on [0,1); exact for steps at dyadic points and spectrally accurate for smooth A.
double cell_mean(const std::function<double(double)>& f) {
  std::vector<double> v(kCellSamples);
  for (int j = 0; j < kCellSamples; ++j) v[static_cast<std::size_t>(j)] = f((j + 0.5) / kCellSamples);
  return pairwise_sum(v) / kCellSamples;
}

void check_coefficient(const PeriodicCoefficient& c) {
  if (!c.A) throw std::invalid_argument("periodic coefficient has no A");
  if (!(c.p > 1.0)) throw std::invalid_argument("homogenization needs p > 1");
}

}  // namespace

PeriodicCoefficient coefficient_from_kernel(const Kernel& k, double p) {
  if (k.dimension() != 1) throw std::invalid_argument("homogenization is implemented for n = 1");
  if (!k.period()) throw std::invalid_argument(fmt::format("kernel '{}' is not periodic", k.name()));
  const double cells = 1.0 / *k.period();
  if (std::abs(cells - std::round(cells)) > 1e-9)
    throw std::invalid_argument(fmt::format("kernel period {} does not divide 1", *k.period()));
  return {[k, p](double y) { return (k.radial_limit(Point(y), Point(-1.0)) + k.radial_limit(Point(y), Point(1.0))) / p; },
          p};
}

double cell_problem_1d(const PeriodicCoefficient& c, double xi, int N, const SolverSettings& settings) {
  check_coefficient(c);
  if (N < 2) throw std::invalid_argument("cell problem needs N >= 2");
  if (xi == 0.0) return 0.0;
  const double h = 1.0 / N;
  // unknowns v_1..v_{N-1}; v_0 = 0 fixes the additive constant
  PowerSum sum(static_cast<std::size_t>(N - 1));
  for (int j = 0; j < N; ++j) {
    SparseForm form;
    const int next = (j + 1) % N;
    if (next != 0) form.add(static_cast<std::uint32_t>(next - 1), 1.0 / h);
    if (j != 0) form.add(static_cast<std::uint32_t>(j - 1), -1.0 / h);
    sum.add(h * c.A((j + 0.5) * h), form, xi);
  }
  ConvexObjective f{sum, c.p, std::vector<double>(static_cast<std::size_t>(N - 1), 0.0)};
  const double tol = settings.tolerance > 0.0 ? settings.tolerance : 1e-10 * std::pow(std::abs(xi), c.p - 1.0);
  const auto r = minimize(f, {}, tol, settings.max_iterations, settings.method, true);
  if (!r.converged) throw SolverDidNotConverge("cell problem did not converge");
  return r.objective;
}

StarReport effective_star_report(const PeriodicCoefficient& c, int N) {
  check_coefficient(c);
  const double q = 1.0 / (c.p - 1.0);
  const double mean = cell_mean([&](double y) { return std::pow(c.A(y), -q); });
  StarReport r;
  r.oracle = cell_problem_1d(c, 1.0, N);
  r.formula_printed = std::pow(mean, -q);
  r.formula_classical = std::pow(mean, -(c.p - 1.0));
  r.discrepancy = std::abs(r.formula_printed - r.oracle);
  const double tol = 1e-2 * r.oracle;
  const bool printed = r.discrepancy <= tol, classical = std::abs(r.formula_classical - r.oracle) <= tol;
  r.matches = printed && classical ? "both" : printed ? "printed" : classical ? "classical" : "neither";
  return r;
}

double effective_star(const PeriodicCoefficient& c, int N) { return effective_star_report(c, N).oracle; }

double effective_bar(const PeriodicCoefficient& c) {
  check_coefficient(c);
  return cell_mean(c.A);
}

double effective_bar(const Kernel& k, double p) { return effective_bar(coefficient_from_kernel(k, p)); }

EffectiveCoefficients effective_coefficients(const PeriodicCoefficient& c, int N) {
  EffectiveCoefficients e;
  e.A_star = effective_star(c, N);
  e.A_bar = effective_bar(c);
  e.gap = e.A_bar - e.A_star;
  return e;
}

CommuteReport commute_experiment(const Kernel& k, double p, const GridFunction& f, const std::vector<double>& eps_list,
                                 std::vector<double> s_list, const SolverSettings& settings) {
  if (f.grid().dimension() != 1) throw std::invalid_argument("the commutation experiment is one-dimensional");
  if (eps_list.empty()) throw std::invalid_argument("eps_list is empty");
  for (double e : eps_list)
    if (!(e > 0.0) || std::abs(1.0 / e - std::round(1.0 / e)) > 1e-9)
      throw std::invalid_argument(fmt::format("eps = {} is not of the form 1/integer", e));
  if (s_list.empty()) s_list = default_bbm_s_list();

  const PeriodicCoefficient c = coefficient_from_kernel(k, p);
  auto require = [](const SolveResult& r, const std::string& what) {
    if (!r.converged) throw SolverDidNotConverge(what + " did not converge");
    return r.minimizer;
  };
  auto constant = [](double a) { return ScalarCoefficient([a](const Point&) { return a; }); };

  CommuteReport rep{.u_star = f, .u_bar = f, .rows = {}};
  rep.A_star = effective_star(c);
  rep.A_bar = effective_bar(c);
  rep.u_star = require(solve_local({constant(rep.A_star), p, f, settings}), "homogenized problem (A*)");
  rep.u_bar = require(solve_local({constant(rep.A_bar), p, f, settings}), "homogenized problem (A bar)");
  rep.distance = lp_norm(rep.u_star - rep.u_bar, p);
  const double n_star = lp_norm(rep.u_star, p), n_bar = lp_norm(rep.u_bar, p);
  auto rel = [p](const GridFunction& a, const GridFunction& b, double scale) {
    const double d = lp_norm(a - b, p);
    return scale > 0.0 ? d / scale : d;
  };
  auto row = [&](std::string kind, double eps, double s, const GridFunction& u) {
    rep.rows.push_back({std::move(kind), eps, s, rel(u, rep.u_star, n_star), rel(u, rep.u_bar, n_bar)});
    return rep.rows.back();
  };

  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  const double s_max = *std::max_element(s_list.begin(), s_list.end());
  for (double eps : eps_list) {
    const Kernel ke = oscillating(k, eps);
    row("local-limit", eps, 1.0, require(solve_local({LimitDensity(ke, p), p, f, settings}), "local problem"));
    for (double s : s_list) {
      const auto r = row("nonlocal", eps, s,
                         require(solve_nonlocal({ke, FractionalParams(s, p), f, settings}), "nonlocal problem"));
      if (eps == eps_min && s == s_max) rep.path_i_error = r.rel_dist_u_star;
    }
  }
  const Kernel averaged = cell_average(k);
  for (double s : s_list) {
    const auto r = row("averaged", 0.0, s,
                       require(solve_nonlocal({averaged, FractionalParams(s, p), f, settings}), "averaged problem"));
    if (s == s_max) rep.path_ii_error = r.rel_dist_u_bar;
  }
  return rep;
}

void write_csv(const CommuteReport& r, std::ostream& out) {
  out << "kind,eps,s,rel_dist_u_star,rel_dist_u_bar\n";
  for (const auto& row : r.rows)
    out << row.kind << ',' << format_number(row.eps) << ',' << format_number(row.s) << ','
        << format_number(row.rel_dist_u_star) << ',' << format_number(row.rel_dist_u_bar) << '\n';
  double eps_min = 0.0, s_max = 0.0;
  for (const auto& row : r.rows)
    if (row.kind == "nonlocal") {
      eps_min = eps_min == 0.0 ? row.eps : std::min(eps_min, row.eps);
      s_max = std::max(s_max, row.s);
    }
  out << "summary," << format_number(eps_min) << ',' << format_number(s_max) << ',' << format_number(r.path_i_error)
      << ',' << format_number(r.path_ii_error) << '\n';
}

}  // namespace anisofrac
