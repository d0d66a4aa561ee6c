// Acceptance checks. `acceptance N` runs criterion N, no argument runs all of them.
// Each prints one PASS/FAIL line; the exit status is nonzero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "anisofrac/energy.hpp"
#include "anisofrac/homogenize.hpp"
#include "anisofrac/limits.hpp"
#include "anisofrac/parallel.hpp"
#include "anisofrac/variational.hpp"
#include "properties.hpp"

using namespace anisofrac;

namespace {

// pinned tolerances
constexpr double kBbmTol = 0.02;
constexpr double kPeriodicBbmTol = 0.03;
constexpr double kMsTol = 0.10;
constexpr double kWeightExactTol = 1e-10;
constexpr double kWeightPathTol = 0.05;
constexpr int kInterpolationCases = 200;
constexpr double kLocalizationTol = 0.05;
constexpr double kStarTol = 0.01;
constexpr double kBarTol = 1e-10;
constexpr double kDistanceTol = 0.03;
constexpr double kPathTol = 0.10;
constexpr int kPropertyCases = 1000;

// runtime limits in seconds
constexpr double kLimit1 = 30, kLimit2 = 60, kLimit3 = 60, kLimit5 = 300, kLimit6 = 300, kLimit8 = 900;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double bump(double x, double a, double b) {
  const double t = (2.0 * x - a - b) / (b - a);
  return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
}

double bump_slope(double x, double a, double b) {
  const double t = (2.0 * x - a - b) / (b - a);
  if (std::abs(t) >= 1.0) return 0.0;
  const double q = 1.0 - t * t;
  return bump(x, a, b) * (-2.0 * t / (q * q)) * 2.0 / (b - a);
}

// trapezoid rule with many points, on smooth integrands
double integrate(const std::function<double(double)>& f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) sum += f(a + i * h);
  return sum * h;
}

GridFunction sample_bump(const Grid& g, double a, double b) {
  return GridFunction::sample(g, [=](const Point& x) { return bump(x[0], a, b); });
}

Verdict within(double value, double reference, double tol, const std::string& what) {
  const double rel = relative_error(value, reference);
  return {rel <= tol, fmt::format("{} {:.10g} vs {:.10g}, rel {:.3g} (tol {})", what, value, reference, rel, tol)};
}

Verdict bbm_constant_recovery() {
  set_thread_count(1);
  const auto u = sample_bump(Grid(1, {-1, 1}, 257), -1, 1);
  const auto t = bbm_sweep(builtin("constant", {}), u, 2.0);
  set_thread_count(0);
  const double ref = integrate([](double x) { return std::pow(bump_slope(x, -1, 1), 2); }, -1, 1);
  return within(t.extrapolated().value_or(NAN), ref, kBbmTol, "extrapolated (1-s)[u]^2 against ||u'||^2:");
}

Verdict anisotropic_bbm() {
  const auto u = sample_bump(Grid(1, {-1, 1}, 257), -1, 1);
  const auto t = bbm_sweep(builtin("periodic-1d", {}), u, 2.0);
  const double ref = integrate(
      [](double x) { return (2.0 + std::sin(2 * M_PI * x)) * std::pow(bump_slope(x, -1, 1), 2); }, -1, 1);
  // bbm_sweep reports (1-s) I_m; J = (1-s)/p I_m tends to the same limit over p
  return within(t.extrapolated().value_or(NAN), ref, kPeriodicBbmTol, "extrapolated (1-s) I_m against int a |u'|^2:");
}

Verdict ms_constant_recovery() {
  const auto u = sample_bump(Grid(1, {0, 3}, 129), 1, 2);
  const auto t = ms_sweep(builtin("constant", {}), u, 2.0);
  const double ref = 2.0 * integrate([](double x) { return std::pow(bump(x, 1, 2), 2); }, 1, 2);
  return within(t.extrapolated().value_or(NAN), ref, kMsTol, "extrapolated s[u]^2 against 2||u||^2:");
}

Verdict ms_weight_identity() {
  bool ok = true;
  double worst_exact = 0.0, worst_path = 0.0;
  for (int n : {1, 2})
    for (double p : {1.0, 2.0, 3.0}) {
      const double closed = 4.0 * std::pow(M_PI, n / 2.0) / (p * std::tgamma(n / 2.0));
      const Kernel k = builtin("constant", {{"n", static_cast<double>(n)}});
      const Point x = n == 1 ? Point(1.0) : Point(std::sqrt(0.5), std::sqrt(0.5));
      const double exact = relative_error(ms_weight_limit(k, x, p), closed);
      const double path = relative_error(ms_weight_extrapolated(k, x, p), closed);
      worst_exact = std::max(worst_exact, exact);
      worst_path = std::max(worst_path, path);
      ok = ok && exact <= kWeightExactTol && path <= kWeightPathTol;
    }
  return {ok, fmt::format("b = C_(p,n) for p in 1,2,3 and n in 1,2: closed-form rel {:.3g} (tol {}), "
                          "s-extrapolated at |x|=1 rel {:.3g} (tol {})",
                          worst_exact, kWeightExactTol, worst_path, kWeightPathTol)};
}

Verdict interpolation_suite() {
  const auto o = properties::check("interpolation", kInterpolationCases, 5, [](properties::Cases& g, std::ostream& why, double& used) {
    const int n = properties::random_dimension(g);
    const Kernel k = properties::random_kernel(g, n);
    const auto u = properties::random_function(properties::random_grid(g, n), g);
    const double s1 = g.uniform(0.05, 0.9), s2 = g.uniform(s1 + 0.02, 0.95), p = g.uniform(1.0, 4.0);
    const auto c = interpolation_check(k, u, s1, s2, p);
    used = c.lhs / (c.rhs + c.tolerance);
    why << k.name() << " s1=" << s1 << " s2=" << s2 << " p=" << p << ": " << c.lhs << " > " << c.rhs << " + " << c.tolerance;
    return c.passes;
  });
  return {o.passed(), fmt::format("{} cases, {} violations beyond the quadrature bounds, largest lhs/(rhs+tol) {:.3g}{}",
                                  o.cases, o.failures, o.worst, o.passed() ? "" : "; " + o.first_failure)};
}

Verdict localization() {
  const Grid g(1, {-1, 1}, 129);
  const auto f = GridFunction::sample(g, [](const Point&) { return 1.0; }, false);
  const double s = 1.0 - std::pow(2.0, -7);
  const auto r = solve_nonlocal({builtin("constant", {}), FractionalParams(s, 2.0), f, {}});
  // -2u'' = 1 with zero boundary values
  const auto exact = GridFunction::sample(g, [](const Point& x) { return 0.25 * (1 - x[0] * x[0]); });
  const double rel = lp_norm(r.minimizer - exact, 2.0) / lp_norm(exact, 2.0);
  return {r.converged && rel <= kLocalizationTol,
          fmt::format("||u_s - u||/||u|| at s = 1-2^-7: {:.4g} (tol {}), solver {}", rel, kLocalizationTol,
                      r.converged ? "converged" : "did not converge")};
}

Verdict homogenized_coefficients() {
  const Kernel k = builtin("periodic-1d", {});
  const auto star = effective_star_report(coefficient_from_kernel(k, 2.0), 512);
  const double root3 = std::sqrt(3.0);
  const double oracle = relative_error(star.oracle, root3), formula = relative_error(star.formula_classical, root3);
  const double bar = std::abs(effective_bar(k, 2.0) - 2.0);
  const Grid g(1, {-1, 1}, 129);
  const auto r = commute_experiment(k, 2.0, GridFunction::sample(g, [](const Point&) { return 1.0; }, false), {0.5}, {0.75});
  const double expected = 0.25 * std::abs(1 / root3 - 0.5) * std::sqrt(16.0 / 15.0);
  const double dist = relative_error(r.distance, expected);
  return {oracle <= kStarTol && formula <= kStarTol && bar <= kBarTol && dist <= kDistanceTol,
          fmt::format("A* oracle rel {:.3g}, formula rel {:.3g} (tol {}); |A_bar - 2| {:.3g} (tol {}); "
                      "distance {:.6g} vs {:.6g}, rel {:.3g} (tol {})",
                      oracle, formula, kStarTol, bar, kBarTol, r.distance, expected, dist, kDistanceTol)};
}

Verdict non_commutation() {
  const Grid g(1, {-1, 1}, 129);
  const auto f = GridFunction::sample(g, [](const Point&) { return 1.0; }, false);
  const auto r = commute_experiment(builtin("periodic-1d", {}), 2.0, f, {0.25, 0.125, 0.0625}, {0.75, 0.875, 0.9375, 0.96875});
  const double sep = std::max(r.distance / lp_norm(r.u_star, 2.0), r.distance / lp_norm(r.u_bar, 2.0));
  const bool paths = r.path_i_error <= kPathTol && r.path_ii_error <= kPathTol;
  return {paths && sep > 2 * kPathTol,
          fmt::format("path (i) rel {:.4g}, path (ii) rel {:.4g} (tol {}); limits differ by {:.4g} relative, "
                      "needs > {} (A* = {:.6g}, A_bar = {:.6g})",
                      r.path_i_error, r.path_ii_error, kPathTol, sep, 2 * kPathTol, r.A_star, r.A_bar)};
}

Verdict property_suites() {
  bool ok = true;
  std::string detail;
  for (const auto& o : properties::all(kPropertyCases, 900)) {
    ok = ok && o.passed() && o.cases == kPropertyCases;
    detail += fmt::format("{}{}: {}/{}", detail.empty() ? "" : "; ", o.name, o.cases - o.failures, o.cases);
    if (!o.passed()) detail += " (" + o.first_failure + ")";
  }
  return {ok, detail};
}

struct Criterion {
  const char* title;
  Verdict (*run)();
  double limit;  // seconds, 0 for none
};

const Criterion kCriteria[] = {
    {"BBM constant recovery", bbm_constant_recovery, kLimit1},
    {"anisotropic BBM", anisotropic_bbm, kLimit2},
    {"MS constant recovery", ms_constant_recovery, kLimit3},
    {"MS weight identity", ms_weight_identity, 0},
    {"interpolation inequality", interpolation_suite, kLimit5},
    {"nonlocal to local convergence", localization, kLimit6},
    {"homogenized coefficients", homogenized_coefficients, 0},
    {"non-commuting limits", non_commutation, kLimit8},
    {"property suites", property_suites, 0},
};

bool run_one(int id) {
  const Criterion& c = kCriteria[id - 1];
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = c.limit == 0 || secs <= c.limit;
  const std::string time = c.limit > 0 ? fmt::format("{:.1f} s of {} s", secs, c.limit) : fmt::format("{:.1f} s", secs);
  fmt::print("criterion {} {}: {}: {}; {}\n", id, v.pass && in_time ? "PASS" : "FAIL", c.title, v.detail, time);
  std::fflush(stdout);
  return v.pass && in_time;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= 9; ++i) ids.push_back(i);
  bool ok = true;
  for (int id : ids) {
    if (id < 1 || id > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    ok = run_one(id) && ok;
  }
  return ok ? 0 : 1;
}
