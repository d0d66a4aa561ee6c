#include "anisofrac/limits.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "anisofrac/extrapolation.hpp"
#include "anisofrac/parallel.hpp"

namespace anisofrac {

LimitDensity::LimitDensity(Kernel k, double p, int resolution)
    : k_(std::move(k)), p_(p), rule_(sphere_rule(k_.dimension(), resolution)) {
  if (!(p_ >= 1.0)) throw std::invalid_argument("p must be >= 1");
}

double LimitDensity::operator()(const Point& x, const Point& xi) const {
  if (xi == Point()) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < rule_.directions.size(); ++j) {
    const Point& w = rule_.directions[j];
    acc += rule_.weights[j] * k_.radial_limit(x, w) * std::pow(std::abs(dot(xi, w)), p_);
  }
  return acc / p_;
}

double limit_density(const LimitDensity& ld, const Point& x, const Point& xi) { return ld(x, xi); }

SmallMatrix limit_matrix(const LimitDensity& ld, const Point& x) {
  if (ld.p() != 2.0) throw std::invalid_argument("limit matrix needs p = 2");
  const int n = ld.dimension();
  SmallMatrix A = SmallMatrix::Zero(n, n);
  const SphereRule& rule = ld.sphere();
  for (std::size_t j = 0; j < rule.directions.size(); ++j) {
    const Point& w = rule.directions[j];
    const double c = 0.5 * rule.weights[j] * ld.kernel().radial_limit(x, w);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) A(a, b) += c * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)];
  }
  return A;
}

double bbm_constant(double p, int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("K_{p,n} is implemented for n in {1,2,3}");
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const SphereRule rule = sphere_rule(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.directions.size(); ++j)
    acc += rule.weights[j] * std::pow(std::abs(rule.directions[j][0]), p);
  return acc / p;
}

double ms_constant(double p, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
  return 4.0 * std::pow(std::numbers::pi, n / 2.0) / (p * std::tgamma(n / 2.0));
}

WeightInterval ms_weight(const Kernel& k, const Point& x, FractionalParams fp, double r_cut) {
  const double rx = norm(x);
  if (!(rx > 0.0)) throw std::invalid_argument("ms_weight is undefined at x = 0");
  if (!(r_cut > 2.0 * rx)) throw std::invalid_argument("ms_weight needs r_cut > 2|x|");
  const double sp = fp.s * fp.p;
  const auto [m_lo, m_hi] = k.bounds();
  const SphereRule rule = sphere_rule(k.dimension());
  const auto fine = geometric_ladder(2.0 * rx, r_cut, 1.0905077326652577, 8);
  const auto rough = geometric_ladder(2.0 * rx, r_cut, 1.0905077326652577, 4);
  const double T = std::pow(r_cut, -sp) / sp;
  double finite = 0.0, finite_err = 0.0, tail_est = 0.0;
  for (std::size_t j = 0; j < rule.directions.size(); ++j) {
    const Point& w = rule.directions[j];
    auto integrate = [&](const std::vector<RadialNode>& nodes) {
      double acc = 0.0;
      for (const auto& nd : nodes) acc += nd.weight * k(x, nd.r * w) * std::pow(nd.r, -1.0 - sp);
      return acc;
    };
    const double a = integrate(fine), b = integrate(rough);
    finite += rule.weights[j] * a;
    finite_err += rule.weights[j] * (std::abs(a - b) + 1e-15 * std::abs(a));
    const double m_inf = k.has_tail_limit() ? k.tail_limit(x, w) : 0.5 * (m_lo + m_hi);
    tail_est += rule.weights[j] * m_inf * T;
  }
  const double measure = sphere_measure(k.dimension());
  const double c = 2.0 * fp.s;
  WeightInterval out;
  out.lo = c * (finite - finite_err + m_lo * measure * T);
  out.hi = c * (finite + finite_err + m_hi * measure * T);
  out.estimate = c * (finite + tail_est);
  return out;
}

double ms_weight_limit(const Kernel& k, const Point& x, double p) {
  if (!k.has_tail_limit()) throw MissingTailLimit("the s -> 0 weight needs a kernel with a declared tail limit");
  const SphereRule rule = sphere_rule(k.dimension());
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.directions.size(); ++j) acc += rule.weights[j] * k.tail_limit(x, rule.directions[j]);
  return 2.0 / p * acc;
}

double ms_weight_extrapolated(const Kernel& k, const Point& x, double p, const std::vector<double>& s_list) {
  if (s_list.empty()) throw std::invalid_argument("extrapolation needs at least one s");
  const double r_cut = 2.0 * norm(x) * 1e6;
  std::vector<double> values;
  for (double s : s_list) values.push_back(ms_weight(k, x, FractionalParams(s, p), r_cut).estimate);
  return extrapolate_to_zero(s_list, values);
}

std::optional<double> ConvergenceTable::extrapolated() const {
  if (rows.empty()) return std::nullopt;
  return rows.back().extrapolated;
}

std::optional<double> ConvergenceTable::final_rel_error() const {
  if (rows.empty()) return std::nullopt;
  return rows.back().rel_error;
}

void write_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "param,value,extrapolated,reference,rel_error\n";
  for (const auto& r : table.rows) {
    out << format_number(r.param) << ',' << format_number(r.value) << ','
        << (r.extrapolated ? format_number(*r.extrapolated) : "") << ',' << format_number(r.reference) << ','
        << (r.rel_error ? format_number(*r.rel_error) : "") << '\n';
  }
}

double relative_error(double x, double ref) {
  return ref != 0.0 ? std::abs(x - ref) / std::abs(ref) : std::abs(x - ref);
}

std::vector<double> default_bbm_s_list() {
  std::vector<double> s;
  for (int k = 2; k <= 7; ++k) s.push_back(1.0 - std::ldexp(1.0, -k));
  return s;
}

std::vector<double> default_ms_s_list() {
  std::vector<double> s;
  for (int k = 2; k <= 7; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

namespace {

// value = scale(s) * I_m(u); extrapolation variable t(s); three-point Neville.
template <class Scale, class Var>
ConvergenceTable sweep(const Kernel& k, const GridFunction& u, double p, const std::vector<double>& s_list,
                       const QuadratureSettings& settings, double reference, Scale scale, Var var, std::string method) {
  QuadratureSettings q = settings;
  q.estimate_error = false;
  ConvergenceTable table;
  table.method = std::move(method);
  std::vector<double> t;
  std::vector<double> v;
  for (double s : s_list) {
    const FractionalParams fp(s, p);
    ConvergenceRow row;
    row.param = s;
    row.value = scale(s) * interaction_integral(k, u, fp, q).value;
    row.reference = reference;
    t.push_back(var(s));
    v.push_back(row.value);
    if (t.size() >= 3) {
      const std::size_t n = t.size();
      row.extrapolated = extrapolate_to_zero(std::span(t).subspan(n - 3), std::span(v).subspan(n - 3));
    }
    row.rel_error = relative_error(row.extrapolated.value_or(row.value), reference);
    table.rows.push_back(row);
  }
  return table;
}

void check_monotone(const std::vector<double>& s, bool increasing) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0 && s[i] < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    if (i > 0 && (increasing ? !(s[i] > s[i - 1]) : !(s[i] < s[i - 1])))
      throw std::invalid_argument(increasing ? "s_list must increase towards 1" : "s_list must decrease towards 0");
  }
}

}  // namespace

ConvergenceTable bbm_sweep(const Kernel& k, const GridFunction& u, double p, std::vector<double> s_list,
                           const QuadratureSettings& settings) {
  if (s_list.empty()) s_list = default_bbm_s_list();
  check_monotone(s_list, true);
  const LimitDensity ld(k, p);
  std::vector<double> cells;
  for (const auto& c : cell_gradients(u)) cells.push_back(c.measure * ld(c.centre, c.gradient));
  const double reference = pairwise_sum(cells);
  return sweep(
      k, u, p, s_list, settings, reference, [](double s) { return 1.0 - s; }, [](double s) { return 1.0 - s; },
      "neville-3 in 1-s");
}

ConvergenceTable ms_sweep(const Kernel& k, const GridFunction& u, double p, std::vector<double> s_list,
                          const QuadratureSettings& settings) {
  if (s_list.empty()) s_list = default_ms_s_list();
  check_monotone(s_list, false);
  const Grid& g = u.grid();
  const auto w = g.trapezoid_weights();
  std::vector<double> terms(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    terms[i] = u[i] == 0.0 ? 0.0 : w[i] * std::pow(std::abs(u[i]), p) * ms_weight_limit(k, g.node(i), p);
  if (!k.has_tail_limit()) throw MissingTailLimit("ms sweep needs a kernel with a declared tail limit");
  const double reference = pairwise_sum(terms);
  return sweep(
      k, u, p, s_list, settings, reference, [](double s) { return s; }, [](double s) { return s; }, "neville-3 in s");
}

}  // namespace anisofrac
