#include "anisofrac/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace anisofrac {

namespace {

constexpr double kPi = std::numbers::pi;

double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// Halton sequence in `dims` coordinates with a seeded Cranley-Patterson rotation.
class QuasiRandom {
 public:
  QuasiRandom(int dims, std::uint64_t seed) : dims_(dims) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < dims; ++j) shift_.push_back(u(rng));
  }
  std::vector<double> operator()(std::uint64_t i) const {
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    std::vector<double> out(static_cast<std::size_t>(dims_));
    for (int j = 0; j < dims_; ++j) {
      double v = radical_inverse(i + 1, primes[j]) + shift_[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(j)] = v - std::floor(v);
    }
    return out;
  }

 private:
  int dims_;
  std::vector<double> shift_;
};

Point unit_direction(int n, double t1, double t2) {
  switch (n) {
    case 1:
      return Point(t1 < 0.5 ? -1.0 : 1.0);
    case 2:
      return Point(std::cos(2 * kPi * t1), std::sin(2 * kPi * t1));
    default: {
      const double z = 2.0 * t1 - 1.0, rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      return Point(rho * std::cos(2 * kPi * t2), rho * std::sin(2 * kPi * t2), z);
    }
  }
}

struct Sample {
  Point x;
  Point omega;
  double r;
};

// x in the period cell (or [-2,2]^n), |h| log-uniform in [1e-3, 4].
std::vector<Sample> audit_samples(int n, std::optional<double> period, std::size_t count, std::uint64_t seed) {
  QuasiRandom q(n + 3, seed);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto v = q(i);
    Sample s;
    for (int j = 0; j < n; ++j) {
      const double t = v[static_cast<std::size_t>(j)];
      s.x[static_cast<std::size_t>(j)] = period ? *period * t : -2.0 + 4.0 * t;
    }
    s.omega = unit_direction(n, v[static_cast<std::size_t>(n)], v[static_cast<std::size_t>(n + 1)]);
    s.r = std::exp(std::log(1e-3) + v[static_cast<std::size_t>(n + 2)] * std::log(4e3));
    out.push_back(s);
  }
  return out;
}

double param(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  throw std::invalid_argument(fmt::format("kernel parameter '{}' must be a number", key));
}

void reject_unknown(const std::string& name, const ParamMap& params, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(fmt::format("kernel '{}' has no parameter '{}'", name, key));
  }
}

int param_dimension(const ParamMap& params, int fallback) {
  const double n = param(params, "n", fallback);
  if (n != std::floor(n) || n < 1 || n > 3) throw std::invalid_argument("kernel parameter 'n' must be 1, 2 or 3");
  return static_cast<int>(n);
}

// Linear interpolation position in a sorted axis, clamped (nearest-value extension).
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

struct Table {
  std::vector<double> xs, hs;
  std::vector<double> values;  // values[ix * hs.size() + ih]

  double at(double x, double h) const {
    const auto [ix, tx] = locate(xs, x);
    const auto [ih, th] = locate(hs, h);
    const std::size_t nh = hs.size();
    auto v = [&](std::size_t i, std::size_t j) {
      return values[std::min(i, xs.size() - 1) * nh + std::min(j, nh - 1)];
    };
    return (1 - tx) * ((1 - th) * v(ix, ih) + th * v(ix, ih + 1)) +
           tx * ((1 - th) * v(ix + 1, ih) + th * v(ix + 1, ih + 1));
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open kernel table '{}'", path));
  std::vector<std::array<double, 3>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::array<double, 3> r{};
    if (!(ss >> r[0] >> r[1] >> r[2])) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw std::invalid_argument(fmt::format("{}:{}: expected x,h,value", path, lineno));
    }
    rows.push_back(r);
  }
  Table t;
  std::set<double> xs, hs;
  for (const auto& r : rows) {
    xs.insert(r[0]);
    hs.insert(r[1]);
  }
  t.xs.assign(xs.begin(), xs.end());
  t.hs.assign(hs.begin(), hs.end());
  if (t.xs.empty()) throw std::invalid_argument(fmt::format("kernel table '{}' is empty", path));
  if (rows.size() != t.xs.size() * t.hs.size())
    throw std::invalid_argument(fmt::format("kernel table '{}' is not a complete (x,h) grid", path));
  t.values.assign(rows.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    const auto ix = static_cast<std::size_t>(std::lower_bound(t.xs.begin(), t.xs.end(), r[0]) - t.xs.begin());
    const auto ih = static_cast<std::size_t>(std::lower_bound(t.hs.begin(), t.hs.end(), r[1]) - t.hs.begin());
    t.values[ix * t.hs.size() + ih] = r[2];
  }
  for (double v : t.values)
    if (!std::isfinite(v)) throw std::invalid_argument(fmt::format("kernel table '{}' has duplicate or missing entries", path));
  return t;
}

Kernel tabulated(const Table& table) {
  auto t = std::make_shared<const Table>(table);
  const auto [lo, hi] = std::minmax_element(t->values.begin(), t->values.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("kernel table values must be positive");
  Kernel::Definition d;
  d.name = "tabulated";
  d.dimension = 1;
  d.weight = [t](const Point& x, const Point& h) { return t->at(x[0], h[0]); };
  d.radial_limit = [t](const Point& x, const Point&) { return t->at(x[0], 0.0); };
  d.tail_limit = [t](const Point& x, const Point& w) {
    return t->at(x[0], w[0] > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity());
  };
  d.bounds = {*lo, *hi};
  return Kernel(std::move(d));
}

}  // namespace

Kernel::Kernel(Definition definition) {
  if (definition.dimension < 1 || definition.dimension > 3) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  if (!definition.weight || !definition.radial_limit) throw std::invalid_argument("kernel needs a weight and a radial limit");
  const auto [lo, hi] = definition.bounds;
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw std::invalid_argument("kernel bounds must satisfy 0 < m- <= m+ < inf");
  if (definition.period && !(*definition.period > 0.0)) throw std::invalid_argument("kernel period must be positive");
  def_ = std::make_shared<const Definition>(std::move(definition));
}

double Kernel::tail_limit(const Point& x, const Point& omega) const {
  if (!def_->tail_limit) throw MissingTailLimit(fmt::format("kernel '{}' declares no tail limit", def_->name));
  return def_->tail_limit(x, omega);
}

Kernel symmetrize(const Kernel& k) {
  const KernelTraits t = k.traits();
  Kernel::Definition d;
  d.name = k.name() + "-sym";
  d.dimension = k.dimension();
  d.weight = [k](const Point& x, const Point& h) { return 0.5 * (k(x, h) + k(x - h, -h)); };
  d.radial_limit = [k](const Point& x, const Point& w) { return 0.5 * (k.radial_limit(x, w) + k.radial_limit(x, -w)); };
  if (k.has_tail_limit() && (t.symmetric || t.translation_invariant))
    d.tail_limit = [k](const Point& x, const Point& w) { return 0.5 * (k.tail_limit(x, w) + k.tail_limit(x, -w)); };
  d.bounds = k.bounds();
  d.period = k.period();
  d.traits.symmetric = true;
  d.traits.translation_invariant = t.translation_invariant;
  d.traits.radially_constant = t.radially_constant && (t.translation_invariant || t.symmetric);
  return Kernel(std::move(d));
}

Kernel oscillating(const Kernel& k, double eps) {
  if (!k.period()) throw std::invalid_argument(fmt::format("kernel '{}' is not periodic", k.name()));
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double inv = 1.0 / eps;
  Kernel::Definition d;
  d.name = fmt::format("{}-eps{}", k.name(), eps);
  d.dimension = k.dimension();
  d.weight = [k, inv](const Point& x, const Point& h) { return k(inv * x, h); };
  d.radial_limit = [k, inv](const Point& x, const Point& w) { return k.radial_limit(inv * x, w); };
  if (k.has_tail_limit()) d.tail_limit = [k, inv](const Point& x, const Point& w) { return k.tail_limit(inv * x, w); };
  d.bounds = k.bounds();
  d.period = eps * *k.period();
  d.traits = k.traits();
  d.traits.symmetric = k.traits().symmetric && k.traits().translation_invariant;
  return Kernel(std::move(d));
}

Kernel cell_average(const Kernel& k, int samples) {
  if (k.dimension() != 1) throw std::invalid_argument("cell averages are implemented for n = 1");
  if (!k.period()) throw std::invalid_argument(fmt::format("kernel '{}' is not periodic", k.name()));
  if (samples < 1) throw std::invalid_argument("cell average needs samples >= 1");
  const double P = *k.period();
  auto average = [P, samples](const std::function<double(const Point&)>& f) {
    std::vector<double> v(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) v[static_cast<std::size_t>(j)] = f(Point(P * j / samples));
    double s = 0.0;
    for (double x : v) s += x;
    return s / samples;
  };
  Kernel::Definition d;
  d.name = k.name() + "-bar";
  d.dimension = 1;
  d.weight = [k, average](const Point&, const Point& h) { return average([&](const Point& t) { return k(t, h); }); };
  d.radial_limit = [k, average](const Point&, const Point& w) {
    return average([&](const Point& t) { return k.radial_limit(t, w); });
  };
  if (k.has_tail_limit())
    d.tail_limit = [k, average](const Point&, const Point& w) {
      return average([&](const Point& t) { return k.tail_limit(t, w); });
    };
  d.bounds = k.bounds();
  d.traits.translation_invariant = true;
  d.traits.radially_constant = k.traits().radially_constant;
  bool even = true;
  for (double r : {1e-3, 0.1, 1.0, 7.0}) {
    const double a = d.weight(Point(), Point(r)), b = d.weight(Point(), Point(-r));
    even = even && std::abs(a - b) <= 1e-14 * std::abs(a);
  }
  d.traits.symmetric = even;
  return Kernel(std::move(d));
}

HypothesisReport verify_hypotheses(const Kernel& k, std::size_t sample_budget, std::uint64_t seed) {
  if (sample_budget < 1) throw std::invalid_argument("sample_budget must be >= 1");
  const int n = k.dimension();
  const auto [lo, hi] = k.bounds();
  const double tol = 1e-13 * std::max(1.0, hi);
  const auto samples = audit_samples(n, k.period(), sample_budget, seed);
  HypothesisReport rep;
  rep.samples = samples.size();

  auto record = [](HypothesisCheck& c, double violation, const Witness& w) {
    if (violation > c.max_violation) {
      c.max_violation = violation;
      c.witness = w;
    }
  };
  for (const auto& s : samples) {
    const Point h = s.r * s.omega;
    const double m = k(s.x, h);
    record(rep.bounds, std::max({lo - m, m - hi, 0.0}), {s.x, h, m, std::clamp(m, lo, hi)});
    const double mirrored = k(s.x - h, -h);
    record(rep.symmetry, std::abs(m - mirrored), {s.x, h, m, mirrored});
    const double a = k.radial_limit(s.x, s.omega);
    record(rep.limit_bounds, std::max({lo - a, a - hi, 0.0}), {s.x, Point(), a, std::clamp(a, lo, hi)});
    if (k.has_tail_limit()) {
      const double t = k.tail_limit(s.x, s.omega);
      record(rep.limit_bounds, std::max({lo - t, t - hi, 0.0}), {s.x, Point(), t, std::clamp(t, lo, hi)});
    }
  }
  rep.bounds.passes = rep.bounds.max_violation <= tol;
  rep.symmetry.passes = rep.symmetry.max_violation <= tol;
  rep.limit_bounds.passes = rep.limit_bounds.max_violation <= tol;

  // radial residual max_s |m(x, r w) - a(x, w)| at r = 10^(-4 + 3j/12)
  const std::size_t used = std::min<std::size_t>(samples.size(), 64);
  std::vector<double> lr, lres;
  for (int j = 0; j <= 12; ++j) {
    const double r = std::pow(10.0, -4.0 + 3.0 * j / 12.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
      const auto& s = samples[i];
      const double a = k.radial_limit(s.x, s.omega);
      const double m = k(s.x, r * s.omega);
      const double res = std::abs(m - a);
      if (res > worst) worst = res;
      if (res > rep.radial.max_violation) {
        rep.radial.max_violation = res;
        rep.radial.witness = Witness{s.x, r * s.omega, m, a};
      }
    }
    if (worst > 1e-300) {
      lr.push_back(std::log(r));
      lres.push_back(std::log(worst));
    }
  }
  rep.radial_residual = rep.radial.max_violation;
  if (lr.size() >= 2) {
    const double mx = std::accumulate(lr.begin(), lr.end(), 0.0) / static_cast<double>(lr.size());
    const double my = std::accumulate(lres.begin(), lres.end(), 0.0) / static_cast<double>(lres.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
      sxy += (lr[i] - mx) * (lres[i] - my);
      sxx += (lr[i] - mx) * (lr[i] - mx);
    }
    rep.radial_slope = sxy / sxx;
  }
  rep.radial.passes = rep.radial_residual < 1e-12 || rep.radial_slope >= 0.9;
  if (rep.radial.passes && rep.radial_residual < 1e-12) rep.radial.witness.reset();
  return rep;
}

Kernel matrix_kernel(int dimension, MatrixField M, double alpha, MatrixKernelOptions options) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw std::invalid_argument("matrix kernel exponent alpha must be nonzero");
  if (!(options.lambda > 0.0) || !(options.Lambda >= options.lambda))
    throw std::invalid_argument("matrix kernel needs 0 < lambda <= Lambda");
  if (!M) throw std::invalid_argument("matrix kernel needs a matrix field");
  const int n = dimension;

  bool symmetric = true;
  const auto samples = audit_samples(n, options.period, std::max<std::size_t>(options.audit_samples, 1), 0x5eed);
  auto check = [&](const Point& x, const Point& h) {
    const SmallMatrix A = M(x, h);
    if (A.rows() != n || A.cols() != n) throw std::invalid_argument("matrix field has the wrong shape");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("matrix field is not symmetric");
    Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(A);
    const double emin = eig.eigenvalues().minCoeff(), emax = eig.eigenvalues().maxCoeff();
    if (!(emin > 0.0)) throw std::invalid_argument("matrix field is not positive definite");
    if (emin < options.lambda * (1 - 1e-12) || emax > options.Lambda * (1 + 1e-12))
      throw std::invalid_argument(fmt::format("matrix field eigenvalues [{}, {}] exceed declared ellipticity [{}, {}]", emin,
                                              emax, options.lambda, options.Lambda));
  };
  for (const auto& s : samples) {
    const Point h = s.r * s.omega;
    check(s.x, h);
    check(s.x, Point());
    const SmallMatrix A = M(s.x, h), B = M(s.x - h, -h);
    symmetric = symmetric && (A - B).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, A.cwiseAbs().maxCoeff());
  }

  auto apply = [n, alpha](const SmallMatrix& A, const Point& w) {
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1> v(n);
    for (int i = 0; i < n; ++i) v(i) = w[static_cast<std::size_t>(i)];
    return std::pow((A * v).norm(), alpha);
  };
  Kernel::Definition d;
  d.name = "matrix-alpha";
  d.dimension = n;
  d.weight = [M, apply](const Point& x, const Point& h) { return apply(M(x, h), (1.0 / norm(h)) * h); };
  d.radial_limit = [M, apply](const Point& x, const Point& w) { return apply(M(x, Point()), w); };
  if (!options.depends_on_h) d.tail_limit = d.radial_limit;
  const double a = std::pow(options.lambda, alpha), b = std::pow(options.Lambda, alpha);
  d.bounds = {std::min(a, b), std::max(a, b)};
  d.period = options.period;
  d.traits.symmetric = symmetric;
  d.traits.radially_constant = !options.depends_on_h;
  d.traits.translation_invariant = !options.depends_on_x;
  return Kernel(std::move(d));
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"constant", "matrix-alpha", "periodic-1d", "separable-angular", "tabulated"};
  return names;
}

Kernel builtin(const std::string& name, const ParamMap& params) {
  if (name == "constant") {
    reject_unknown(name, params, {"c", "n"});
    const double c = param(params, "c", 1.0);
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("constant kernel needs c > 0");
    Kernel::Definition d;
    d.name = name;
    d.dimension = param_dimension(params, 1);
    d.weight = [c](const Point&, const Point&) { return c; };
    d.radial_limit = [c](const Point&, const Point&) { return c; };
    d.tail_limit = d.radial_limit;
    d.bounds = {c, c};
    d.traits = {true, true, true};
    return Kernel(std::move(d));
  }
  if (name == "periodic-1d") {
    reject_unknown(name, params, {"A0", "A1", "period"});
    const double A0 = param(params, "A0", 2.0), A1 = param(params, "A1", 1.0), P = param(params, "period", 1.0);
    if (!(A0 - std::abs(A1) > 0.0)) throw std::invalid_argument("periodic-1d kernel needs A0 > |A1|");
    if (!(P > 0.0)) throw std::invalid_argument("periodic-1d kernel needs period > 0");
    Kernel::Definition d;
    d.name = name;
    d.dimension = 1;
    d.weight = [=](const Point& x, const Point&) { return A0 + A1 * std::sin(2 * kPi * x[0] / P); };
    d.radial_limit = [=](const Point& x, const Point&) { return A0 + A1 * std::sin(2 * kPi * x[0] / P); };
    d.tail_limit = d.radial_limit;
    d.bounds = {A0 - std::abs(A1), A0 + std::abs(A1)};
    d.period = P;
    d.traits.radially_constant = true;
    d.traits.translation_invariant = A1 == 0.0;
    d.traits.symmetric = A1 == 0.0;
    return Kernel(std::move(d));
  }
  if (name == "separable-angular") {
    reject_unknown(name, params, {"n", "a0", "a2", "theta"});
    const int n = param_dimension(params, 2);
    const double a0 = param(params, "a0", 1.0), a2 = param(params, "a2", 0.5), th = param(params, "theta", 0.0);
    const double lo = std::min(a0, a0 + a2), hi = std::max(a0, a0 + a2);
    if (!(lo > 0.0)) throw std::invalid_argument("separable-angular kernel needs a0 > 0 and a0 + a2 > 0");
    const Point e = n == 1 ? Point(1.0) : Point(std::cos(th), std::sin(th));
    auto angular = [=](const Point& w) {
      const double c = dot(w, e) / norm(w);
      return a0 + a2 * c * c;
    };
    Kernel::Definition d;
    d.name = name;
    d.dimension = n;
    d.weight = [angular](const Point&, const Point& h) { return angular(h); };
    d.radial_limit = [angular](const Point&, const Point& w) { return angular(w); };
    d.tail_limit = d.radial_limit;
    d.bounds = {lo, hi};
    d.traits = {true, true, true};
    return Kernel(std::move(d));
  }
  if (name == "matrix-alpha") {
    reject_unknown(name, params, {"n", "alpha", "M", "M11", "M12", "M22"});
    const int n = param_dimension(params, params.count("M11") ? 2 : 1);
    const double alpha = param(params, "alpha", 1.0);
    SmallMatrix A(n, n);
    if (n == 1) {
      A(0, 0) = param(params, "M", 1.0);
    } else if (n == 2) {
      A << param(params, "M11", 1.0), param(params, "M12", 0.0), param(params, "M12", 0.0), param(params, "M22", 1.0);
    } else {
      A.setIdentity();
    }
    Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(A);
    const double emin = eig.eigenvalues().minCoeff(), emax = eig.eigenvalues().maxCoeff();
    if (!(emin > 0.0)) throw std::invalid_argument("matrix-alpha kernel needs a positive definite M");
    MatrixKernelOptions opt;
    opt.lambda = emin;
    opt.Lambda = emax;
    opt.depends_on_h = false;
    opt.depends_on_x = false;
    return matrix_kernel(n, [A](const Point&, const Point&) { return A; }, alpha, opt);
  }
  if (name == "tabulated") {
    reject_unknown(name, params, {"table"});
    auto it = params.find("table");
    if (it == params.end() || !std::holds_alternative<std::string>(it->second))
      throw std::invalid_argument("tabulated kernel needs a 'table' path");
    return tabulated(read_table(std::get<std::string>(it->second)));
  }
  throw std::invalid_argument(fmt::format("unknown kernel '{}'", name));
}

}  // namespace anisofrac
