#include "anisofrac/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace anisofrac {

namespace {

GaussRule build_gauss(int order) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 256) throw std::invalid_argument("Gauss order must lie in [1, 256]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss(order)).first;
  return it->second;
}

std::vector<RadialNode> geometric_ladder(double begin, double end, double ratio, int order,
                                         double max_panel) {
  if (!(begin > 0.0) || !(ratio > 1.0)) throw std::invalid_argument("geometric ladder needs begin > 0, ratio > 1");
  std::vector<RadialNode> out;
  if (!(end > begin)) return out;
  const GaussRule& g = gauss_legendre(order);
  double a = begin;
  while (a < end) {
    double b = std::min(a * ratio, end);
    // avoid a sliver panel at the end
    if (b < end && end < b * (1.0 + 1e-3)) b = end;
    const int pieces = std::isfinite(max_panel) ? std::max(1, static_cast<int>(std::ceil((b - a) / max_panel))) : 1;
    for (int j = 0; j < pieces; ++j) {
      const double lo = a + (b - a) * j / pieces;
      const double hi = (j + 1 == pieces) ? b : a + (b - a) * (j + 1) / pieces;
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t q = 0; q < g.nodes.size(); ++q) out.push_back({mid + half * g.nodes[q], half * g.weights[q]});
    }
    a = b;
  }
  return out;
}

SphereRule sphere_rule(int dimension, int resolution) {
  SphereRule rule;
  rule.dimension = dimension;
  switch (dimension) {
    case 1:
      rule.directions = {Point(1.0), Point(-1.0)};
      rule.weights = {1.0, 1.0};
      break;
    case 2: {
      const int m = resolution > 0 ? resolution : 256;
      for (int j = 0; j < m; ++j) {
        const double t = 2.0 * std::numbers::pi * j / m;
        rule.directions.emplace_back(std::cos(t), std::sin(t));
        rule.weights.push_back(2.0 * std::numbers::pi / m);
      }
      break;
    }
    case 3: {
      const int nt = resolution > 0 ? resolution : 32;
      const int nphi = 2 * nt;
      const GaussRule& g = gauss_legendre(nt);
      for (int i = 0; i < nt; ++i) {
        const double z = g.nodes[static_cast<std::size_t>(i)];
        const double rho = std::sqrt(1.0 - z * z);
        for (int j = 0; j < nphi; ++j) {
          const double phi = 2.0 * std::numbers::pi * j / nphi;
          rule.directions.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
          rule.weights.push_back(g.weights[static_cast<std::size_t>(i)] * 2.0 * std::numbers::pi / nphi);
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("sphere rules exist for n in {1,2,3}");
  }
  return rule;
}

double sphere_measure(int dimension) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  const double n = dimension;
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

}  // namespace anisofrac
