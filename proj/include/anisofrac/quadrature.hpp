#pragma once

#include <limits>
#include <vector>

#include "anisofrac/point.hpp"

namespace anisofrac {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
[[nodiscard]] const GaussRule& gauss_legendre(int order);

struct RadialNode {
  double r;
  double weight;
};

// Panels [a rho^k, a rho^(k+1)] covering [begin, end], each with `order` Gauss points.
// Panels wider than max_panel are split uniformly.
[[nodiscard]] std::vector<RadialNode> geometric_ladder(
    double begin, double end, double ratio, int order,
    double max_panel = std::numeric_limits<double>::infinity());

// Quadrature on the unit sphere S^{n-1}.
//   n = 1: {-1, +1} with unit weights
//   n = 2: `resolution` equally spaced angles (default 256)
//   n = 3: 32 Gauss nodes in cos(theta) times 64 uniform azimuths
struct SphereRule {
  int dimension = 1;
  std::vector<Point> directions;
  std::vector<double> weights;
};
[[nodiscard]] SphereRule sphere_rule(int dimension, int resolution = 0);

// |S^{n-1}| = n omega_n = 2 pi^{n/2} / Gamma(n/2)
[[nodiscard]] double sphere_measure(int dimension);

}  // namespace anisofrac
