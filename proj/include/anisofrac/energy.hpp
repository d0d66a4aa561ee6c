#pragma once

#include <cmath>

#include "anisofrac/grid.hpp"
#include "anisofrac/kernel.hpp"
#include "anisofrac/power_sum.hpp"

namespace anisofrac {

// Zero fields are filled from the grid by resolve().
struct QuadratureSettings {
  double h_min = 0.0;    // near-diagonal radius; default grid spacing / 8
  double h_split = 0.0;  // beyond this radius no pair has both points in the box; box diameter
  double h_max = 0.0;    // start of the analytic/substituted tail; default 2 x box diameter
  int points = 3;        // Gauss points per radial panel
  double ratio = 1.0905077326652577;  // 2^(1/8)
  int angles = 64;       // circle rule size for n = 2
  bool estimate_error = true;
};

[[nodiscard]] QuadratureSettings resolve(const QuadratureSettings& s, const Grid& grid);

struct EnergyReport {
  double value = 0.0;  // near_diagonal + bulk + tail
  double near_diagonal = 0.0;
  double bulk = 0.0;
  double tail = 0.0;
  double error_bound = 0.0;
  QuadratureSettings quadrature;
};

// Raw double integral  I_m(u) = iint m(x,h) |u(x) - u(x-h)|^p / |h|^{n+sp}.
[[nodiscard]] EnergyReport interaction_integral(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                                const QuadratureSettings& settings = {});
// [u]_{s,p}^p
[[nodiscard]] EnergyReport gagliardo(const GridFunction& u, FractionalParams fp, const QuadratureSettings& settings = {});
// J_{m,s}(u) = (1-s)/p * I_m(u)
[[nodiscard]] EnergyReport anisotropic_energy(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                              const QuadratureSettings& settings = {});

// The same quadrature as interaction_integral written as sum_q W_q |l_q . u|^p
// over all grid nodes (boundary nodes included).
[[nodiscard]] PowerSum energy_power_sum(const Kernel& k, const Grid& grid, FractionalParams fp,
                                        const QuadratureSettings& settings = {});

struct InequalityCheck {
  bool passes = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;      // rhs - lhs
  double tolerance = 0.0;  // quadrature allowance added to rhs
};

// p/(1-s) J <= m+ [u]^p <= (n w_n m+/p) (||grad u||^p/(1-s) + 2^p ||u||^p/s)
// lhs and rhs are the outer terms; both steps must hold up to the quadrature allowance.
[[nodiscard]] InequalityCheck bbm_upper_bound_check(const Kernel& k, const GridFunction& u, FractionalParams fp,
                                                    const QuadratureSettings& settings = {});

// J_{s1} <= 2^{p(1-s1)} J_{s2} + 2^{p-1} m+ n w_n (1-s1)/s1 ||u||^p
[[nodiscard]] InequalityCheck interpolation_check(const Kernel& k, const GridFunction& u, double s1, double s2, double p,
                                                  const QuadratureSettings& settings = {});

}  // namespace anisofrac
