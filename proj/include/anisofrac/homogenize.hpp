#pragma once

#include <functional>
#include <string>
#include <vector>

#include "anisofrac/variational.hpp"

namespace anisofrac {

// A(y) on the unit cell, so that A(y, xi) = A(y) |xi|^p.
struct PeriodicCoefficient {
  std::function<double(double)> A;
  double p = 2.0;
};

// A(y) = (a(y,-1) + a(y,1)) / p for a 1D kernel whose period divides 1.
[[nodiscard]] PeriodicCoefficient coefficient_from_kernel(const Kernel& k, double p);

// min over periodic v of int_0^1 A(y) |xi + v'(y)|^p dy on N cells.
[[nodiscard]] double cell_problem_1d(const PeriodicCoefficient& c, double xi, int N = 512,
                                     const SolverSettings& settings = {});

struct StarReport {
  double oracle = 0.0;             // cell-problem value at xi = 1
  double formula_printed = 0.0;    // (int A^{-1/(p-1)})^{-1/(p-1)}
  double formula_classical = 0.0;  // (int A^{-1/(p-1)})^{-(p-1)}
  double discrepancy = 0.0;        // |formula_printed - oracle|
  std::string matches;             // "both", "printed", "classical" or "neither"
};

[[nodiscard]] StarReport effective_star_report(const PeriodicCoefficient& c, int N = 512);
// The oracle value of effective_star_report.
[[nodiscard]] double effective_star(const PeriodicCoefficient& c, int N = 512);
// int_0^1 A(t) dt
[[nodiscard]] double effective_bar(const PeriodicCoefficient& c);
[[nodiscard]] double effective_bar(const Kernel& k, double p);

struct EffectiveCoefficients {
  double A_star = 0.0;
  double A_bar = 0.0;
  double gap = 0.0;  // A_bar - A_star
};
[[nodiscard]] EffectiveCoefficients effective_coefficients(const PeriodicCoefficient& c, int N = 512);

struct CommuteRow {
  std::string kind;  // "nonlocal", "local-limit", "averaged"
  double eps = 0.0;  // 0 for the averaged kernel
  double s = 1.0;    // 1 for the local limit
  double rel_dist_u_star = 0.0;
  double rel_dist_u_bar = 0.0;
};

struct CommuteReport {
  double A_star = 0.0;
  double A_bar = 0.0;
  GridFunction u_star;
  GridFunction u_bar;
  double distance = 0.0;       // ||u_star - u_bar||_p
  double path_i_error = 0.0;   // ||u_{s_max, eps_min} - u_star|| / ||u_star||
  double path_ii_error = 0.0;  // ||u^bar_{s_max} - u_bar|| / ||u_bar||
  std::vector<CommuteRow> rows;
};

[[nodiscard]] CommuteReport commute_experiment(const Kernel& k, double p, const GridFunction& f,
                                               const std::vector<double>& eps_list, std::vector<double> s_list = {},
                                               const SolverSettings& settings = {});

void write_csv(const CommuteReport& report, std::ostream& out);

}  // namespace anisofrac
