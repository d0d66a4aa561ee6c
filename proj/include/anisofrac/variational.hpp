#pragma once

#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "anisofrac/energy.hpp"
#include "anisofrac/limits.hpp"
#include "anisofrac/power_sum.hpp"

namespace anisofrac {

enum class SolverMethod {
  automatic,          // direct for p = 2, Newton otherwise
  direct,             // one linear solve, p = 2 only
  newton,             // damped Newton with backtracking
  conjugate_gradient  // Polak-Ribiere with a Newton line search
};

struct SolverSettings {
  double tolerance = 0.0;  // 0: 1e-8 (1 + ||f||_inf)
  int max_iterations = 10000;
  SolverMethod method = SolverMethod::automatic;
  std::vector<double> initial;  // start values on all grid nodes; empty means zero
  QuadratureSettings quadrature;
};

struct SolveResult {
  GridFunction minimizer;
  double objective = 0.0;
  double residual = 0.0;  // sup norm of the discrete gradient of the objective
  double tolerance = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after every accepted iterate
};

class SolverDidNotConverge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Phi(v) = sum_q W_q |l_q.v + c_q|^p - load.v
struct ConvexObjective {
  PowerSum sum;
  double p = 2.0;
  std::vector<double> load;

  [[nodiscard]] double value(std::span<const double> v) const;
  // value(v + d) - value(v)
  [[nodiscard]] double change(std::span<const double> v, std::span<const double> d) const;
  void gradient(std::span<const double> v, std::span<double> out) const;
};

struct MinimizeResult {
  std::vector<double> x;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

[[nodiscard]] MinimizeResult minimize(const ConvexObjective& objective, std::vector<double> x0, double tolerance,
                                      int max_iterations, SolverMethod method, bool sparse);

struct NonlocalProblem {
  Kernel kernel;
  FractionalParams fp;
  GridFunction source;
  SolverSettings settings;
};

using ScalarCoefficient = std::function<double(const Point&)>;

struct LocalProblem {
  std::variant<LimitDensity, ScalarCoefficient> coefficient;  // scalar c means A(x, xi) = c(x) |xi|^p
  double p = 2.0;
  GridFunction source;
  SolverSettings settings;
};

// Minimises (1-s) I_m(v) - int f v over v vanishing on the boundary.
[[nodiscard]] SolveResult solve_nonlocal(const NonlocalProblem& problem);
// Minimises int A(x, grad v) - int f v.
[[nodiscard]] SolveResult solve_local(const LocalProblem& problem);

// The objective assembled by solve_nonlocal, on interior unknowns.
[[nodiscard]] ConvexObjective nonlocal_objective(const NonlocalProblem& problem);
[[nodiscard]] ConvexObjective local_objective(const LocalProblem& problem);

// Rows (s, ||u_s - u||_p, -, 0, ||u_s - u||_p / ||u||_p) with u the local solution.
[[nodiscard]] ConvergenceTable localization_sweep(const Kernel& k, double p, const GridFunction& f,
                                                  std::vector<double> s_list = {}, const SolverSettings& settings = {});

// Last three rows non-increasing up to a relative noise allowance.
[[nodiscard]] bool tail_decreasing(const ConvergenceTable& table, double noise = 0.05);

}  // namespace anisofrac
