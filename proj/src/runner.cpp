#include "anisofrac/runner.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

#include "anisofrac/energy.hpp"
#include "anisofrac/expression.hpp"
#include "anisofrac/homogenize.hpp"
#include "anisofrac/limits.hpp"
#include "anisofrac/variational.hpp"

namespace anisofrac {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"energy",   "bbm-sweep",  "ms-sweep", "solve-nonlocal", "solve-local",
                                              "localize", "homogenize", "commute",  "verify-kernel"};
  return names;
}

void write_atomically(const std::string& path, const std::function<void(std::ostream&)>& body) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += fmt::format(".tmp.{}", ::getpid());
  try {
    {
      std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
      body(file);
      file.flush();
      if (!file) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

namespace {

std::string g(double v) { return format_number(v); }

Grid make_grid(const ExperimentConfig& c) {
  std::vector<double> box = c.box;
  if (box.empty())
    for (int k = 0; k < c.n; ++k) box.insert(box.end(), {-1.0, 1.0});
  return Grid(c.n, box, c.N);
}

Kernel make_kernel(const ExperimentConfig& c) {
  ParamMap params = c.kernel_params;
  if (!c.kernel_table.empty()) params["table"] = c.kernel_table;
  return builtin(c.kernel_name, params);
}

SolverSettings solver_settings(const ExperimentConfig& c) {
  SolverSettings s;
  s.tolerance = c.tol;
  s.max_iterations = c.max_iter;
  s.method = c.method == "direct"   ? SolverMethod::direct
             : c.method == "newton" ? SolverMethod::newton
             : c.method == "cg"     ? SolverMethod::conjugate_gradient
                                    : SolverMethod::automatic;
  s.quadrature.angles = c.angles;
  return s;
}

GridFunction sample(const Grid& grid, const std::string& text) {
  const Expression e = Expression::parse(text);
  return GridFunction::sample(grid, [&](const Point& x) { return e(x); });
}

struct Output {
  std::string summary;
  std::function<void(std::ostream&)> csv;
  int status = kOk;
};

Output energy(const ExperimentConfig& c) {
  const Kernel k = make_kernel(c);
  const Grid grid = make_grid(c);
  QuadratureSettings q;
  q.angles = c.angles;
  const EnergyReport r = anisotropic_energy(k, sample(grid, c.u), FractionalParams(c.s, c.p), q);
  Output o;
  o.summary = fmt::format("energy kernel={} s={} p={} value={} error_bound={}", k.name(), g(c.s), g(c.p), g(r.value),
                          g(r.error_bound));
  o.csv = [r, c](std::ostream& out) {
    out << "value,error_bound,h_min,h_split,h_max,points" << (c.breakdown ? ",near_diagonal,bulk,tail" : "") << '\n';
    out << g(r.value) << ',' << g(r.error_bound) << ',' << g(r.quadrature.h_min) << ',' << g(r.quadrature.h_split) << ','
        << g(r.quadrature.h_max) << ',' << r.quadrature.points;
    if (c.breakdown) out << ',' << g(r.near_diagonal) << ',' << g(r.bulk) << ',' << g(r.tail);
    out << '\n';
  };
  return o;
}

Output table_output(const std::string& name, const ConvergenceTable& t) {
  Output o;
  o.summary = fmt::format("{} rows={} extrapolated={} reference={} rel_error={} method=\"{}\"", name, t.rows.size(),
                          t.extrapolated() ? g(*t.extrapolated()) : "-", t.rows.empty() ? "-" : g(t.rows.back().reference),
                          t.final_rel_error() ? g(*t.final_rel_error()) : "-", t.method);
  o.csv = [t](std::ostream& out) { write_csv(t, out); };
  return o;
}

Output solve_output(const std::string& name, const SolveResult& r) {
  Output o;
  o.summary = fmt::format("{} objective={} residual={} iterations={} converged={}", name, g(r.objective), g(r.residual),
                          r.iterations, r.converged ? "true" : "false");
  o.csv = [u = r.minimizer](std::ostream& out) { write_csv(u, out); };
  o.status = r.converged ? kOk : kNonConvergence;
  return o;
}

Output verify(const ExperimentConfig& c) {
  const Kernel k = make_kernel(c);
  const HypothesisReport r = verify_hypotheses(k, static_cast<std::size_t>(c.sample_budget), c.seed);
  Output o;
  o.summary = fmt::format("verify-kernel kernel={} samples={} passes={} radial_slope={} radial_residual={}", k.name(),
                          r.samples, r.passes() ? "true" : "false", g(r.radial_slope), g(r.radial_residual));
  o.csv = [r](std::ostream& out) {
    out << "hypothesis,max_violation,passes,witness_x,witness_h,witness_value,witness_expected\n";
    auto row = [&](const char* name, const HypothesisCheck& h) {
      out << name << ',' << g(h.max_violation) << ',' << (h.passes ? "true" : "false");
      if (h.witness) {
        auto pt = [](const Point& p) { return fmt::format("{} {} {}", g(p[0]), g(p[1]), g(p[2])); };
        out << ',' << pt(h.witness->x) << ',' << pt(h.witness->h) << ',' << g(h.witness->value) << ','
            << g(h.witness->expected);
      } else {
        out << ",,,,";
      }
      out << '\n';
    };
    row("bounds", r.bounds);
    row("symmetry", r.symmetry);
    row("radial", r.radial);
    row("limit_bounds", r.limit_bounds);
  };
  return o;
}

Output dispatch(const ExperimentConfig& c) {
  const std::string& cmd = c.subcommand;
  if (cmd == "energy") return energy(c);
  if (cmd == "verify-kernel") return verify(c);
  if (cmd == "homogenize") {
    const PeriodicCoefficient coef = coefficient_from_kernel(make_kernel(c), c.p);
    const StarReport star = effective_star_report(coef, c.cell_N);
    const double bar = effective_bar(coef);
    Output o;
    o.summary = fmt::format("homogenize A_star={} A_star_formula={} A_bar={} gap={} formula_matches={}", g(star.oracle),
                            g(star.formula_printed), g(bar), g(bar - star.oracle), star.matches);
    o.csv = [star, bar](std::ostream& out) {
      out << "A_star_formula,A_star_oracle,A_bar,gap\n"
          << g(star.formula_printed) << ',' << g(star.oracle) << ',' << g(bar) << ',' << g(bar - star.oracle) << '\n';
    };
    return o;
  }

  const Kernel k = make_kernel(c);
  const Grid grid = make_grid(c);
  if (cmd == "bbm-sweep") return table_output(cmd, bbm_sweep(k, sample(grid, c.u), c.p, c.s_list));
  if (cmd == "ms-sweep") return table_output(cmd, ms_sweep(k, sample(grid, c.u), c.p, c.s_list));
  const SolverSettings settings = solver_settings(c);
  const GridFunction f = sample(grid, c.f);
  if (cmd == "solve-nonlocal") return solve_output(cmd, solve_nonlocal({k, FractionalParams(c.s, c.p), f, settings}));
  if (cmd == "solve-local") return solve_output(cmd, solve_local({LimitDensity(k, c.p), c.p, f, settings}));
  if (cmd == "localize") {
    Output o = table_output(cmd, localization_sweep(k, c.p, f, c.s_list, settings));
    return o;
  }
  if (cmd == "commute") {
    const std::vector<double> eps = c.eps_list.empty() ? std::vector<double>{0.25, 0.125, 0.0625} : c.eps_list;
    const CommuteReport r = commute_experiment(k, c.p, f, eps, c.s_list, settings);
    Output o;
    o.summary = fmt::format("commute A_star={} A_bar={} distance={} path_i_error={} path_ii_error={}", g(r.A_star),
                            g(r.A_bar), g(r.distance), g(r.path_i_error), g(r.path_ii_error));
    o.csv = [r](std::ostream& out) { write_csv(r, out); };
    return o;
  }
  throw std::invalid_argument(fmt::format("unknown subcommand '{}'", cmd));
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  Output o;
  try {
    if (auto issues = validate(config); !issues.empty()) throw ConfigError(std::move(issues));
    o = dispatch(config);
  } catch (const SolverDidNotConverge& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const MissingTailLimit& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  if (config.output_path.empty()) {
    out << o.summary << '\n';
    o.csv(out);
  } else {
    write_atomically(config.output_path, o.csv);
    out << o.summary << '\n';
  }
  return o.status;
}

}  // namespace anisofrac
