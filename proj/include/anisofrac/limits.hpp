#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anisofrac/energy.hpp"
#include "anisofrac/kernel.hpp"
#include "anisofrac/quadrature.hpp"

namespace anisofrac {

// A(x, xi) = (1/p) int_{S^{n-1}} a(x,w) |xi.w|^p dH^{n-1}
class LimitDensity {
 public:
  LimitDensity(Kernel k, double p, int resolution = 0);

  [[nodiscard]] double operator()(const Point& x, const Point& xi) const;
  [[nodiscard]] const Kernel& kernel() const { return k_; }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] int dimension() const { return k_.dimension(); }
  [[nodiscard]] const SphereRule& sphere() const { return rule_; }

 private:
  Kernel k_;
  double p_;
  SphereRule rule_;
};

[[nodiscard]] double limit_density(const LimitDensity& ld, const Point& x, const Point& xi);
// a_ij(x) = (1/2) int w_i w_j a(x,w); only for p = 2.
[[nodiscard]] SmallMatrix limit_matrix(const LimitDensity& ld, const Point& x);

// K_{p,n} = (1/p) int |w_1|^p
[[nodiscard]] double bbm_constant(double p, int n);
// C_{p,n} = 4 pi^{n/2} / (p Gamma(n/2))
[[nodiscard]] double ms_constant(double p, int n);

struct WeightInterval {
  double lo = 0.0;
  double hi = 0.0;
  double estimate = 0.0;
};

// b_s(x) = 2s int_S int_{2|x|}^inf m(x, r w) r^{-1-sp} dr dH, finite part up to r_cut
// by quadrature and the rest bracketed by the kernel bounds.
[[nodiscard]] WeightInterval ms_weight(const Kernel& k, const Point& x, FractionalParams fp, double r_cut);
// b(x) = (2/p) int_S m_inf(x,w) dH; throws MissingTailLimit.
[[nodiscard]] double ms_weight_limit(const Kernel& k, const Point& x, double p);
// Richardson extrapolation of ms_weight(...).estimate to s = 0.
[[nodiscard]] double ms_weight_extrapolated(const Kernel& k, const Point& x, double p,
                                            const std::vector<double>& s_list = {0.2, 0.1, 0.05});

struct ConvergenceRow {
  double param = 0.0;
  double value = 0.0;
  std::optional<double> extrapolated;
  double reference = 0.0;
  std::optional<double> rel_error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::string method;
  [[nodiscard]] std::optional<double> extrapolated() const;
  [[nodiscard]] std::optional<double> final_rel_error() const;
};

void write_csv(const ConvergenceTable& table, std::ostream& out);

// |x - ref| / |ref|, or |x - ref| when ref = 0.
[[nodiscard]] double relative_error(double x, double ref);

// Rows (s, (1-s) I_m(u), extrapolated in 1-s, int A(x, grad u), rel. error).
[[nodiscard]] ConvergenceTable bbm_sweep(const Kernel& k, const GridFunction& u, double p, std::vector<double> s_list = {},
                                         const QuadratureSettings& settings = {});
// Rows (s, s I_m(u), extrapolated in s, int |u|^p b, rel. error).
[[nodiscard]] ConvergenceTable ms_sweep(const Kernel& k, const GridFunction& u, double p, std::vector<double> s_list = {},
                                        const QuadratureSettings& settings = {});

[[nodiscard]] std::vector<double> default_bbm_s_list();
[[nodiscard]] std::vector<double> default_ms_s_list();

}  // namespace anisofrac
