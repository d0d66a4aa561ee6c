#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "anisofrac/point.hpp"

namespace anisofrac {

struct KernelBounds {
  double lower = 1.0;
  double upper = 1.0;
};

struct KernelTraits {
  bool symmetric = false;         // m(x,h) == m(x-h,-h) by construction
  bool radially_constant = false; // m(x, r w) does not depend on r
  bool translation_invariant = false; // m(x,h) does not depend on x
};

// Thrown when an operation needs m_infinity and the kernel does not declare it.
class MissingTailLimit : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Two-point weight m(x,h) with its declared bounds, radial limit a(x,w) and
// optional tail limit. Immutable and cheap to copy.
class Kernel {
 public:
  using Weight = std::function<double(const Point& x, const Point& h)>;
  using Angular = std::function<double(const Point& x, const Point& omega)>;

  struct Definition {
    std::string name;
    int dimension = 1;
    Weight weight;
    KernelBounds bounds;
    Angular radial_limit;
    Angular tail_limit;           // empty when undeclared
    std::optional<double> period; // cell side length when periodic in x
    KernelTraits traits;
  };

  explicit Kernel(Definition definition);

  [[nodiscard]] double operator()(const Point& x, const Point& h) const { return def_->weight(x, h); }
  [[nodiscard]] double radial_limit(const Point& x, const Point& omega) const { return def_->radial_limit(x, omega); }
  [[nodiscard]] bool has_tail_limit() const { return static_cast<bool>(def_->tail_limit); }
  [[nodiscard]] double tail_limit(const Point& x, const Point& omega) const;

  [[nodiscard]] const std::string& name() const { return def_->name; }
  [[nodiscard]] int dimension() const { return def_->dimension; }
  [[nodiscard]] KernelBounds bounds() const { return def_->bounds; }
  [[nodiscard]] std::optional<double> period() const { return def_->period; }
  [[nodiscard]] KernelTraits traits() const { return def_->traits; }
  [[nodiscard]] const Definition& definition() const { return *def_; }

 private:
  std::shared_ptr<const Definition> def_;
};

// m_sym(x,h) = (m(x,h) + m(x-h,-h)) / 2. The radial limit of the mirrored term
// is taken as a(x,-w), which assumes m is continuous in x.
[[nodiscard]] Kernel symmetrize(const Kernel& k);

// x -> x / eps rescaling of a periodic kernel; period becomes eps * period.
[[nodiscard]] Kernel oscillating(const Kernel& k, double eps);

// Cell average over x of a 1D periodic kernel; the result no longer depends on x.
[[nodiscard]] Kernel cell_average(const Kernel& k, int samples = 256);

struct Witness {
  Point x;
  Point h;
  double value = 0.0;
  double expected = 0.0;
};

struct HypothesisCheck {
  double max_violation = 0.0;
  bool passes = true;
  std::optional<Witness> witness;
};

struct HypothesisReport {
  HypothesisCheck bounds;        // m_- <= m <= m_+
  HypothesisCheck symmetry;      // m(x,h) = m(x-h,-h)
  HypothesisCheck radial;        // |m(x,rw) - a(x,w)| = O(r)
  HypothesisCheck limit_bounds;  // a and m_inf inside [m_-, m_+]
  double radial_slope = 0.0;     // log-log slope of the radial residual
  double radial_residual = 0.0;  // largest residual over r in [1e-4, 1e-1]
  std::size_t samples = 0;
  [[nodiscard]] bool passes() const {
    return bounds.passes && symmetry.passes && radial.passes && limit_bounds.passes;
  }
};

// Quasi-random audit (Halton points with a seeded rotation).
[[nodiscard]] HypothesisReport verify_hypotheses(const Kernel& k, std::size_t sample_budget,
                                                 std::uint64_t seed = 0);

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using MatrixField = std::function<SmallMatrix(const Point& x, const Point& h)>;

struct MatrixKernelOptions {
  double lambda = 1.0;           // declared ellipticity lower bound
  double Lambda = 1.0;           // declared ellipticity upper bound
  bool depends_on_h = true;      // false: M(x,h) = M(x), kernel is radially constant
  bool depends_on_x = true;
  std::optional<double> period;
  std::size_t audit_samples = 64;
};

// m(x,h) = |M(x,h) h/|h||^alpha, a(x,w) = |M(x,0) w|^alpha.
[[nodiscard]] Kernel matrix_kernel(int dimension, MatrixField M, double alpha, MatrixKernelOptions options);

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

// Registry: constant, matrix-alpha, periodic-1d, separable-angular, tabulated.
[[nodiscard]] Kernel builtin(const std::string& name, const ParamMap& params);
[[nodiscard]] const std::vector<std::string>& builtin_names();

}  // namespace anisofrac
