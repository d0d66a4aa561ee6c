#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace anisofrac {

// Linear form with at most five nonzero coefficients.
struct SparseForm {
  static constexpr std::size_t capacity = 5;
  std::uint8_t size = 0;
  std::array<std::uint32_t, capacity> index{};
  std::array<double, capacity> coef{};

  void add(std::uint32_t i, double c);  // merges repeated indices
  [[nodiscard]] double apply(std::span<const double> v) const {
    double t = 0.0;
    for (std::uint8_t j = 0; j < size; ++j) t += coef[j] * v[index[j]];
    return t;
  }
};

struct PowerTerm {
  double weight;
  SparseForm form;
  double offset = 0.0;
};

// F(v) = sum_q W_q |l_q . v + c_q|^p, a convex function for p >= 1.
class PowerSum {
 public:
  explicit PowerSum(std::size_t dimension = 0) : dimension_(dimension) {}

  void add(double weight, const SparseForm& form, double offset = 0.0);
  // Keeps only variables with map[i] >= 0, renumbered to map[i]; other entries are
  // treated as fixed zeros.
  [[nodiscard]] PowerSum restrict(const std::vector<std::int64_t>& map, std::size_t new_dimension) const;

  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const std::vector<PowerTerm>& terms() const { return terms_; }

  [[nodiscard]] double value(std::span<const double> v, double p) const;
  // value(v + d) - value(v), summed term by term so that changes far below the value survive.
  [[nodiscard]] double change(std::span<const double> v, std::span<const double> d, double p) const;
  void gradient(std::span<const double> v, double p, std::span<double> out) const;
  // phi(t) = F(v + t d): returns {phi'(0), phi''(0)} with |.|^{p-2} floored at delta.
  [[nodiscard]] std::pair<double, double> directional(std::span<const double> v, std::span<const double> d, double p,
                                                      double delta) const;
  // Hessian with |l.v + c|^{p-2} replaced by max(|l.v + c|, delta)^{p-2}. With majorant the factor
  // p-1 is dropped; for p < 2 the quadratic model then lies above the sum.
  [[nodiscard]] Eigen::MatrixXd dense_hessian(std::span<const double> v, double p, double delta,
                                              bool majorant = false) const;
  [[nodiscard]] Eigen::SparseMatrix<double> sparse_hessian(std::span<const double> v, double p, double delta,
                                                           bool majorant = false) const;
  // Largest |l.v + c| over all terms.
  [[nodiscard]] double max_argument(std::span<const double> v) const;

 private:
  template <class F>
  void for_each_curvature(std::span<const double> v, double p, double delta, bool majorant, F&& f) const;

  std::size_t dimension_;
  std::vector<PowerTerm> terms_;
};

}  // namespace anisofrac
