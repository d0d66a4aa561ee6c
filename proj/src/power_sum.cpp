#include "anisofrac/power_sum.hpp"

#include <cmath>
#include <stdexcept>

#include "anisofrac/parallel.hpp"

namespace anisofrac {

namespace {
constexpr std::size_t kBlock = 4096;

inline double abs_pow(double t, double p) {
  const double a = std::abs(t);
  return p == 2.0 ? a * a : std::pow(a, p);
}

// |a + e|^p - |a|^p without cancellation
inline double abs_pow_change(double a, double e, double p) {
  if (e == 0.0) return 0.0;
  if (p == 2.0) return e * (2.0 * a + e);
  const double b = a + e;
  if (a != 0.0 && b != 0.0 && (a > 0.0) == (b > 0.0)) return std::pow(std::abs(a), p) * std::expm1(p * std::log1p(e / a));
  return abs_pow(b, p) - abs_pow(a, p);
}
}  // namespace

void SparseForm::add(std::uint32_t i, double c) {
  for (std::uint8_t j = 0; j < size; ++j)
    if (index[j] == i) {
      coef[j] += c;
      return;
    }
  if (size == capacity) throw std::length_error("sparse form is full");
  index[size] = i;
  coef[size] = c;
  ++size;
}

void PowerSum::add(double weight, const SparseForm& form, double offset) {
  if (weight == 0.0) return;
  if (form.size == 0 && offset == 0.0) return;
  terms_.push_back({weight, form, offset});
}

PowerSum PowerSum::restrict(const std::vector<std::int64_t>& map, std::size_t new_dimension) const {
  PowerSum out(new_dimension);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    SparseForm f;
    for (std::uint8_t j = 0; j < t.form.size; ++j) {
      const auto m = map.at(t.form.index[j]);
      if (m >= 0) f.add(static_cast<std::uint32_t>(m), t.form.coef[j]);
    }
    out.add(t.weight, f, t.offset);
  }
  return out;
}

double PowerSum::value(std::span<const double> v, double p) const {
  const std::size_t blocks = (terms_.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b) {
    double s = 0.0;
    const std::size_t end = std::min(terms_.size(), (b + 1) * kBlock);
    for (std::size_t q = b * kBlock; q < end; ++q) {
      const auto& t = terms_[q];
      s += t.weight * abs_pow(t.form.apply(v) + t.offset, p);
    }
    partial[b] = s;
  });
  return pairwise_sum(partial);
}

double PowerSum::change(std::span<const double> v, std::span<const double> d, double p) const {
  const std::size_t blocks = (terms_.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b) {
    double s = 0.0;
    const std::size_t end = std::min(terms_.size(), (b + 1) * kBlock);
    for (std::size_t q = b * kBlock; q < end; ++q) {
      const auto& t = terms_[q];
      s += t.weight * abs_pow_change(t.form.apply(v) + t.offset, t.form.apply(d), p);
    }
    partial[b] = s;
  });
  return pairwise_sum(partial);
}

void PowerSum::gradient(std::span<const double> v, double p, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : terms_) {
    const double a = t.form.apply(v) + t.offset;
    const double g = p == 2.0 ? 2.0 * a : p * std::pow(std::abs(a), p - 1.0) * (a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0));
    const double c = t.weight * g;
    for (std::uint8_t j = 0; j < t.form.size; ++j) out[t.form.index[j]] += c * t.form.coef[j];
  }
}

template <class F>
void PowerSum::for_each_curvature(std::span<const double> v, double p, double delta, bool majorant, F&& f) const {
  for (const auto& t : terms_) {
    double c;
    if (p == 2.0) {
      c = 2.0;
    } else {
      const double a = std::max(std::abs(t.form.apply(v) + t.offset), delta);
      c = p * (majorant ? 1.0 : p - 1.0) * std::pow(a, p - 2.0);
    }
    f(t, t.weight * c);
  }
}

std::pair<double, double> PowerSum::directional(std::span<const double> v, std::span<const double> d, double p,
                                                double delta) const {
  double first = 0.0, second = 0.0;
  for (const auto& t : terms_) {
    const double a = t.form.apply(v) + t.offset;
    const double ld = t.form.apply(d);
    if (ld == 0.0) continue;
    if (p == 2.0) {
      first += t.weight * 2.0 * a * ld;
      second += t.weight * 2.0 * ld * ld;
    } else {
      const double sgn = a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
      first += t.weight * p * std::pow(std::abs(a), p - 1.0) * sgn * ld;
      second += t.weight * p * (p - 1.0) * std::pow(std::max(std::abs(a), delta), p - 2.0) * ld * ld;
    }
  }
  return {first, second};
}

Eigen::MatrixXd PowerSum::dense_hessian(std::span<const double> v, double p, double delta, bool majorant) const {
  const auto n = static_cast<Eigen::Index>(dimension_);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for_each_curvature(v, p, delta, majorant, [&](const PowerTerm& t, double c) {
    for (std::uint8_t a = 0; a < t.form.size; ++a)
      for (std::uint8_t b = 0; b < t.form.size; ++b)
        H(t.form.index[a], t.form.index[b]) += c * t.form.coef[a] * t.form.coef[b];
  });
  return H;
}

Eigen::SparseMatrix<double> PowerSum::sparse_hessian(std::span<const double> v, double p, double delta, bool majorant) const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(terms_.size() * 4);
  for_each_curvature(v, p, delta, majorant, [&](const PowerTerm& t, double c) {
    for (std::uint8_t a = 0; a < t.form.size; ++a)
      for (std::uint8_t b = 0; b < t.form.size; ++b)
        entries.emplace_back(t.form.index[a], t.form.index[b], c * t.form.coef[a] * t.form.coef[b]);
  });
  const auto n = static_cast<Eigen::Index>(dimension_);
  Eigen::SparseMatrix<double> H(n, n);
  H.setFromTriplets(entries.begin(), entries.end());
  return H;
}

double PowerSum::max_argument(std::span<const double> v) const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.form.apply(v) + t.offset));
  return m;
}

}  // namespace anisofrac
