#include "anisofrac/extrapolation.hpp"

#include <stdexcept>
#include <vector>

namespace anisofrac {

double extrapolate_to_zero(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size() || t.empty()) throw std::invalid_argument("extrapolation needs matching, non-empty samples");
  std::vector<double> p(v.begin(), v.end());
  const std::size_t n = p.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i) {
      const double ti = t[i], tj = t[i + level];
      if (ti == tj) throw std::invalid_argument("extrapolation nodes must be distinct");
      p[i] = (tj * p[i] - ti * p[i + 1]) / (tj - ti);
    }
  return p[0];
}

}  // namespace anisofrac
