#pragma once

#include <span>

namespace anisofrac {

// Value at t = 0 of the interpolating polynomial through (t_i, v_i) (Neville).
[[nodiscard]] double extrapolate_to_zero(std::span<const double> t, std::span<const double> v);

}  // namespace anisofrac
