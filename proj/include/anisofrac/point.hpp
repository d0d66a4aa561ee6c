#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace anisofrac {

// Point or offset in R^n, n <= 3. Unused trailing coordinates are zero.
struct Point {
  std::array<double, 3> c{};

  constexpr Point() = default;
  constexpr explicit Point(double x0, double x1 = 0.0, double x2 = 0.0) : c{x0, x1, x2} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  friend constexpr Point operator+(Point a, const Point& b) {
    for (std::size_t i = 0; i < 3; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr Point operator-(Point a, const Point& b) {
    for (std::size_t i = 0; i < 3; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr Point operator-(Point a) {
    for (auto& v : a.c) v = -v;
    return a;
  }
  friend constexpr Point operator*(double s, Point a) {
    for (auto& v : a.c) v *= s;
    return a;
  }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

[[nodiscard]] inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
[[nodiscard]] inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

}  // namespace anisofrac
