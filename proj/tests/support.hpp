#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "anisofrac/grid.hpp"
#include "anisofrac/kernel.hpp"
#include "cases.hpp"

namespace anisofrac::test {

inline double hat(const Point& x) { return std::max(0.0, 1.0 - std::abs(x[0])); }

inline double bump(double x, double a, double b) {
  const double t = (2.0 * x - a - b) / (b - a);
  return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
}

inline double unit_bump(const Point& x) { return bump(x[0], -1.0, 1.0); }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Minimal property runner: `cases` draws from a seeded engine; stops at the first
// failing case and reports its index so it can be replayed.
template <class Body>
void for_all(const char* name, int cases, std::uint64_t seed, Body body) {
  Cases gen(seed);
  for (int i = 0; i < cases; ++i) {
    std::ostringstream why;
    if (!body(gen, why)) {
      ADD_FAILURE() << name << ": case " << i << " of " << cases << " (seed " << seed << ") failed: " << why.str();
      return;
    }
  }
}

// Corpus of 1D kernels used by several suites.
inline std::vector<Kernel> kernel_corpus_1d() {
  return {
      builtin("constant", {{"c", 1.0}}),
      builtin("constant", {{"c", 2.5}}),
      builtin("periodic-1d", {}),
      builtin("periodic-1d", {{"A0", 3.0}, {"A1", 1.5}, {"period", 0.5}}),
      builtin("matrix-alpha", {{"n", 1.0}, {"alpha", 2.0}}),
  };
}

// Random piecewise-linear grid function with support inside the box.
inline GridFunction random_function(const Grid& grid, Cases& gen) {
  std::vector<double> v(grid.size());
  for (auto& x : v) x = gen.uniform(-1.0, 1.0);
  return GridFunction(grid, std::move(v));
}

}  // namespace anisofrac::test
