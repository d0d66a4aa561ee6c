#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "anisofrac/limits.hpp"
#include "support.hpp"

using namespace anisofrac;

namespace {

// m_inf(w) = 1 + 1/2 [w = +1], finite-range weight otherwise
Kernel one_sided_tail() {
  Kernel::Definition d;
  d.name = "one-sided";
  d.weight = [](const Point&, const Point& h) { return 1.0 + 0.5 * (h[0] > 0) * std::tanh(std::abs(h[0])); };
  d.radial_limit = [](const Point&, const Point&) { return 1.0; };
  d.tail_limit = [](const Point&, const Point& w) { return w[0] > 0 ? 1.5 : 1.0; };
  d.bounds = {1.0, 1.5};
  return Kernel(std::move(d));
}

Kernel angular2(double a2) { return builtin("separable-angular", {{"n", 2.0}, {"a2", a2}}); }

}  // namespace

TEST(LimitDensity, TwoPointSphere) {
  const LimitDensity A(builtin("constant", {}), 2.0);
  EXPECT_DOUBLE_EQ(A(Point(0.3), Point(1.0)), 1.0);
  EXPECT_EQ(A(Point(0.3), Point(0.0)), 0.0);
  const LimitDensity B(builtin("periodic-1d", {}), 2.0);
  EXPECT_NEAR(B(Point(0.25), Point(2.0)), 3.0 * 4.0, 1e-14);
}

TEST(LimitDensity, CircleClosedForm) {
  const LimitDensity A(builtin("constant", {{"n", 2.0}}), 2.0);
  for (double th : {0.0, 0.7, 2.0}) EXPECT_NEAR(A(Point(), Point(std::cos(th), std::sin(th))), M_PI / 2, 1e-13);
  EXPECT_EQ(A(Point(), Point()), 0.0);
}

TEST(LimitDensity, Homogeneity) {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const LimitDensity A(angular2(0.8), p);
    test::for_all("positive homogeneity", 1000, 17, [&](test::Cases& g, std::ostream& why) {
      const Point xi(g.uniform(-2, 2), g.uniform(-2, 2));
      const double c = g.uniform(-4, 4);
      const double lhs = A(Point(), c * xi), rhs = std::pow(std::abs(c), p) * A(Point(), xi);
      why << "p=" << p << " c=" << c << ": " << lhs << " vs " << rhs;
      return std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs);
    });
  }
}

TEST(LimitDensity, Sandwich) {
  for (double p : {1.0, 2.0, 3.5})
    for (const auto& k : {angular2(0.5), angular2(-0.4), builtin("matrix-alpha", {{"M11", 2.0}, {"M12", 0.3}, {"M22", 1.0}})}) {
      const LimitDensity A(k, p);
      test::for_all("sandwich", 200, 3, [&](test::Cases& g, std::ostream& why) {
        const Point xi(g.uniform(-2, 2), g.uniform(-2, 2));
        const double base = bbm_constant(p, 2) * std::pow(norm(xi), p), v = A(Point(), xi);
        why << k.name() << " p=" << p << " value " << v;
        return k.bounds().lower * base * (1 - 1e-12) <= v && v <= k.bounds().upper * base * (1 + 1e-12);
      });
    }
}

TEST(LimitMatrix, QuadraticFormConsistency) {
  const LimitDensity iso(builtin("constant", {{"n", 2.0}}), 2.0);
  const auto I = limit_matrix(iso, Point());
  EXPECT_NEAR(I(0, 0), M_PI / 2, 1e-13);
  EXPECT_NEAR(I(1, 1), M_PI / 2, 1e-13);
  EXPECT_NEAR(I(0, 1), 0.0, 1e-13);

  // a = 1 + cos^2: A = diag(pi/2 + 3pi/8, pi/2 + pi/8)
  const LimitDensity A(angular2(1.0), 2.0);
  const auto M = limit_matrix(A, Point());
  EXPECT_NEAR(M(0, 0), M_PI / 2 + 3 * M_PI / 8, 1e-13);
  EXPECT_NEAR(M(1, 1), M_PI / 2 + M_PI / 8, 1e-13);
  test::for_all("quadratic form", 100, 8, [&](test::Cases& g, std::ostream& why) {
    const Eigen::Vector2d xi(g.uniform(-3, 3), g.uniform(-3, 3));
    const double form = xi.dot(M * xi), dens = A(Point(), Point(xi(0), xi(1)));
    why << form << " vs " << dens;
    return std::abs(form - dens) <= 1e-10 * dens;
  });

  const LimitDensity one(builtin("periodic-1d", {}), 2.0);
  EXPECT_NEAR(limit_matrix(one, Point(0.1))(0, 0), 2.0 + std::sin(0.2 * M_PI), 1e-14);
  EXPECT_THROW((void)limit_matrix(LimitDensity(angular2(1.0), 3.0), Point()), std::invalid_argument);
}

TEST(Constants, ClosedForms) {
  EXPECT_DOUBLE_EQ(bbm_constant(2, 1), 1.0);
  EXPECT_NEAR(bbm_constant(2, 2), M_PI / 2, 1e-13);
  EXPECT_DOUBLE_EQ(bbm_constant(1, 1), 2.0);
  EXPECT_NEAR(bbm_constant(2, 3), 4 * M_PI / 3 / 2, 1e-12);
  EXPECT_NEAR(ms_constant(2, 1), 2.0, 1e-14);
  EXPECT_NEAR(ms_constant(1, 1), 4.0, 1e-14);
  EXPECT_NEAR(ms_constant(2, 2), 2 * M_PI, 1e-14);
  for (int n : {1, 2, 3})
    for (double p : {1.0, 2.0, 3.0}) EXPECT_NEAR(ms_constant(p, n), 2 * sphere_measure(n) / p, 1e-12);
}

TEST(MsWeight, ConstantKernelClosedForm) {
  const auto w = ms_weight(builtin("constant", {}), Point(1.0), FractionalParams(0.5, 2.0), 50.0);
  EXPECT_NEAR(w.lo, 1.0, 1e-10);
  EXPECT_NEAR(w.hi, 1.0, 1e-10);
  EXPECT_NEAR(w.estimate, 1.0, 1e-10);
  const auto w3 = ms_weight(builtin("constant", {{"c", 3.0}}), Point(1.0), FractionalParams(0.5, 2.0), 50.0);
  EXPECT_NEAR(w3.estimate, 3.0, 1e-10);
}

TEST(MsWeight, IntervalInsideBoundsAndNested) {
  for (const auto& k : {builtin("periodic-1d", {}), one_sided_tail(), builtin("constant", {{"c", 1.7}})}) {
    for (double s : {0.1, 0.4}) {
      for (double x : {0.5, 1.3}) {
        const FractionalParams fp(s, 2.0);
        const double scale = std::pow(2.0, 1 - s * 2) * 2 / 2 * std::pow(x, -2 * s);
        const auto w = ms_weight(k, Point(x), fp, 8.0);
        EXPECT_LE(k.bounds().lower * scale, w.lo * (1 + 1e-10)) << k.name();
        EXPECT_LE(w.hi, k.bounds().upper * scale * (1 + 1e-10)) << k.name();
        EXPECT_LE(w.lo, w.estimate);
        EXPECT_LE(w.estimate, w.hi);
        const auto fine = ms_weight(k, Point(x), fp, 64.0);
        EXPECT_LE(w.lo, fine.lo * (1 + 1e-10)) << k.name();
        EXPECT_LE(fine.hi, w.hi * (1 + 1e-10)) << k.name();
      }
    }
  }
}

TEST(MsWeightLimit, Identities) {
  for (int n : {1, 2})
    for (double p : {1.0, 2.0, 3.0})
      EXPECT_NEAR(ms_weight_limit(builtin("constant", {{"n", double(n)}}), Point(1.0), p), ms_constant(p, n), 1e-10);
  EXPECT_NEAR(ms_weight_limit(builtin("constant", {{"c", 2.0}}), Point(0.4), 2.0), 2 * ms_constant(2, 1), 1e-12);
  EXPECT_NEAR(ms_weight_limit(one_sided_tail(), Point(1.0), 2.0), 2.5, 1e-14);
  Kernel::Definition d;
  d.name = "no-tail";
  d.weight = [](const Point&, const Point&) { return 1.0; };
  d.radial_limit = d.weight;
  EXPECT_THROW((void)ms_weight_limit(Kernel(std::move(d)), Point(1.0), 2.0), MissingTailLimit);
}

TEST(MsWeightLimit, ExtrapolatedPathAgrees) {
  EXPECT_NEAR(ms_weight_extrapolated(one_sided_tail(), Point(1.0), 2.0), 2.5, 0.05 * 2.5);
  EXPECT_NEAR(ms_weight_extrapolated(builtin("periodic-1d", {}), Point(1.0), 2.0),
              ms_weight_limit(builtin("periodic-1d", {}), Point(1.0), 2.0), 0.05 * 4);
}

TEST(BbmSweep, ConstantKernelBump) {
  const auto u = GridFunction::sample(Grid(1, {-1, 1}, 129), test::unit_bump);
  const auto t = bbm_sweep(builtin("constant", {}), u, 2.0);
  ASSERT_EQ(t.rows.size(), 6u);
  ASSERT_TRUE(t.final_rel_error());
  EXPECT_LT(*t.final_rel_error(), 0.02);
  EXPECT_NEAR(t.rows.back().reference, std::pow(gradient_lp(u, 2.0), 2.0), 1e-12);
  std::ostringstream csv;
  write_csv(t, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "param,value,extrapolated,reference,rel_error");
}

TEST(BbmSweep, ZeroFunction) {
  const auto t = bbm_sweep(builtin("periodic-1d", {}), GridFunction::zero(Grid(1, {-1, 1}, 33)), 2.0);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.reference, 0.0);
  }
}

TEST(BbmSweep, LiminfBoundAcrossCorpus) {
  const auto u = GridFunction::sample(Grid(1, {-1, 1}, 65), [](const Point& x) { return test::bump(x[0], -0.8, 0.9); });
  for (const auto& k : test::kernel_corpus_1d()) {
    const auto t = bbm_sweep(k, u, 2.0);
    const auto& last = t.rows.back();
    QuadratureSettings q;
    const auto e = interaction_integral(k, u, FractionalParams(last.param, 2.0), q);
    EXPECT_LE(last.reference, last.value * 1.05 + (1 - last.param) * e.error_bound) << k.name();
  }
}

TEST(MsSweep, ConstantKernelShiftedBump) {
  const auto u = GridFunction::sample(Grid(1, {1, 2}, 65), [](const Point& x) { return test::bump(x[0], 1, 2); });
  const auto t = ms_sweep(builtin("constant", {}), u, 2.0);
  ASSERT_TRUE(t.final_rel_error());
  EXPECT_LT(*t.final_rel_error(), 0.1);
  EXPECT_NEAR(t.rows.back().reference, 2 * std::pow(lp_norm(u, 2.0), 2.0), 1e-12);
  const auto t2 = ms_sweep(builtin("constant", {{"c", 2.0}}), u, 2.0);
  EXPECT_NEAR(t2.rows.back().reference, 2 * t.rows.back().reference, 1e-12);
  const auto z = ms_sweep(builtin("constant", {}), GridFunction::zero(u.grid()), 2.0);
  for (const auto& r : z.rows) EXPECT_EQ(r.value, 0.0);
}

TEST(Sweeps, RejectBadLists) {
  const auto u = GridFunction::sample(Grid(1, {-1, 1}, 33), test::unit_bump);
  EXPECT_THROW((void)bbm_sweep(builtin("constant", {}), u, 2.0, {0.9, 0.8}), std::invalid_argument);
  EXPECT_THROW((void)ms_sweep(builtin("constant", {}), u, 2.0, {0.1, 0.2}), std::invalid_argument);
}

TEST(RelativeError, ZeroReference) {
  EXPECT_EQ(relative_error(0.25, 0.0), 0.25);
  EXPECT_NEAR(relative_error(1.1, 1.0), 0.1, 1e-15);
}
