#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "anisofrac/kernel.hpp"
#include "support.hpp"

using namespace anisofrac;

namespace {

Kernel one_plus_abs_h() {
  Kernel::Definition d;
  d.name = "one-plus-r";
  d.dimension = 1;
  d.weight = [](const Point&, const Point& h) { return 1.0 + std::min(norm(h), 1.0); };
  d.radial_limit = [](const Point&, const Point&) { return 1.0; };
  d.bounds = {1.0, 2.0};
  d.traits.symmetric = true;
  d.traits.translation_invariant = true;
  return Kernel(std::move(d));
}

// 2 + g with g(x,h) = -g(x-h,-h)
Kernel antisymmetric_perturbation() {
  Kernel::Definition d;
  d.name = "perturbed";
  d.dimension = 1;
  auto g = [](const Point& x, const Point& h) { return 0.5 * std::tanh(h[0]) * std::cos(x[0] - 0.5 * h[0]); };
  d.weight = [g](const Point& x, const Point& h) { return 2.0 + g(x, h); };
  d.radial_limit = [](const Point&, const Point&) { return 2.0; };
  d.bounds = {1.5, 2.5};
  return Kernel(std::move(d));
}

}  // namespace

TEST(Kernel, ConstantBuiltin) {
  const auto k = builtin("constant", {{"c", 1.0}});
  EXPECT_EQ(k.bounds().lower, 1.0);
  EXPECT_EQ(k.bounds().upper, 1.0);
  EXPECT_EQ(k(Point(0.3), Point(-2.0)), 1.0);
  const auto rep = verify_hypotheses(k, 256);
  EXPECT_TRUE(rep.passes());
  EXPECT_EQ(rep.bounds.max_violation, 0.0);
  EXPECT_EQ(rep.symmetry.max_violation, 0.0);
  EXPECT_EQ(rep.radial_residual, 0.0);
}

TEST(Kernel, PeriodicBuiltinBoundsAndPeriod) {
  const auto k = builtin("periodic-1d", {{"A0", 2.0}, {"A1", 1.0}});
  EXPECT_EQ(k.bounds().lower, 1.0);
  EXPECT_EQ(k.bounds().upper, 3.0);
  ASSERT_TRUE(k.period());
  EXPECT_EQ(*k.period(), 1.0);
  EXPECT_NEAR(k(Point(0.25), Point(0.1)), 3.0, 1e-15);
  EXPECT_NEAR(k(Point(1.25), Point(0.1)), 3.0, 1e-14);
  const auto rep = verify_hypotheses(k, 256);
  EXPECT_TRUE(rep.bounds.passes);
  EXPECT_TRUE(rep.radial.passes);
  // x-dependent weight with no h-dependence cannot satisfy m(x,h) = m(x-h,-h)
  EXPECT_FALSE(rep.symmetry.passes);
  ASSERT_TRUE(rep.symmetry.witness);
}

TEST(Kernel, SeparableAngularPassesAudit) {
  const auto k = builtin("separable-angular", {{"n", 2.0}, {"a0", 1.0}, {"a2", 0.5}});
  for (double th : {0.0, 0.4, 1.3, 2.9}) {
    const Point w(std::cos(th), std::sin(th));
    EXPECT_NEAR(k.radial_limit(Point(0.1, -0.7), w), 1.0 + 0.5 * std::cos(th) * std::cos(th), 1e-15);
    EXPECT_EQ(k.radial_limit(Point(0.1, -0.7), w), k.radial_limit(Point(5.0, 2.0), w));
  }
  EXPECT_TRUE(verify_hypotheses(k, 256, 7).passes());
}

TEST(Kernel, RadialSlopeOfLinearPerturbation) {
  const auto rep = verify_hypotheses(one_plus_abs_h(), 64);
  EXPECT_NEAR(rep.radial_slope, 1.0, 1e-6);
  EXPECT_TRUE(rep.radial.passes);
  EXPECT_TRUE(rep.passes());
}

TEST(Kernel, RadialFailureIsReported) {
  Kernel::Definition d;
  d.name = "wrong-limit";
  d.weight = [](const Point&, const Point&) { return 2.0; };
  d.radial_limit = [](const Point&, const Point&) { return 1.0; };
  d.bounds = {1.0, 2.0};
  const auto rep = verify_hypotheses(Kernel(std::move(d)), 32);
  EXPECT_FALSE(rep.radial.passes);
  ASSERT_TRUE(rep.radial.witness);
  EXPECT_EQ(rep.radial.witness->value, 2.0);
}

TEST(Kernel, BoundsViolationHasWitness) {
  Kernel::Definition d;
  d.name = "escapes";
  d.weight = [](const Point& x, const Point&) { return 1.0 + x[0] * x[0]; };
  d.radial_limit = [](const Point& x, const Point&) { return 1.0 + x[0] * x[0]; };
  d.bounds = {1.0, 1.5};
  const auto rep = verify_hypotheses(Kernel(std::move(d)), 128);
  EXPECT_FALSE(rep.bounds.passes);
  ASSERT_TRUE(rep.bounds.witness);
  EXPECT_GT(rep.bounds.witness->value, 1.5);
}

TEST(Kernel, AuditIsSeeded) {
  const auto k = builtin("periodic-1d", {});
  const auto a = verify_hypotheses(k, 100, 3), b = verify_hypotheses(k, 100, 3);
  EXPECT_EQ(a.symmetry.max_violation, b.symmetry.max_violation);
  ASSERT_TRUE(a.symmetry.witness && b.symmetry.witness);
  EXPECT_EQ(a.symmetry.witness->x, b.symmetry.witness->x);
}

TEST(Symmetrize, AntisymmetricPartCancels) {
  const auto k = antisymmetric_perturbation();
  const auto ks = symmetrize(k);
  test::for_all("antisymmetric cancels", 1000, 5, [&](test::Cases& g, std::ostream& why) {
    const Point x(g.uniform(-3, 3)), h(g.uniform(-3, 3));
    why << "x=" << x[0] << " h=" << h[0] << " value=" << ks(x, h);
    return std::abs(ks(x, h) - 2.0) < 1e-14;
  });
  EXPECT_TRUE(verify_hypotheses(ks, 128).symmetry.passes);
}

TEST(Symmetrize, FixedPointAndIdempotent) {
  std::vector<Kernel> ks = test::kernel_corpus_1d();
  ks.push_back(builtin("separable-angular", {}));
  ks.push_back(antisymmetric_perturbation());
  for (const auto& k : ks) {
    const auto once = symmetrize(k), twice = symmetrize(once);
    const int n = k.dimension();
    test::for_all("idempotent", 1000, 9, [&](test::Cases& g, std::ostream& why) {
      const Point x(g.uniform(-2, 2), n > 1 ? g.uniform(-2, 2) : 0.0);
      const Point h(g.uniform(-2, 2), n > 1 ? g.uniform(-2, 2) : 0.0);
      why << k.name() << " at x=" << x[0] << " h=" << h[0];
      const bool idem = std::abs(once(x, h) - twice(x, h)) <= 1e-14 * once(x, h);
      const bool fixed = !k.traits().symmetric || std::abs(once(x, h) - k(x, h)) <= 1e-14 * k(x, h);
      return idem && fixed;
    });
  }
}

TEST(Symmetrize, PreservesBoundsAndPeriod) {
  const auto k = symmetrize(builtin("periodic-1d", {{"period", 0.5}}));
  EXPECT_EQ(k.bounds().lower, 1.0);
  EXPECT_EQ(k.bounds().upper, 3.0);
  EXPECT_EQ(*k.period(), 0.5);
  EXPECT_TRUE(k.traits().symmetric);
  EXPECT_TRUE(verify_hypotheses(k, 256).passes());
}

TEST(Oscillating, RescalesPeriod) {
  const auto k = builtin("periodic-1d", {});
  const auto ke = oscillating(k, 0.125);
  EXPECT_EQ(*ke.period(), 0.125);
  EXPECT_EQ(ke(Point(0.03), Point(1.0)), k(Point(0.24), Point(1.0)));
  EXPECT_THROW((void)oscillating(builtin("constant", {}), 0.5), std::invalid_argument);
}

TEST(CellAverage, PeriodicMeanIsConstant) {
  const auto bar = cell_average(builtin("periodic-1d", {}));
  EXPECT_NEAR(bar(Point(0.37), Point(0.2)), 2.0, 1e-14);
  EXPECT_TRUE(bar.traits().translation_invariant);
  EXPECT_TRUE(bar.traits().symmetric);
  EXPECT_TRUE(verify_hypotheses(bar, 64).passes());
}

TEST(MatrixKernel, IdentityGivesOne) {
  for (double alpha : {-1.0, 0.5, 3.0}) {
    const auto k = matrix_kernel(2, [](const Point&, const Point&) { return SmallMatrix::Identity(2, 2); }, alpha, {});
    EXPECT_NEAR(k(Point(0.2, 0.1), Point(0.3, -4.0)), 1.0, 1e-15);
    EXPECT_NEAR(k.radial_limit(Point(), Point(0.6, 0.8)), 1.0, 1e-15);
  }
}

TEST(MatrixKernel, DiagonalRadialLimit) {
  MatrixKernelOptions opt;
  opt.lambda = 1.0;
  opt.Lambda = 2.0;
  opt.depends_on_h = false;
  opt.depends_on_x = false;
  const auto k = matrix_kernel(
      2, [](const Point&, const Point&) { return SmallMatrix(Eigen::Vector2d(2.0, 1.0).asDiagonal()); }, 1.0, opt);
  EXPECT_NEAR(k.radial_limit(Point(), Point(1.0, 0.0)), 2.0, 1e-15);
  EXPECT_NEAR(k.radial_limit(Point(), Point(0.0, 1.0)), 1.0, 1e-15);
  for (double th : {0.3, 1.1, 2.5}) {
    const double c = std::cos(th), s = std::sin(th);
    EXPECT_NEAR(k.radial_limit(Point(), Point(c, s)), std::sqrt(4 * c * c + s * s), 1e-14);
  }
  EXPECT_TRUE(verify_hypotheses(k, 128).passes());
}

TEST(MatrixKernel, ScalarOscillationBounds) {
  MatrixKernelOptions opt;
  opt.lambda = 0.5;
  opt.Lambda = 1.5;
  opt.depends_on_h = false;
  opt.period = 1.0;
  const auto k = matrix_kernel(
      1,
      [](const Point& x, const Point&) {
        SmallMatrix m(1, 1);
        m(0, 0) = 1.0 + 0.5 * std::sin(2 * M_PI * x[0]);
        return m;
      },
      2.0, opt);
  EXPECT_DOUBLE_EQ(k.bounds().lower, 0.25);
  EXPECT_DOUBLE_EQ(k.bounds().upper, 2.25);
  EXPECT_NEAR(k(Point(0.25), Point(0.5)), 2.25, 1e-14);
  const auto rep = verify_hypotheses(k, 256);
  EXPECT_TRUE(rep.bounds.passes);
  EXPECT_TRUE(rep.radial.passes);
}

TEST(MatrixKernel, SymmetricFieldPassesSymmetry) {
  // M(x,h) = M(x-h,-h) holds for any function of the midpoint x - h/2
  MatrixKernelOptions opt;
  opt.lambda = 1.0;
  opt.Lambda = 3.0;
  const auto k = matrix_kernel(
      2,
      [](const Point& x, const Point& h) {
        const double m = 2.0 + std::sin(x[0] - 0.5 * h[0]) * std::cos(x[1] - 0.5 * h[1]);
        SmallMatrix a(2, 2);
        a << m, 0.0, 0.0, 1.0 + 0.5 * std::cos(x[0] - 0.5 * h[0]) * std::cos(x[0] - 0.5 * h[0]);
        return a;
      },
      1.0, opt);
  EXPECT_TRUE(k.traits().symmetric);
  const auto rep = verify_hypotheses(k, 256);
  EXPECT_TRUE(rep.symmetry.passes) << rep.symmetry.max_violation;
  EXPECT_TRUE(rep.bounds.passes);
}

TEST(MatrixKernel, RejectsBadInput) {
  auto field = [](const Point&, const Point&) { return SmallMatrix::Identity(2, 2); };
  EXPECT_THROW((void)matrix_kernel(2, field, 0.0, {}), std::invalid_argument);
  MatrixKernelOptions opt;
  opt.lambda = 2.0;
  opt.Lambda = 3.0;
  EXPECT_THROW((void)matrix_kernel(2, field, 1.0, opt), std::invalid_argument);
  auto skew = [](const Point&, const Point&) {
    SmallMatrix a(2, 2);
    a << 1.0, 0.5, 0.0, 1.0;
    return a;
  };
  EXPECT_THROW((void)matrix_kernel(2, skew, 1.0, {}), std::invalid_argument);
  auto indefinite = [](const Point&, const Point&) {
    SmallMatrix a(2, 2);
    a << 1.0, 0.0, 0.0, -1.0;
    return a;
  };
  EXPECT_THROW((void)matrix_kernel(2, indefinite, 1.0, {}), std::invalid_argument);
}

TEST(Builtin, RejectsUnknownNamesAndParameters) {
  EXPECT_THROW((void)builtin("gaussian", {}), std::invalid_argument);
  EXPECT_THROW((void)builtin("constant", {{"k", 1.0}}), std::invalid_argument);
  EXPECT_THROW((void)builtin("constant", {{"c", -1.0}}), std::invalid_argument);
  EXPECT_THROW((void)builtin("periodic-1d", {{"A0", 1.0}, {"A1", 1.0}}), std::invalid_argument);
  EXPECT_EQ(builtin_names().size(), 5u);
}

TEST(Builtin, TabulatedInterpolates) {
  const auto path = std::filesystem::temp_directory_path() / "anisofrac_table_test.csv";
  {
    std::ofstream t(path);
    t << "x,h,value\n";
    for (double x : {0.0, 1.0})
      for (double h : {-1.0, 0.0, 1.0}) t << x << ',' << h << ',' << 1.0 + x + 0.5 * std::abs(h) << '\n';
  }
  const auto k = builtin("tabulated", {{"table", path.string()}});
  std::filesystem::remove(path);
  EXPECT_DOUBLE_EQ(k(Point(0.5), Point(0.5)), 1.75);
  EXPECT_DOUBLE_EQ(k(Point(5.0), Point(-9.0)), 2.5);
  EXPECT_DOUBLE_EQ(k.radial_limit(Point(0.25), Point(1.0)), 1.25);
  EXPECT_DOUBLE_EQ(k.tail_limit(Point(0.0), Point(-1.0)), 1.5);
  EXPECT_EQ(k.bounds().lower, 1.0);
  EXPECT_EQ(k.bounds().upper, 2.5);
  EXPECT_THROW((void)builtin("tabulated", {{"table", std::string("/nonexistent/t.csv")}}), std::invalid_argument);
}

TEST(Kernel, MissingTailLimitThrows) {
  EXPECT_FALSE(one_plus_abs_h().has_tail_limit());
  EXPECT_THROW((void)one_plus_abs_h().tail_limit(Point(), Point(1.0)), MissingTailLimit);
}

TEST(Kernel, LimitsStayInsideBounds) {
  for (const auto& k : test::kernel_corpus_1d()) EXPECT_TRUE(verify_hypotheses(k, 512, 1).limit_bounds.passes) << k.name();
}
