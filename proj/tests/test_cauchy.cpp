#include <gtest/gtest.h>

#include "support.hpp"
#include "ucplab/cauchy.hpp"

using namespace ucplab;
using testing_support::min_order;
using testing_support::SmoothComplex;

TEST(ClosedForms, SelfCellAndSymmetry) {
  // int over [-1/2, 1/2]^2 of 1/r is 4 ln(1 + sqrt 2)
  EXPECT_NEAR(rect_integral_absinv(-0.5, 0.5, -0.5, 0.5), 4.0 * std::log1p(std::sqrt(2.0)), 1e-14);
  EXPECT_LE(std::abs(rect_integral_inv(-0.5, 0.5, -0.5, 0.5)), 1e-14);
  // far rectangle: compare with a brute-force midpoint sum
  cplx s{};
  double a = 0.0;
  const int m = 400;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const cplx z(2.0 + (i + 0.5) / m, -1.0 + 0.5 * (j + 0.5) / m);
      s += 1.0 / z;
      a += 1.0 / std::abs(z);
    }
  const double w = 0.5 / (m * m);
  EXPECT_NEAR(std::abs(rect_integral_inv(2.0, 3.0, -1.0, -0.5) - s * w), 0.0, 1e-7);
  EXPECT_NEAR(rect_integral_absinv(2.0, 3.0, -1.0, -0.5), a * w, 1e-7);
}

TEST(Transform, ZeroAndLinearity) {
  const auto g = GridSpec::square({0.3, 0.1}, 1.0, 32);
  CauchyOp op(g);
  EXPECT_EQ(sup_abs(op.transform(ComplexField(g))), 0.0);
  auto F = ComplexField::sample(g, SmoothComplex(1));
  auto G = ComplexField::sample(g, SmoothComplex(2));
  const cplx a(0.7, -1.3), b(-2.0, 0.4);
  auto lhs = op.transform(F * a + G * b);
  auto rhs = op.transform(F) * a + op.transform(G) * b;
  EXPECT_LE(sup_abs(lhs - rhs), 1e-12);
}

TEST(Transform, FftMatchesNaive) {
  const auto g = GridSpec::rect(0.0, 0.0, 1.0 / 24.0, 12, 24);
  CauchyOp op(g);
  auto F = ComplexField::sample(g, SmoothComplex(4));
  EXPECT_LE(sup_abs(op.transform(F) - op.transform_naive(F)), 1e-10);
  CauchyOp disk(GridSpec::square(0, 1.0, 20), Disk{0.0, 0.8});
  auto H = ComplexField::sample(disk.spec(), SmoothComplex(5));
  EXPECT_LE(sup_abs(disk.transform(H) - disk.transform_naive(H)), 1e-10);
}

TEST(Transform, DiskIdentity) {
  const std::size_t n = 128;
  const auto g = GridSpec::square(0, 1.0, n);
  CauchyOp op(g, Disk{0.0, 1.0});
  auto t = op.transform(ComplexField(g, 1.0));
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (op.in_domain(i, j))
        err = std::max(err, std::abs(t(i, j) - std::conj(g.point(i, j))));
  EXPECT_LE(err, 5.0 * g.h);
}

TEST(Transform, UnitSquareAgainstExactIntegral) {
  const auto g = GridSpec::rect(0.0, 0.0, 1.0 / 127.0, 127, 127);
  CauchyOp op(g);
  auto t = op.transform(ComplexField(g, 1.0));
  EXPECT_LE(std::abs(t(63, 63)), 1e-12); // center of the square
  for (auto [i, j] : {std::pair{10, 20}, std::pair{63, 100}, std::pair{120, 5}})
    EXPECT_LE(std::abs(t(i, j) - transform_of_one(op.domain(), g.point(i, j))), 1e-4);
}

TEST(Transform, OperatorNormConsistency) {
  const auto g = GridSpec::square(0, 1.5, 64);
  CauchyOp op(g);
  const double cinf = c_infty_estimate(3, 64);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(s);
    ComplexField F(g);
    for (auto& v : F.values())
      v = std::polar(1.0, rng.uniform(0, 2 * pi));
    EXPECT_LE(sup_abs(op.transform(F)), cinf * 1.0 + 1e-12);
  }
}

TEST(DbarInverse, ZeroAndDisk) {
  const auto g = GridSpec::square(0, 1.0, 64);
  CauchyOp op(g);
  EXPECT_EQ(dbar_inverse_residual(op, ComplexField(g)), 0.0);
  CauchyOp disk(g, Disk{0.0, 1.0});
  auto one = ComplexField(g, 1.0);
  // dbar(zbar) = 1 is exact under the stencil; what is left is the pixelated rim
  EXPECT_LE(dbar_inverse_residual(disk, one, physical_interior(g, 0.25)), 10 * g.h);
}

TEST(DbarInverse, RefinementOnRandomSmoothF) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<double> r;
    for (std::size_t n : {32, 64, 128}) {
      const auto g = GridSpec::square(0, 1.0, n);
      r.push_back(dbar_inverse_residual(CauchyOp(g), ComplexField::sample(g, SmoothComplex(seed))));
    }
    EXPECT_GE(min_order(r), 0.9) << "seed " << seed;
    EXPECT_LE(r.back(), 5e-2);
  }
}

TEST(KernelMass, DiskAndHomogeneity) {
  EXPECT_NEAR(kernel_mass(Disk{0.0, 1.0}, 128), 2 * pi, 0.03 * 2 * pi);
  const double m1 = kernel_mass(Rect{-0.5, 0.5, -0.5, 0.5}, 64);
  const double m2 = kernel_mass(Rect{-1.0, 1.0, -1.0, 1.0}, 64);
  EXPECT_NEAR(m2 / m1, 2.0, 1e-9);
  EXPECT_NEAR(kernel_mass_exact(Rect{-1, 1, -1, 1}), 8.0 * std::log1p(std::sqrt(2.0)), 1e-12);
}

TEST(KernelMass, StripScalingBand) {
  double lo = 1e300, hi = 0.0;
  for (int k : {1, 3, 7, 15}) {
    const double d = 2.0 / (2 * k + 3);
    const double m = kernel_mass(Rect{0.0, 1.5 * d, 0.0, 1.0}, 30);
    EXPECT_NEAR(m, kernel_mass_exact(Rect{0.0, 1.5 * d, 0.0, 1.0}), 0.02 * m);
    const double ratio = m / (d * std::log(1.0 / d));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LE(hi / lo, 2.0);
}

TEST(CInfty, MonotoneAndStable) {
  const double a = c_infty_estimate(1, 128); // s = 1.5 only
  EXPECT_GE(kernel_mass(Rect{-1.5, 1.5, -1.5, 1.5}, 128), kernel_mass(Rect{-1, 1, -1, 1}, 128));
  const double b128 = c_infty_estimate(3, 128);
  const double b256 = c_infty_estimate(3, 256);
  EXPECT_DOUBLE_EQ(a, b128);
  EXPECT_NEAR(b128, b256, 0.02 * b256);
  EXPECT_NEAR(b256, c_infty_exact(), 1e-3);
}
