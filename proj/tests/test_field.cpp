#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "ucplab/ucpf.hpp"

using namespace ucplab;
using testing_support::min_order;
using testing_support::SmoothComplex;

namespace {

GridSpec unit(std::size_t n) { return GridSpec::square({0.0, 0.0}, 1.0, n); }

double interior_err(const ComplexField& f, cplx expect, std::size_t margin = 2) {
  double m = 0.0;
  const Window w = interior(f.spec(), margin);
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      m = std::max(m, std::abs(f(i, j) - expect));
  return m;
}

} // namespace

TEST(GridSpec, CellCenteredLayout) {
  const auto g = GridSpec::square({1.0, -2.0}, 0.5, 8);
  EXPECT_DOUBLE_EQ(g.h, 0.125);
  EXPECT_DOUBLE_EQ(g.x(0), 1.0 - 0.5 + 0.0625);
  EXPECT_DOUBLE_EQ(g.y(7), -2.0 + 0.5 - 0.0625);
  EXPECT_EQ(g.index(3, 2), 2u * 8u + 3u);
  EXPECT_THROW(GridSpec::square({0, 0}, 1.0, 7), Error);
  EXPECT_THROW(GridSpec::square({0, 0}, 0.0, 16), Error);
}

TEST(Field, ArithmeticNeedsMatchingGrids) {
  RealField a(unit(8), 1.0), b(unit(16), 1.0);
  EXPECT_THROW(a += b, Error);
  RealField c(unit(8), 2.0);
  EXPECT_DOUBLE_EQ((a + c)[5], 3.0);
}

TEST(Dbar, ExactOnAffine) {
  const auto g = unit(32);
  auto zbar = ComplexField::sample(g, [](cplx z) { return std::conj(z); });
  auto zed = ComplexField::sample(g, [](cplx z) { return z; });
  EXPECT_LE(sup_abs(dbar(zbar) - ComplexField(g, 1.0)), 1e-12);
  EXPECT_LE(sup_abs(dbar(zed)), 1e-12);
  EXPECT_LE(sup_abs(del(zed) - ComplexField(g, 1.0)), 1e-12);
  EXPECT_LE(sup_abs(del(zbar)), 1e-12);
}

TEST(Dbar, ExpOfZIsHolomorphicInTheLimit) {
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256}) {
    auto f = ComplexField::sample(unit(n), [](cplx z) { return std::exp(z); });
    errs.push_back(interior_err(dbar(f), 0.0));
  }
  EXPECT_GE(min_order(errs), 1.8);
}

TEST(Dbar, ConjugateIdentityAndGradientEncoding) {
  const auto g = unit(40);
  SmoothComplex fn(7);
  auto f = ComplexField::sample(g, fn);
  EXPECT_LE(sup_abs(conj(del(f)) - dbar(conj(f))), 1e-12);
  auto fx = d_dx(f), fy = d_dy(f);
  EXPECT_LE(sup_abs(dbar(f) + del(f) - fx), 1e-12);
  auto diff = dbar(f) - del(f);
  diff *= cplx(0.0, -1.0);
  EXPECT_LE(sup_abs(diff - fy), 1e-12);
}

TEST(Laplacian, ExactOnQuadratics) {
  const auto g = unit(16);
  auto a = RealField::sample(g, [](cplx z) { return z.real() * z.real() - z.imag() * z.imag(); });
  auto b = RealField::sample(g, [](cplx z) { return std::norm(z); });
  EXPECT_LE(sup_abs(laplacian(a)), 1e-10);
  EXPECT_LE(sup_abs(laplacian(b) - RealField(g, 4.0)), 1e-10);
}

TEST(Laplacian, MatchesFourDelDbar) {
  std::vector<double> errs;
  SmoothComplex fn(3);
  for (std::size_t n : {64, 128, 256}) {
    auto f = RealField::sample(unit(n), [&](cplx z) { return fn(z).real(); });
    auto l = to_complex(laplacian(f));
    auto d = del(dbar(f));
    d *= cplx(4.0);
    errs.push_back(sup_abs(l - d, interior(f.spec(), 4)));
  }
  EXPECT_GE(min_order(errs), 1.8);
}

TEST(Norms, ConstantField) {
  const auto g = unit(64);
  RealField f(g, -3.0);
  EXPECT_DOUBLE_EQ(sup_norm(f, Region::ball({0, 0}, 0.5)), 3.0);
  EXPECT_NEAR(l2_sq(f, Region::cube({0, 0}, 0.5)), 9.0, 1e-12);
  EXPECT_NEAR(l2_sq(f, Region::ball({0, 0}, 0.5)), 9.0 * pi * 0.25, 9.0 * 4.0 * g.h);
}

TEST(Norms, SupOfXOnUnitBall) {
  for (std::size_t n : {32, 128}) {
    const auto g = unit(n);
    auto f = RealField::sample(g, [](cplx z) { return z.real(); });
    EXPECT_NEAR(sup_norm(f, Region::ball({0, 0}, 1.0)), 1.0, 2 * g.h);
  }
}

TEST(Norms, MonotoneAndAdditive) {
  const auto g = unit(64);
  SmoothComplex fn(11);
  auto f = ComplexField::sample(g, fn);
  for (double r : {0.1, 0.3, 0.7}) {
    EXPECT_LE(sup_norm(f, Region::ball({0.1, 0.1}, r)), sup_norm(f, Region::cube({0.1, 0.1}, r)));
  }
  // four disjoint quarter cubes tile the cube (no cell center on an interface)
  const double total = l2_sq(f, Region::cube({0, 0}, 0.5));
  double parts = 0.0;
  for (double sx : {-0.25, 0.25})
    for (double sy : {-0.25, 0.25})
      parts += l2_sq(f, Region::cube({sx, sy}, 0.25));
  EXPECT_NEAR(parts, total, 1e-12 * total);
}

TEST(Norms, RegionOutsideFootprintThrows) {
  RealField f(unit(16), 1.0);
  EXPECT_THROW(sup_norm(f, Region::ball({0.9, 0}, 0.5)), Error);
}

TEST(Ucpf, RoundTrip) {
  const auto g = GridSpec::square({0.25, -0.5}, 1.5, 12);
  SmoothComplex fn(5);
  auto c = ComplexField::sample(g, fn);
  auto r = real_part(c);
  std::stringstream ss;
  ucpf::write(ss, c);
  auto back = std::get<ComplexField>(ucpf::read(ss));
  EXPECT_EQ(back.values(), c.values());
  EXPECT_TRUE(back.spec().same_as(g));
  std::stringstream rs;
  ucpf::write(rs, r);
  const std::string bytes = rs.str();
  ASSERT_EQ(bytes.size(), 4u + 4u + 8u + 24u + 1u + 8u * 144u);
  EXPECT_EQ(bytes.substr(0, 4), "UCPF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[40]), 0u);
  auto rb = std::get<RealField>(ucpf::read(rs));
  EXPECT_EQ(rb.values(), r.values());
}

TEST(Ucpf, RejectsGarbage) {
  std::stringstream ss("NOPE");
  EXPECT_THROW(ucpf::read(ss), Error);
}
