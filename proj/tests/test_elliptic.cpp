#include <gtest/gtest.h>

#include "support.hpp"
#include "ucplab/elliptic.hpp"

using namespace ucplab;
using testing_support::min_order;

namespace {

GridSpec unit(std::size_t n) { return GridSpec::square({0.0, 0.0}, 1.0, n); }

double sup_interior_error(const RealField& u, const std::function<double(cplx)>& exact) {
  double m = 0.0;
  const auto& g = u.spec();
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      m = std::max(m, std::abs(u(i, j) - exact(g.point(i, j))));
  return m;
}

} // namespace

TEST(GenPotential, BoundsAndDeterminism) {
  const auto g = unit(64);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = gen_potential(seed, 2.0, 0.1, g);
    EXPECT_LE(sup_abs(p.Vplus), 4.0);
    EXPECT_LE(sup_abs(p.Vminus), 0.01);
    for (double v : p.Vplus.values())
      EXPECT_GE(v, 0.0);
    auto q = gen_potential(seed, 2.0, 0.1, g);
    EXPECT_EQ(p.Vplus.values(), q.Vplus.values());
    EXPECT_EQ(p.Vminus.values(), q.Vminus.values());
  }
  auto z = gen_potential(4, 1.0, 0.0, g);
  EXPECT_EQ(sup_abs(z.Vminus), 0.0);
  EXPECT_THROW(gen_potential(4, 1.0, -0.1, g), Error);
}

TEST(GenPotential, GlobalModeDecays) {
  const auto g = GridSpec::square({0, 0}, 4.0, 64);
  auto p = gen_potential(9, 1.0, 1.0, g, PotentialMode::global(1.0, 0.5));
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      EXPECT_LE(p.Vminus(i, j), std::exp(-std::pow(std::abs(g.point(i, j)), 1.5)) + 1e-15);
}

TEST(SolveDirichlet, ExponentialExactSolution) {
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256}) {
    const auto g = unit(n);
    auto exact = [](cplx z) { return std::exp(2.0 * z.real()); };
    auto u = solve_dirichlet(RealField(g, 4.0), exact, RealField(g, 0.0), {1e-12, 50000});
    errs.push_back(sup_interior_error(u, exact));
    EXPECT_LE(errs.back(), 10.0 * g.h * g.h);
  }
  EXPECT_GE(min_order(errs), 1.8);
}

TEST(SolveDirichlet, HarmonicQuadraticIsExact) {
  for (std::size_t n : {16, 64}) {
    const auto g = unit(n);
    auto exact = [](cplx z) { return z.real() * z.real() - z.imag() * z.imag(); };
    auto u = solve_dirichlet(RealField(g, 0.0), exact, RealField(g, 0.0), {1e-14, 50000});
    EXPECT_LE(sup_interior_error(u, exact), 1e-9);
  }
}

TEST(SolveDirichlet, RandomPotentialResidual) {
  const auto g = unit(64);
  auto p = gen_potential(21, 2.0, 0.1, g);
  Rng rng(99);
  auto trace = TrigModes::random(rng, 6);
  auto u = solve_dirichlet(p.V(), [&](cplx z) { return trace(z); }, RealField(g, 0.0));
  const double scale = sup_abs(boundary_start(g, [&](cplx z) { return trace(z); }));
  const auto r = discrete_residual(p.V(), u, RealField(g, 0.0));
  EXPECT_LE(sup_abs(r) * g.h * g.h, 1e-8 * scale);
}

TEST(SolveDirichlet, MaximumPrinciple) {
  const auto g = unit(64);
  auto p = gen_potential(5, 2.0, 0.0, g);
  Rng rng(5);
  auto trace = TrigModes::random(rng, 5);
  auto start = boundary_start(g, [&](cplx z) { return trace(z); });
  auto u = solve_dirichlet(p.V(), start, RealField(g, 0.0));
  double gmin = 0.0, gmax = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny) {
        gmin = std::min(gmin, start(i, j));
        gmax = std::max(gmax, start(i, j));
      }
  for (double v : u.values()) {
    EXPECT_GE(v, gmin - g.h);
    EXPECT_LE(v, gmax + g.h);
  }
}

TEST(SolveDirichlet, IndefiniteSystemRejected) {
  const auto g = unit(32);
  const double mu1 = dirichlet_mu1(g);
  const double L = 31.0 * g.h; // unknowns span (n - 1) h between the two boundary rings
  EXPECT_NEAR(mu1, 2.0 * pi * pi / (L * L), 0.01 * mu1);
  EXPECT_THROW(solve_dirichlet(RealField(g, -1.01 * mu1), [](cplx) { return 1.0; }, RealField(g, 0.0)),
               Error);
}

TEST(SolveDirichlet, NonConvergenceCarriesResidual) {
  const auto g = unit(64);
  try {
    solve_dirichlet(RealField(g, 0.0), [](cplx z) { return z.real(); }, RealField(g, 0.0), {1e-12, 3});
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual, 1e-12);
  }
}

TEST(Rescale, IdentityAndConstantPotential) {
  const auto g = unit(32);
  auto u = RealField::sample(g, [](cplx z) { return std::sin(z.real()) * z.imag(); });
  auto r = rescale(u, RealField(g, 3.0), 0.0, 1.0, g);
  EXPECT_LE(sup_abs(r.u - u), 1e-12);
  EXPECT_LE(sup_abs(r.V - RealField(g, 3.0)), 1e-12);
  auto half = rescale(u, RealField(g, 3.0), 0.0, 0.5, GridSpec::square(0, 1.0, 16));
  EXPECT_LE(sup_abs(half.V - RealField(half.V.spec(), 0.75)), 1e-12);
  EXPECT_THROW(rescale(u, RealField(g, 3.0), 0.5, 1.0, g), Error);
}

TEST(Rescale, ExponentialRescaledSolvesRescaledEquation) {
  const double lambda = 1.5;
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256}) {
    const auto target = unit(n);
    const double h = target.h;
    const auto source = GridSpec::square(0, 2.0 + 0.5 * h, 2 * n + 1); // T * target points are cell centers
    auto u = RealField::sample(source, [&](cplx z) { return std::exp(lambda * z.real()); });
    auto r = rescale(u, RealField(source, lambda * lambda), 0.0, 2.0, target);
    EXPECT_LE(sup_interior_error(r.u, [&](cplx z) { return std::exp(2.0 * lambda * z.real()); }), 1e-9);
    EXPECT_LE(sup_abs(r.V - RealField(target, 4 * lambda * lambda)), 1e-12);
    errs.push_back(sup_abs(discrete_residual(r.V, r.u, RealField(target, 0.0))));
  }
  EXPECT_GE(min_order(errs), 1.8);
}

TEST(Rescale, Composes) {
  const auto src = GridSpec::square(0, 1.0, 128);
  auto u = RealField::sample(src, [](cplx z) { return std::cos(z.real() + 2 * z.imag()); });
  RealField V(src, 1.0);
  const auto mid = GridSpec::square(0, 1.0, 128);
  const auto tgt = GridSpec::square(0, 1.0, 64);
  auto a = rescale(u, V, 0.0, 0.8, mid);
  auto b = rescale(a.u, a.V, 0.0, 0.5, tgt);
  auto c = rescale(u, V, 0.0, 0.4, tgt);
  EXPECT_LE(sup_abs(b.u - c.u), 1e-3);
  EXPECT_LE(sup_abs(b.V - c.V), 1e-12);
}
