#include <gtest/gtest.h>

#include "ucplab/corpus.hpp"

using namespace ucplab;

TEST(Theta, FrozenValues) {
  // ln d / ln(2d/r), d = 1 + 1/(2F)
  EXPECT_NEAR(theta_exponent(0.5, 1.0).theta, 0.22629438553091683, 1e-15);
  EXPECT_NEAR(theta_exponent(0.25, 4.0).theta, 0.053605369642813844, 1e-15);
  const Theta t = theta_exponent(0.3, 2.0);
  EXPECT_NEAR(-1.0 / t.theta, t.minus_inv_theta, 1e-14);
}

TEST(Theta, MonotoneInFAndR) {
  for (double F : {1.0, 2.0, 4.0, 8.0})
    EXPECT_LT(theta_exponent(0.5, 2.0 * F).theta, theta_exponent(0.5, F).theta);
  for (double r : {0.5, 0.25, 0.125})
    EXPECT_LT(theta_exponent(0.5 * r, 2.0).theta, theta_exponent(r, 2.0).theta);
  // ln d ~ 1/(2F): 1/theta ~ 2 F ln(2/r) for large F
  EXPECT_NEAR(theta_exponent(0.01, 1e4).ratio, 2.0 * std::log(200.0) / std::log(100.0), 1e-3);
  EXPECT_THROW(theta_exponent(1.0, 2.0), Error);
  EXPECT_THROW(theta_exponent(0.5, 0.5), Error);
}

TEST(PrescribedDelta, FrozenAndUndefinedAtOne) {
  EXPECT_NEAR(prescribed_delta(2.0, 1.0), 0.27612172189203577, 1e-15);
  EXPECT_TRUE(std::isnan(prescribed_delta(1.0, 1.0)));
}

TEST(FMode, RoundTrip) {
  for (FMode m : {FMode::One, FMode::Sqrt, FMode::Linear})
    EXPECT_EQ(parse_fmode(to_string(m)), m);
  EXPECT_EQ(F_of(FMode::Sqrt, 4.0), 2.0);
  EXPECT_THROW(parse_fmode("cubic"), Error);
}

TEST(ThreeCircle, EqualityForMonomials) {
  for (int n = 0; n <= 6; ++n) {
    const ThreeCircle t = three_circle_check([n](cplx z) { return std::pow(z, n); }, 0.3, 0.55, 0.9);
    EXPECT_NEAR(t.margin, 0.0, 1e-9) << "n = " << n;
  }
}

TEST(ThreeCircle, RandomPolynomialsRespectConvexity) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    std::vector<cplx> c(static_cast<std::size_t>(rng.integer(1, 8)));
    for (auto& v : c)
      v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto poly = [&](cplx z) {
      cplx s = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it)
        s = s * z + *it;
      return s;
    };
    const ThreeCircle t = three_circle_check(poly, 0.25, 0.6, 1.0);
    EXPECT_GE(t.margin, -1e-3 * std::max(1.0, std::abs(std::log(t.M3))));
  }
}

TEST(ThreeCircle, GridFieldMatchesFunction) {
  const auto g = GridSpec::square(0.0, 1.2, 256);
  const auto f = ComplexField::sample(g, [](cplx z) { return z * z + 0.3; });
  const ThreeCircle a = three_circle_check(f, 0.2, 0.5, 1.0);
  const ThreeCircle b = three_circle_check([](cplx z) { return z * z + 0.3; }, 0.2, 0.5, 1.0);
  EXPECT_NEAR(a.margin, b.margin, 1e-3);
  EXPECT_THROW(three_circle_check(f, 0.2, 0.5, 1.5), Error);
  EXPECT_THROW(three_circle_check(f, 0.5, 0.2, 1.0), Error);
}

TEST(Vanishing, ExactOrderOfRealMonomials) {
  const auto g = GridSpec::square(0.0, 1.0, 256);
  for (int n = 1; n <= 3; ++n) {
    const auto u = RealField::sample(g, [n](cplx z) { return std::pow(z, n).real(); });
    const VanishingRecord r = vanishing_order_experiment(u, 1.0, 1.0);
    EXPECT_NEAR(r.slope, n, 0.05) << "n = " << n;
    EXPECT_GE(r.r_grid.size(), 6u);
  }
}

TEST(Vanishing, NonVanishingSlopeIsZero) {
  // ln |e^x|_{B_r} = r, so the fitted slope is about r and goes to 0 with r
  const auto g = GridSpec::square(0.0, 2.0, 512);
  const auto u = RealField::sample(g, [](cplx z) { return std::exp(z.real()); });
  const double big = vanishing_order_experiment(u, 1.0, 1.0, {0.5, 0.4, 0.3, 0.2}).slope;
  const double small = vanishing_order_experiment(u, 1.0, 1.0, {0.08, 0.06, 0.05, 0.04}).slope;
  EXPECT_LT(small, big);
  EXPECT_LT(small, 0.1);
}

TEST(Vanishing, HypothesesAndRadiiChecked) {
  const auto g = GridSpec::square(0.0, 2.0, 64);
  const auto u = RealField::sample(g, [](cplx z) { return 1.0 + z.real(); });
  EXPECT_THROW(vanishing_order_experiment(u, 1.0, 1.0, {0.1, 0.2}), Error);
  const auto huge = RealField::sample(g, [](cplx z) { return std::exp(40.0 + z.real()); });
  EXPECT_THROW(vanishing_order_experiment(huge, 1.0, 1.0), Error);
}

TEST(ThreeBall, CorpusInstanceChain) {
  InstanceSpec sp;
  sp.lambda = 2.0;
  sp.n = 64;
  const Instance I = build_instance(sp);
  const BeltramiSolution sol = solve_instance(I);
  const ThreeBallRecord r = three_ball_experiment(I.u, I.multiplier, I.stream, sol, 0.5, I.F, I.delta_prescribed);
  EXPECT_NEAR(r.theta, theta_exponent(0.5, 2.0).theta, 1e-15);
  EXPECT_LE(r.norm_u_Br2, r.norm_u_Br);
  EXPECT_LE(r.norm_u_Br, r.norm_u_B1);
  EXPECT_LE(r.norm_u_B1, r.norm_u_Bd);
  EXPECT_LE(r.norm_u_Bd, r.norm_u_Bb);
  EXPECT_NEAR(sample_bilinear(I.u, cplx(0.0, 0.0)), 1.0, 1e-12);
  double maxC = -1e300;
  for (const auto& s : r.steps)
    maxC = std::max(maxC, s.needed_C);
  EXPECT_EQ(r.implied_C, maxC);
  EXPECT_TRUE(std::isfinite(r.implied_C));
  EXPECT_GE(r.three_circle_margin, -0.1);
}

TEST(ThreeBall, HolomorphicFactorReconstructs) {
  InstanceSpec sp;
  sp.n = 48;
  const Instance I = build_instance(sp);
  const BeltramiSolution sol = solve_instance(I);
  const HolomorphicFactor hf = holomorphic_factor(I.stream.w1t, I.stream.w2t, sol);
  EXPECT_LE(hf.reconstruction, 1e-12);
}

TEST(Corpus, PrescribedDeltaMode) {
  InstanceSpec sp;
  sp.lambda = 1.0;
  sp.n = 32;
  sp.delta_override.reset();
  EXPECT_THROW(build_instance(sp), Error); // undefined at lambda = 1
  sp.lambda = 2.0;
  const Instance I = build_instance(sp);
  EXPECT_EQ(I.delta_used, I.delta_prescribed);
  EXPECT_GT(I.delta_used, 0.0);
}
