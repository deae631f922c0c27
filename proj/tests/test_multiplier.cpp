#include <gtest/gtest.h>

#include "support.hpp"
#include "ucplab/cauchy.hpp"
#include "ucplab/multiplier.hpp"

using namespace ucplab;
using testing_support::min_order;

TEST(Multiplier, ConstantPotentialReproducesExponential) {
  // V_delta = 2 lambda^2 with data phi_1 = exp(sqrt 2 lambda x): phi = phi_1
  const double lambda = 1.0;
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256}) {
    const auto g = GridSpec::square(0.0, half_width_b(lambda), n);
    const RealField V(g, 2.0 * lambda * lambda);
    const BoundaryFn phi1 = [&](cplx z) { return std::exp(std::sqrt(2.0) * lambda * z.real()); };
    const Multiplier m = build_multiplier(V, lambda, phi1);
    const double e = sup_abs(m.phi() - RealField::sample(g, [&](cplx z) { return phi1(z); }));
    EXPECT_LE(e, 10.0 * g.h * g.h) << "n = " << n;
    errs.push_back(e);
  }
  EXPECT_GE(min_order(errs), 1.8);
}

TEST(Multiplier, ZeroPotentialGivesConstant) {
  const auto g = GridSpec::square(0.0, 2.0, 32);
  const Multiplier m = build_multiplier(RealField(g, 0.0), 1.0);
  for (double v : m.log_phi.values())
    EXPECT_NEAR(v, std::sqrt(8.0), 1e-9);
}

TEST(Multiplier, CertificateOnRandomPotentials) {
  for (double lambda : {1.0, 2.0, 4.0})
    for (std::uint64_t seed : {1, 2}) {
      const auto g = GridSpec::square(0.0, half_width_b(lambda), 64);
      const Multiplier m = build_multiplier(gen_potential(seed, lambda, 0.1, g));
      const auto& c = m.certificate;
      EXPECT_TRUE(c.converged);
      EXPECT_TRUE(c.within_bounds);
      EXPECT_GE(c.log_min, -std::sqrt(8.0) * lambda);
      EXPECT_LE(c.log_max, std::sqrt(8.0) * lambda + 1e-12);
      EXPECT_LE(c.max_monotonicity_violation, 1e-7);
      EXPECT_LE(c.discrete_residual, 1e-7);
      EXPECT_GE(c.lower_margin, -1e-9); // phi >= phi_1
    }
}

TEST(Multiplier, LogSpaceStaysFiniteAtLargeLambda) {
  const double lambda = 300.0; // exp(sqrt 8 lambda) overflows a double
  const auto g = GridSpec::square(0.0, half_width_b(lambda), 32);
  MultiplierConfig cfg;
  cfg.max_iter = 1000;
  const Multiplier m = build_multiplier(gen_potential(3, lambda, 0.1, g), std::nullopt, cfg);
  EXPECT_TRUE(m.log_phi.all_finite());
  EXPECT_TRUE(m.certificate.within_bounds);
}

TEST(Multiplier, LogIdentityConverges) {
  std::vector<double> errs;
  for (std::size_t n : {32, 64, 128}) {
    const auto g = GridSpec::square(0.0, 2.0, n);
    const auto p = gen_potential(3, 1.0, 0.1, g);
    errs.push_back(sup_abs(log_identity_residual(build_multiplier(p), shifted_potential(p)), physical_interior(g, 0.125)));
  }
  EXPECT_GE(min_order(errs), 1.0);
}

TEST(Multiplier, GradientBoundBandAcrossLambda) {
  // C2 = sup_{Q_d} |grad log phi| / lambda, max over seeds
  std::vector<double> c2;
  for (double lambda : {1.0, 2.0, 4.0}) {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto g = GridSpec::square(0.0, half_width_b(lambda), 64);
      worst = std::max(worst, log_gradient_bound(build_multiplier(gen_potential(seed, lambda, 0.1, g)), lambda));
    }
    c2.push_back(worst);
  }
  EXPECT_LE(*std::max_element(c2.begin(), c2.end()) / *std::min_element(c2.begin(), c2.end()), 3.0);
}

TEST(Multiplier, ShiftedPotentialRejectsBreach) {
  const auto g = GridSpec::square(0.0, 1.0, 16);
  Potential p = gen_potential(1, 1.0, 0.5, g);
  p.Vminus = RealField(g, 3.0);
  EXPECT_THROW(shifted_potential(p), Error);
}

TEST(Multiplier, CaccioppoliClaim) {
  const auto g = GridSpec::square(0.0, 2.0, 64);
  const Multiplier m = build_multiplier(gen_potential(2, 1.0, 0.1, g));
  // int_{B_r} |grad log phi / lambda|^2 / r^2 stays bounded as r shrinks
  double hi = 0.0;
  for (double r : {0.5, 0.25, 0.125, 0.0625})
    hi = std::max(hi, caccioppoli_check(m, 0.0, r, 1.0));
  EXPECT_LE(hi, caccioppoli_check(m, 0.0, 0.5, 1.0) * (1 + 1e-12));
}
