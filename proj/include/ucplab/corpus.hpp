#pragma once

// One corpus instance: potential, Dirichlet solution, multiplier and stream
// data on Q_b, plus the Beltrami solve for A = G on Q_d.

#include <cstdint>
#include <optional>

#include "interpolation.hpp"
#include "similarity.hpp"

namespace ucplab {

struct InstanceSpec {
  double lambda = 1.0;
  std::uint64_t seed = 1;
  std::size_t n = 128;
  FMode F_mode = FMode::Linear;
  std::optional<double> delta_override = 0.1; // nullopt: prescribed delta
  double c0 = 1.0;                             // constant of the prescribed delta
  std::size_t boundary_modes = 6;
};

struct Instance {
  InstanceSpec spec;
  double F = 1.0, b = 2.0, d = 1.5;
  double delta_used = 0.0;
  double delta_prescribed = 0.0;
  double m_hat = 0.0;     // 2 c_inf C3, measured
  double u_scale = 1.0;   // u was divided by |u(0)| = u_scale
  GridSpec grid;
  Potential potential;
  RealField u;
  Multiplier multiplier;
  StreamData stream;
};

/// m = 2 c_inf C3 with c_inf = ||T_{Q_b}|| and C3 = sup |grad log phi| / lambda.
inline double measured_m(const Multiplier& m) {
  const GridSpec& g = m.spec();
  const double c_inf = kernel_mass_exact(Rect{g.x0, g.x1(), g.y0, g.y1()}) / pi;
  return 2.0 * c_inf * sup_abs(gradient_modulus(m.log_phi)) / m.lambda;
}

namespace corpus_detail {

inline void fill(Instance& I, double delta) {
  const InstanceSpec& sp = I.spec;
  I.delta_used = delta;
  I.potential = gen_potential(sp.seed, sp.lambda, delta, I.grid);
  Rng rng(sp.seed * 7 + 1);
  const TrigModes trace = TrigModes::random(rng, sp.boundary_modes);
  I.u = solve_dirichlet(I.potential.V(), [&](cplx z) { return trace(z); }, RealField(I.grid, 0.0));
  const double u0 = sample_bilinear(I.u, cplx(0.0, 0.0));
  if (!(std::abs(u0) > 1e-8 * std::max(1.0, sup_abs(I.u))))
    throw Error("corpus instance: u(0) vanishes, normalization undefined");
  I.u_scale = std::abs(u0);
  I.u *= 1.0 / I.u_scale;
  I.multiplier = build_multiplier(I.potential);
  I.m_hat = measured_m(I.multiplier);
}

} // namespace corpus_detail

/**
 * gen -> solve -> multiplier -> stream on Q_b, b = 1 + 1/F. The Dirichlet
 * trace is seeded from seed*7+1 and u is normalized to |u(0)| = 1. In
 * prescribed mode the instance is first built with delta = 0.1 to measure m,
 * then rebuilt with the prescribed delta.
 */
inline Instance build_instance(const InstanceSpec& sp) {
  if (sp.n < 16)
    throw Error("corpus instance: n must be at least 16");
  Instance I;
  I.spec = sp;
  I.F = F_of(sp.F_mode, sp.lambda);
  I.b = half_width_b(I.F);
  I.d = half_width_d(I.F);
  I.grid = GridSpec::square(0.0, I.b, sp.n);
  if (sp.delta_override) {
    corpus_detail::fill(I, *sp.delta_override);
    I.delta_prescribed = prescribed_delta(sp.lambda, I.m_hat, sp.c0);
  } else {
    corpus_detail::fill(I, 0.1);
    const double dp = prescribed_delta(sp.lambda, I.m_hat, sp.c0);
    if (!(dp > 0.0))
      throw Error("corpus instance: prescribed delta undefined at lambda = 1 (use an override)");
    if (dp > 1.0)
      throw Error("corpus instance: prescribed delta exceeds 1");
    corpus_detail::fill(I, dp);
    I.delta_prescribed = dp;
  }
  I.stream = build_stream(I.u, I.multiplier, I.delta_used);
  attach_transforms(I.stream, CauchyOp(I.grid));
  return I;
}

inline Window q_d_window(const Instance& I) { return box_window(I.grid, -I.d, I.d, -I.d, I.d); }

/// Global Beltrami solve for A = G restricted to Q_d.
inline BeltramiSolution solve_instance(const Instance& I, const GlobalConfig& cfg = {}) {
  return global_solve(I.stream.G.sub(q_d_window(I)), cfg);
}

} // namespace ucplab
