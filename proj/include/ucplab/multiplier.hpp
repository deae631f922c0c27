#pragma once

// The positive multiplier phi with Lap phi = V_delta phi, built by monotone
// iteration from the constant supersolution exp(sqrt 8 lambda), and the
// bound checks run against it.

#include <cmath>
#include <optional>

#include "elliptic.hpp"

namespace ucplab {

/// V_delta = V+ - V- + delta^2, checked against 0 <= V_delta <= 2 lambda^2.
inline RealField shifted_potential(const Potential& p) {
  const double d2 = p.delta * p.delta;
  const double cap = 2.0 * p.lambda * p.lambda;
  RealField out(p.spec());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double v = p.Vplus[k] - p.Vminus[k] + d2;
    if (v < -1e-14 * cap || v > cap * (1.0 + 1e-14))
      throw Error("shifted_potential: V_delta outside [0, 2 lambda^2] (hypothesis breach)");
    out[k] = std::clamp(v, 0.0, cap);
  }
  return out;
}

struct MultiplierCertificate {
  double log_min = 0.0;             // min log phi
  double log_max = 0.0;             // max log phi
  double log_bound = 0.0;           // sqrt 8 lambda
  bool within_bounds = false;       // exp(-sqrt8 lambda) <= phi <= exp(sqrt8 lambda)
  double lower_margin = 0.0;        // min (log phi - log phi_1), default boundary only
  double max_monotonicity_violation = 0.0; // max (phi^{k+1} - phi^k) / sup phi^k
  double final_increment = 0.0;     // sup |phi^{k+1} - phi^k| / sup phi^k
  double discrete_residual = 0.0;   // sup |(Lap_h - V_delta) phi| / sup |V_delta phi| on interior
  bool converged = false;
};

struct Multiplier {
  RealField log_phi;
  double lambda = 1.0;
  double delta = 0.0;
  std::size_t iterations = 0;
  MultiplierCertificate certificate;

  [[nodiscard]] RealField phi() const { return log_phi.map([](double v) { return std::exp(v); }); }
  /// phi / sup phi, safe for any lambda.
  [[nodiscard]] RealField phi_scaled() const {
    const double m = *std::max_element(log_phi.values().begin(), log_phi.values().end());
    return log_phi.map([m](double v) { return std::exp(v - m); });
  }
  [[nodiscard]] const GridSpec& spec() const { return log_phi.spec(); }
};

struct MultiplierConfig {
  double tol = 1e-8;
  std::size_t max_iter = 200;
  SolveConfig inner{1e-12, 20000};
};

/**
 * Monotone iteration (-Lap + 2 lambda^2) phi^{k+1} = (2 lambda^2 - V_delta) phi^k
 * from phi^0 = phi_2 = exp(sqrt 8 lambda), run on psi = phi / phi_2 so the
 * numbers stay O(1). `boundary` overrides the default constant data phi_2.
 */
inline Multiplier build_multiplier(const RealField& V_delta, double lambda,
                                   const std::optional<BoundaryFn>& boundary = std::nullopt,
                                   const MultiplierConfig& cfg = {}) {
  const GridSpec& g = V_delta.spec();
  if (!(lambda >= 1.0))
    throw Error("build_multiplier: lambda must be >= 1");
  const double two_l2 = 2.0 * lambda * lambda;
  for (double v : V_delta.values())
    if (v < 0.0 || v > two_l2 * (1.0 + 1e-14))
      throw Error("build_multiplier: V_delta outside [0, 2 lambda^2]");
  const double sqrt8l = std::sqrt(8.0) * lambda;
  if (!boundary) {
    const double reach = std::max({std::abs(g.x0), std::abs(g.x1()), std::abs(g.y0), std::abs(g.y1())});
    if (reach > 2.0 + 1e-12)
      throw Error("build_multiplier: footprint must lie in Q_2 so that phi_1 <= phi_2");
  }

  // psi on the boundary ring and initial interior guess psi^0 = 1
  RealField psi(g, 1.0);
  if (boundary)
    psi = boundary_start(g, [&](cplx z) { return (*boundary)(z) * std::exp(-sqrt8l); });
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      psi(i, j) = 1.0;

  const RealField shift(g, two_l2);
  const RealField weight = RealField(g, two_l2) - V_delta;
  MultiplierCertificate cert;
  std::size_t it = 0;
  for (; it < cfg.max_iter; ++it) {
    RealField rhs = weight * psi;
    RealField next = solve_dirichlet(shift, psi, rhs, cfg.inner);
    const double scale = sup_abs(psi);
    double inc = 0.0, up = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
      inc = std::max(inc, std::abs(next[k] - psi[k]));
      up = std::max(up, next[k] - psi[k]);
    }
    cert.max_monotonicity_violation = std::max(cert.max_monotonicity_violation, up / scale);
    if (up > 10.0 * cfg.tol * scale)
      throw Error("build_multiplier: monotonicity violated (discretization too coarse)");
    psi = std::move(next);
    cert.final_increment = inc / scale;
    if (inc <= cfg.tol * scale) {
      cert.converged = true;
      ++it;
      break;
    }
  }
  if (!cert.converged)
    throw NonConvergence("build_multiplier: iteration cap reached", cert.final_increment);

  for (double v : psi.values())
    if (!(v > 0.0))
      throw Error("build_multiplier: phi lost positivity");

  Multiplier m;
  m.lambda = lambda;
  m.iterations = it;
  m.log_phi = psi.map([sqrt8l](double v) { return std::log(v) + sqrt8l; });

  cert.log_bound = sqrt8l;
  cert.log_min = *std::min_element(m.log_phi.values().begin(), m.log_phi.values().end());
  cert.log_max = *std::max_element(m.log_phi.values().begin(), m.log_phi.values().end());
  cert.within_bounds = cert.log_min >= -sqrt8l && cert.log_max <= sqrt8l;
  if (!boundary) {
    // phi_1 = exp(sqrt 2 lambda x) is a discrete subsolution, so phi >= phi_1
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        margin = std::min(margin, m.log_phi(i, j) - std::sqrt(2.0) * lambda * g.x(i));
    cert.lower_margin = margin;
    if (margin < -1e-8)
      throw Error("build_multiplier: lower bound phi_1 breached");
  }
  const RealField r = discrete_residual(V_delta, psi, RealField(g, 0.0));
  double rs = 0.0, vs = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      rs = std::max(rs, std::abs(r(i, j)));
      vs = std::max(vs, std::abs(V_delta(i, j) * psi(i, j)) + 4.0 * psi(i, j) / (g.h * g.h));
    }
  cert.discrete_residual = vs > 0.0 ? rs / vs : 0.0;
  m.certificate = cert;
  return m;
}

inline Multiplier build_multiplier(const Potential& p, const std::optional<BoundaryFn>& boundary = std::nullopt,
                                   const MultiplierConfig& cfg = {}) {
  Multiplier m = build_multiplier(shifted_potential(p), p.lambda, boundary, cfg);
  m.delta = p.delta;
  return m;
}

inline double half_width_d(double F_lambda) { return 1.0 + 1.0 / (2.0 * F_lambda); }
inline double half_width_b(double F_lambda) { return 1.0 + 1.0 / F_lambda; }

/// |grad f| as a field.
inline RealField gradient_modulus(const RealField& f) {
  auto [fx, fy] = gradient(f);
  RealField out(f.spec());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::hypot(fx[k], fy[k]);
  return out;
}

/// Empirical C_2: sup over Q_d of |grad log phi| / lambda, d = 1 + 1/(2 F(lambda)).
inline double log_gradient_bound(const Multiplier& m, double F_lambda) {
  const double d = half_width_d(F_lambda);
  return sup_norm(gradient_modulus(m.log_phi), Region::cube(0.0, d)) / m.lambda;
}

/// l2_sq(grad log phi / (C_norm lambda), B_r(z)) / r^2.
inline double caccioppoli_check(const Multiplier& m, cplx z, double r, double C_norm) {
  if (!(r > 0.0) || !(C_norm > 0.0))
    throw Error("caccioppoli_check: r and C_norm must be positive");
  RealField g = gradient_modulus(m.log_phi);
  g *= 1.0 / (C_norm * m.lambda);
  return l2_sq(g, Region::ball(z, r)) / (r * r);
}

/// r sup_{B_r} |grad f| / (lambda^2 sup_{B_{alpha r}} |f|).
inline double gradient_estimate_check(const RealField& f, double r, double alpha, double lambda, cplx center = 0.0) {
  if (!(alpha > 1.0))
    throw Error("gradient_estimate_check: alpha must exceed 1");
  const double denom = lambda * lambda * sup_norm(f, Region::ball(center, alpha * r));
  if (denom == 0.0)
    return 0.0;
  return r * sup_norm(gradient_modulus(f), Region::ball(center, r)) / denom;
}

inline double gradient_estimate_check(const Multiplier& m, double r, double alpha, cplx center = 0.0) {
  return gradient_estimate_check(m.phi_scaled(), r, alpha, m.lambda, center);
}

/// Lap Phi + |grad Phi|^2 - V_delta for Phi = log phi.
inline RealField log_identity_residual(const Multiplier& m, const RealField& V_delta) {
  const RealField L = laplacian(m.log_phi);
  const RealField G = gradient_modulus(m.log_phi);
  RealField out(m.spec());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = L[k] + G[k] * G[k] - V_delta[k];
  return out;
}

} // namespace ucplab
