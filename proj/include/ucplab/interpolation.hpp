#pragma once

// Holomorphic factor h = P^{-1} w~, Hadamard three-circle checks, the theta
// exponent, the assembled three-ball chain and vanishing-order fits.

#include <functional>

#include "similarity.hpp"
#include "stream.hpp"

namespace ucplab {

struct HolomorphicFactor {
  ComplexField h1, h2;
  double holomorphy = 0.0;      // sup |dbar h| / sup |h| on the interior
  double reconstruction = 0.0;  // sup |P h - w~| / sup |w~|
};

/// h = P^{-1} (w1~, w2~) on the grid of the solution; w~ may live on a larger
/// grid that contains it cell for cell.
inline HolomorphicFactor holomorphic_factor(const ComplexField& w1t, const ComplexField& w2t,
                                            const BeltramiSolution& sol) {
  const GridSpec& g = sol.P.spec();
  auto restrict = [&](const ComplexField& f) {
    if (f.spec().same_as(g))
      return f;
    const double i0 = (g.x0 - f.spec().x0) / g.h, j0 = (g.y0 - f.spec().y0) / g.h;
    const auto ii = static_cast<std::size_t>(std::llround(i0)), jj = static_cast<std::size_t>(std::llround(j0));
    if (std::abs(f.spec().h - g.h) > 1e-12 * g.h || std::abs(i0 - static_cast<double>(ii)) > 1e-6 ||
        std::abs(j0 - static_cast<double>(jj)) > 1e-6)
      throw Error("holomorphic_factor: w~ grid does not contain the solution grid");
    return f.sub(Window{ii, ii + g.nx, jj, jj + g.ny});
  };
  const ComplexField a = restrict(w1t), b = restrict(w2t);
  HolomorphicFactor out{ComplexField(g), ComplexField(g)};
  double rec = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat2 Pi = sol.P_inv.at(k);
    out.h1[k] = Pi.a[0] * a[k] + Pi.a[1] * b[k];
    out.h2[k] = Pi.a[2] * a[k] + Pi.a[3] * b[k];
    const Mat2 P = sol.P.at(k);
    const cplx r1 = P.a[0] * out.h1[k] + P.a[1] * out.h2[k] - a[k];
    const cplx r2 = P.a[2] * out.h1[k] + P.a[3] * out.h2[k] - b[k];
    rec = std::max(rec, std::hypot(std::abs(r1), std::abs(r2)));
    scale = std::max(scale, std::hypot(std::abs(a[k]), std::abs(b[k])));
  }
  out.reconstruction = scale > 0.0 ? rec / scale : 0.0;
  const Window w = physical_interior(g, square_margin_fraction);
  const ComplexField d1 = dbar(out.h1), d2 = dbar(out.h2);
  const double hs = std::max(sup_abs(out.h1), sup_abs(out.h2));
  out.holomorphy = hs > 0.0 ? std::max(sup_abs(d1, w), sup_abs(d2, w)) / hs : 0.0;
  return out;
}

inline constexpr std::size_t circle_samples = 1024;

/// max |f| over equally spaced samples of the circle (starting at angle 0).
inline double circle_max(const std::function<cplx(cplx)>& f, cplx center, double radius,
                         std::size_t samples = circle_samples) {
  if (samples < 256)
    throw Error("circle_max: need at least 256 samples");
  double m = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = 2.0 * pi * static_cast<double>(k) / static_cast<double>(samples);
    m = std::max(m, std::abs(f(center + radius * cplx(std::cos(t), std::sin(t)))));
  }
  return m;
}

/// Same for a grid field, by bilinear interpolation.
template <typename T>
double circle_max(const Field<T>& f, cplx center, double radius, std::size_t samples = circle_samples) {
  const GridSpec& g = f.spec();
  if (center.real() - radius < g.x(0) - 1e-12 || center.real() + radius > g.x(g.nx - 1) + 1e-12 ||
      center.imag() - radius < g.y(0) - 1e-12 || center.imag() + radius > g.y(g.ny - 1) + 1e-12)
    throw Error("circle_max: circle leaves the grid");
  return circle_max([&](cplx z) { return static_cast<cplx>(sample_bilinear(f, z)); }, center, radius, samples);
}

struct ThreeCircle {
  double theta = 0.0; // ln(r3/r2) / ln(r3/r1)
  double M1 = 0.0, M2 = 0.0, M3 = 0.0;
  double margin = 0.0; // theta ln M1 + (1 - theta) ln M3 - ln M2
};

inline ThreeCircle three_circle(double M1, double M2, double M3, double r1, double r2, double r3) {
  if (!(0.0 < r1 && r1 < r2 && r2 < r3))
    throw Error("three_circle_check: need 0 < r1 < r2 < r3");
  ThreeCircle t;
  t.theta = std::log(r3 / r2) / std::log(r3 / r1);
  t.M1 = M1;
  t.M2 = M2;
  t.M3 = M3;
  t.margin = t.theta * std::log(M1) + (1.0 - t.theta) * std::log(M3) - std::log(M2);
  return t;
}

inline ThreeCircle three_circle_check(const std::function<cplx(cplx)>& h, double r1, double r2, double r3,
                                      cplx center = 0.0) {
  return three_circle(circle_max(h, center, r1), circle_max(h, center, r2), circle_max(h, center, r3), r1, r2, r3);
}

inline ThreeCircle three_circle_check(const ComplexField& h, double r1, double r2, double r3, cplx center = 0.0) {
  return three_circle(circle_max(h, center, r1), circle_max(h, center, r2), circle_max(h, center, r3), r1, r2, r3);
}

struct Theta {
  double d = 0.0;
  double theta = 0.0;            // ln d / ln(2d / r)
  double minus_inv_theta = 0.0;  // ln(r / (2d)) / ln d, as printed
  double ratio = 0.0;            // (1/theta) / (F |ln r|)
};

/// theta of the three-circle step on B_{r/2}, B_1, B_d with d = 1 + 1/(2F).
inline Theta theta_exponent(double r, double F_lambda) {
  if (!(r > 0.0 && r < 1.0))
    throw Error("theta_exponent: need 0 < r < 1");
  if (!(F_lambda >= 1.0))
    throw Error("theta_exponent: need F(lambda) >= 1");
  Theta t;
  t.d = half_width_d(F_lambda);
  t.minus_inv_theta = std::log(r / (2.0 * t.d)) / std::log(t.d);
  t.theta = std::log(t.d) / std::log(2.0 * t.d / r);
  t.ratio = (1.0 / t.theta) / (F_lambda * std::abs(std::log(r)));
  return t;
}

enum class FMode { One, Sqrt, Linear };

inline double F_of(FMode m, double lambda) {
  switch (m) {
  case FMode::One: return 1.0;
  case FMode::Sqrt: return std::sqrt(lambda);
  case FMode::Linear: return lambda;
  }
  return lambda;
}
inline const char* to_string(FMode m) {
  switch (m) {
  case FMode::One: return "one";
  case FMode::Sqrt: return "sqrt";
  case FMode::Linear: return "linear";
  }
  return "?";
}
inline FMode parse_fmode(const std::string& s) {
  if (s == "one" || s == "1")
    return FMode::One;
  if (s == "sqrt")
    return FMode::Sqrt;
  if (s == "linear" || s == "lambda")
    return FMode::Linear;
  throw Error("unknown F mode '" + s + "' (one | sqrt | linear)");
}

/// delta = (c0 sqrt(lambda) / ln lambda) exp(-m lambda); NaN at lambda = 1.
inline double prescribed_delta(double lambda, double m, double c0 = 1.0) {
  if (!(lambda > 1.0))
    return std::numeric_limits<double>::quiet_NaN();
  return c0 * std::sqrt(lambda) / std::log(lambda) * std::exp(-m * lambda);
}

/// One step LHS <= factor * exp(C lambda) * RHS of the chain and the C it needs.
struct ChainStep {
  std::string name;
  double log_lhs = 0.0, log_rhs = 0.0, log_factor = 0.0;
  double needed_C = 0.0; // (log_lhs - log_factor - log_rhs) / lambda
};

struct ThreeBallRecord {
  double lambda = 0.0, delta = 0.0, delta_prescribed = 0.0, r = 0.0, theta = 0.0, F = 0.0;
  double norm_u_B1 = 0.0, norm_u_Br = 0.0, norm_u_Br2 = 0.0, norm_u_Bd = 0.0, norm_u_Bb = 0.0;
  double norm_w1_B1 = 0.0, norm_w1_Br2 = 0.0, norm_w1_Bd = 0.0;
  double norm_w2_Br2 = 0.0, norm_w2_Bd = 0.0;
  double norm_P_Bd = 0.0, norm_Pinv_Bd = 0.0;
  double three_circle_margin = 0.0; // min over h1, h2 on (r/2, 1, d)
  std::vector<ChainStep> steps;
  double implied_C = 0.0;       // max over the steps of the needed C
  double implied_C_final = 0.0; // needed C of the final inequality alone
};

/// (ln|u|_{B1} + ln delta - theta ln(|u|_{Br} / r) - (1 - theta) ln|u|_{Bb}) / lambda
inline double implied_C_final(double nB1, double nBr, double nBb, double delta, double r, double theta,
                              double lambda) {
  return (std::log(nB1) + std::log(delta) - theta * (std::log(nBr) - std::log(r)) -
          (1.0 - theta) * std::log(nBb)) /
         lambda;
}

/**
 * Evaluates every norm of the three-ball chain on one instance. u and the
 * stream data live on the Q_b grid; sol is the Beltrami solution on the Q_d
 * sub-grid. Each step's needed constant is recorded; implied_C is their max.
 */
inline ThreeBallRecord three_ball_experiment(const RealField& u, const Multiplier& m, const StreamData& s,
                                             const BeltramiSolution& sol, double r, double F_lambda,
                                             double delta_prescribed = std::numeric_limits<double>::quiet_NaN()) {
  if (!s.has_transforms())
    throw Error("three_ball_experiment: stream data needs attach_transforms()");
  const Theta th = theta_exponent(r, F_lambda);
  const double d = th.d, b = half_width_b(F_lambda), lambda = m.lambda;
  ThreeBallRecord rec;
  rec.lambda = lambda;
  rec.delta = s.delta;
  rec.delta_prescribed = delta_prescribed;
  rec.r = r;
  rec.theta = th.theta;
  rec.F = F_lambda;
  auto ball = [](double rad) { return Region::ball(0.0, rad); };
  rec.norm_u_B1 = sup_norm(u, ball(1.0));
  rec.norm_u_Br = sup_norm(u, ball(r));
  rec.norm_u_Br2 = sup_norm(u, ball(0.5 * r));
  rec.norm_u_Bd = sup_norm(u, ball(d));
  rec.norm_u_Bb = sup_norm(u, ball(b - 1e-12));
  if (rec.norm_u_B1 == 0.0 || rec.norm_u_Br == 0.0 || rec.norm_u_Br2 == 0.0)
    throw Error("three_ball_experiment: degenerate norms (u vanishes on a ball)");
  rec.norm_w1_B1 = sup_norm(s.w1t, ball(1.0));
  rec.norm_w1_Br2 = sup_norm(s.w1t, ball(0.5 * r));
  rec.norm_w1_Bd = sup_norm(s.w1t, ball(d));
  rec.norm_w2_Br2 = sup_norm(s.w2t, ball(0.5 * r));
  rec.norm_w2_Bd = sup_norm(s.w2t, ball(d));

  // P on B_d: cells of the solution grid inside the ball
  const GridSpec& gs = sol.P.spec();
  for (std::size_t j = 0; j < gs.ny; ++j)
    for (std::size_t i = 0; i < gs.nx; ++i)
      if (std::abs(gs.point(i, j)) <= d) {
        rec.norm_P_Bd = std::max(rec.norm_P_Bd, opnorm(sol.P.at(i, j)));
        rec.norm_Pinv_Bd = std::max(rec.norm_Pinv_Bd, opnorm(sol.P_inv.at(i, j)));
      }
  const HolomorphicFactor hf = holomorphic_factor(s.w1t, s.w2t, sol);
  const double rd = std::min(d, std::min(gs.x(gs.nx - 1), gs.y(gs.ny - 1)) - 1e-9);
  double margin = std::numeric_limits<double>::infinity();
  double h1B1 = 0.0, h2B1 = 0.0, h1r = 0.0, h2r = 0.0, h1d = 0.0, h2d = 0.0;
  {
    const ThreeCircle t1 = three_circle_check(hf.h1, 0.5 * r, 1.0, rd);
    const ThreeCircle t2 = three_circle_check(hf.h2, 0.5 * r, 1.0, rd);
    margin = std::min(t1.margin, t2.margin);
    h1r = t1.M1, h1B1 = t1.M2, h1d = t1.M3;
    h2r = t2.M1, h2B1 = t2.M2, h2d = t2.M3;
  }
  rec.three_circle_margin = margin;

  auto step = [&](std::string name, double lhs, double rhs, double log_factor) {
    ChainStep c{std::move(name), std::log(lhs), std::log(rhs), log_factor, 0.0};
    c.needed_C = (c.log_lhs - c.log_factor - c.log_rhs) / lambda;
    rec.steps.push_back(c);
  };
  const double ld = std::log(s.delta), lr = std::log(r), th_ = th.theta;
  step("P_Bd", rec.norm_P_Bd, 1.0, 0.0);
  step("Pinv_Bd", rec.norm_Pinv_Bd, 1.0, 0.0);
  step("w1_B1_by_h", rec.norm_w1_B1, h1B1 + h2B1, 0.0);
  step("h_three_circle",
       h1B1 + h2B1,
       std::pow(h1r, th_) * std::pow(h1d, 1.0 - th_) + std::pow(h2r, th_) * std::pow(h2d, 1.0 - th_), 0.0);
  step("w1_Br2", rec.norm_w1_Br2, rec.norm_u_Br2, 0.0);
  step("w1_Bd", rec.norm_w1_Bd, rec.norm_u_Bd, 0.0);
  step("w2_Br2", rec.norm_w2_Br2, rec.norm_u_Br, -ld - lr);
  step("w2_Bd", rec.norm_w2_Bd, rec.norm_u_Bb, -ld);
  step("u_B1_by_w1", rec.norm_u_B1, rec.norm_w1_B1, 0.0);
  rec.implied_C_final = implied_C_final(rec.norm_u_B1, rec.norm_u_Br, rec.norm_u_Bb, s.delta, r, th_, lambda);
  rec.steps.push_back({"final", std::log(rec.norm_u_B1),
                       th_ * (std::log(rec.norm_u_Br) - lr) + (1.0 - th_) * std::log(rec.norm_u_Bb), -ld,
                       rec.implied_C_final});
  rec.implied_C = -std::numeric_limits<double>::infinity();
  for (const auto& c : rec.steps)
    rec.implied_C = std::max(rec.implied_C, c.needed_C);
  return rec;
}

struct VanishingHypotheses {
  double C1 = 10.0; // |u|_{B_b} <= exp(C1 lambda)
  double c1 = 10.0; // |u|_{B_1} >= exp(-c1 lambda^p)
  double p = 1.0;
};

struct VanishingRecord {
  double lambda = 0.0, F = 0.0, q = 1.0;
  std::vector<double> r_grid, log_norms;
  double slope = 0.0;          // least-squares slope of ln |u|_{B_r} against ln r
  double bound_exponent = 0.0; // C_hat lambda^q F(lambda)
  double C_hat = 0.0;          // slope / (lambda^q F(lambda))
  double resolution_bias = 0.0; // h / r_min, the documented O(h/r) bias scale
};

/// >= 6 radii, log-spaced in [min(16 h, 1/8), 1/2], decreasing.
inline std::vector<double> default_r_grid(const GridSpec& g, std::size_t count = 8) {
  count = std::max<std::size_t>(count, 6);
  const double lo = std::min(16.0 * g.h, 0.125), hi = 0.5;
  if (!(lo < hi))
    throw Error("vanishing: grid too coarse for radii in [16h, 1/2]");
  std::vector<double> r;
  for (std::size_t k = 0; k < count; ++k)
    r.push_back(hi * std::pow(lo / hi, static_cast<double>(k) / static_cast<double>(count - 1)));
  return r;
}

inline VanishingRecord vanishing_order_experiment(const RealField& u, double lambda, double F_lambda,
                                                  std::vector<double> r_grid = {},
                                                  const VanishingHypotheses& hyp = {}, double C_hat = -1.0) {
  VanishingRecord rec;
  rec.lambda = lambda;
  rec.F = F_lambda;
  rec.q = std::max(1.0, hyp.p);
  const double b = half_width_b(F_lambda);
  const auto& g = u.spec();
  if (r_grid.empty())
    r_grid = default_r_grid(g);
  if (r_grid.size() < 2 || !std::is_sorted(r_grid.rbegin(), r_grid.rend()))
    throw Error("vanishing_order_experiment: r_grid must be decreasing with at least two radii");
  const double nb = sup_norm(u, Region::ball(0.0, std::min(b, g.half_side()) - 1e-12));
  if (std::log(nb) > hyp.C1 * lambda)
    throw Error("vanishing_order_experiment: hypothesis |u|_{B_b} <= exp(C1 lambda) fails");
  const double n1 = sup_norm(u, Region::ball(0.0, 1.0));
  if (std::log(n1) < -hyp.c1 * std::pow(lambda, hyp.p))
    throw Error("vanishing_order_experiment: hypothesis |u|_{B_1} >= exp(-c1 lambda^p) fails");
  rec.r_grid = r_grid;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : r_grid) {
    const double y = std::log(sup_norm(u, Region::ball(0.0, r)));
    const double x = std::log(r);
    rec.log_norms.push_back(y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto k = static_cast<double>(r_grid.size());
  rec.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double scale = std::pow(lambda, rec.q) * F_lambda;
  rec.C_hat = C_hat >= 0.0 ? C_hat : rec.slope / scale;
  rec.bound_exponent = rec.C_hat * scale;
  rec.resolution_bias = g.h / r_grid.back();
  return rec;
}

} // namespace ucplab
