#pragma once

// Invariant suites per module. Each check records its measured value, the
// tolerance and the relation it was held to; the JSON report layout is fixed.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "landis.hpp"

namespace ucplab {

struct InvariantResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation; // "<=", ">=", "==" or "bool"
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<InvariantResult> results;

  [[nodiscard]] bool passed() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  }
  [[nodiscard]] std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; }));
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = "ucplab.verify/1";
    j["suite"] = suite;
    j["passed"] = passed();
    j["counts"] = {{"total", results.size()}, {"passed", results.size() - failures()}, {"failed", failures()}};
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results)
      j["results"].push_back({{"suite", r.suite},
                              {"name", r.name},
                              {"passed", r.passed},
                              {"value", std::isfinite(r.value) ? nlohmann::ordered_json(r.value) : nullptr},
                              {"tolerance", r.tolerance},
                              {"relation", r.relation},
                              {"detail", r.detail}});
    return j;
  }
};

using CurlFn = std::function<Vec3Field<double>(const Vec3Field<double>&, double)>;

struct VerifyOptions {
  /// curl_delta used by the stream identities; tests inject faulty versions.
  CurlFn curl = [](const Vec3Field<double>& F, double d) { return curl_delta(F, d); };
};

namespace verify_detail {

class Recorder {
public:
  Recorder(VerifyReport& r, std::string suite) : rep_(r), suite_(std::move(suite)) {}

  void le(const std::string& name, double v, double tol, std::string detail = {}) {
    push(name, v <= tol, v, tol, "<=", std::move(detail));
  }
  void ge(const std::string& name, double v, double tol, std::string detail = {}) {
    push(name, v >= tol, v, tol, ">=", std::move(detail));
  }
  void is(const std::string& name, bool ok, double v = 0.0, std::string detail = {}) {
    push(name, ok, v, 0.0, "bool", std::move(detail));
  }
  /// Runs fn; an exception becomes a failed entry under `name`.
  template <typename Fn> void guard(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      push(name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "bool", std::string("error: ") + e.what());
    }
  }

private:
  void push(const std::string& name, bool ok, double v, double tol, const char* rel, std::string detail) {
    rep_.results.push_back({suite_, name, ok && !std::isnan(v), v, tol, rel, std::move(detail)});
  }
  VerifyReport& rep_;
  std::string suite_;
};

inline double order(const std::vector<double>& errs) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < errs.size(); ++k)
    m = std::min(m, std::log2(errs[k] / errs[k + 1]));
  return m;
}

inline std::string list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(4);
  for (std::size_t k = 0; k < v.size(); ++k)
    os << (k ? ", " : "") << v[k];
  return os.str();
}

struct SmoothFn {
  TrigModes re, im;
  explicit SmoothFn(std::uint64_t seed) {
    Rng rng(seed);
    re = TrigModes::random(rng, 4, 1.0);
    im = TrigModes::random(rng, 4, 1.0);
  }
  cplx operator()(cplx z) const { return {re(z), im(z)}; }
};

inline GridSpec unit(std::size_t n) { return GridSpec::square({0.0, 0.0}, 1.0, n); }

} // namespace verify_detail

inline void verify_field(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "field");
  r.guard("gradient_encoding", [&] {
    double e = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto f = ComplexField::sample(unit(48), SmoothFn(s));
      auto diff = dbar(f) - del(f);
      diff *= cplx(0.0, -1.0);
      e = std::max({e, sup_abs(dbar(f) + del(f) - d_dx(f)), sup_abs(diff - d_dy(f))});
    }
    r.le("gradient_encoding", e, 1e-12, "dbar f + del f = f_x and (dbar f - del f)/i = f_y");
  });
  r.guard("laplacian_four_del_dbar_order", [&] {
    std::vector<double> errs;
    const SmoothFn fn(3);
    for (std::size_t n : {64, 128, 256}) {
      const auto f = RealField::sample(unit(n), [&](cplx z) { return fn(z).real(); });
      auto d = del(dbar(f));
      d *= cplx(4.0);
      errs.push_back(sup_abs(to_complex(laplacian(f)) - d, interior(f.spec(), 4)));
    }
    r.ge("laplacian_four_del_dbar_order", order(errs), 1.8, "errors " + list(errs));
  });
  r.guard("sup_norm_monotone", [&] {
    const auto f = ComplexField::sample(unit(64), SmoothFn(11));
    bool ok = true;
    double prev = 0.0;
    for (double rad : {0.1, 0.2, 0.4, 0.8}) {
      const double b = sup_norm(f, Region::ball({0.05, 0.0}, rad));
      ok = ok && b >= prev && b <= sup_norm(f, Region::cube({0.05, 0.0}, rad));
      prev = b;
    }
    r.is("sup_norm_monotone", ok, prev);
  });
  r.guard("l2_sq_additive", [&] {
    const auto f = ComplexField::sample(unit(64), SmoothFn(12));
    const double total = l2_sq(f, Region::cube({0, 0}, 0.5));
    double parts = 0.0;
    for (double sx : {-0.25, 0.25})
      for (double sy : {-0.25, 0.25})
        parts += l2_sq(f, Region::cube({sx, sy}, 0.25));
    r.le("l2_sq_additive", std::abs(parts - total) / total, 1e-12);
  });
}

inline void verify_elliptic(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "elliptic");
  r.guard("solver_residual", [&] {
    const auto g = unit(64);
    const auto p = gen_potential(21, 2.0, 0.1, g);
    Rng rng(99);
    const auto trace = TrigModes::random(rng, 6);
    const auto u = solve_dirichlet(p.V(), [&](cplx z) { return trace(z); }, RealField(g, 0.0));
    const double scale = sup_abs(boundary_start(g, [&](cplx z) { return trace(z); }));
    const auto res = discrete_residual(p.V(), u, RealField(g, 0.0));
    r.le("solver_residual", sup_abs(res) * g.h * g.h / scale, 1e-8, "h^2 |(-Lap_h + V) u| / |g|");
  });
  r.guard("maximum_principle", [&] {
    const auto g = unit(64);
    const auto p = gen_potential(5, 2.0, 0.0, g);
    Rng rng(5);
    const auto trace = TrigModes::random(rng, 5);
    const auto start = boundary_start(g, [&](cplx z) { return trace(z); });
    const auto u = solve_dirichlet(p.V(), start, RealField(g, 0.0));
    double gmin = 0.0, gmax = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny) {
          gmin = std::min(gmin, start(i, j));
          gmax = std::max(gmax, start(i, j));
        }
    double excess = 0.0;
    for (double v : u.values())
      excess = std::max({excess, gmin - v, v - gmax});
    r.le("maximum_principle", excess, g.h, "overshoot beyond [min(0, g), max(0, g)]");
  });
  r.guard("rescale_composes", [&] {
    const auto src = unit(128);
    const auto u = RealField::sample(src, [](cplx z) { return std::cos(z.real() + 2 * z.imag()); });
    const RealField V(src, 1.0);
    const auto tgt = unit(64);
    const auto a = rescale(u, V, 0.0, 0.8, unit(128));
    const auto b = rescale(a.u, a.V, 0.0, 0.5, tgt);
    const auto c = rescale(u, V, 0.0, 0.4, tgt);
    r.le("rescale_composes", std::max(sup_abs(b.u - c.u), sup_abs(b.V - c.V)), 1e-3);
  });
}

inline void verify_multiplier(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "multiplier");
  r.guard("certificate", [&] {
    const double lambda = 2.0;
    const auto g = GridSpec::square(0.0, half_width_b(lambda), 64);
    const auto p = gen_potential(3, lambda, 0.1, g);
    const MultiplierConfig cfg;
    const auto m = build_multiplier(p, std::nullopt, cfg);
    const auto& c = m.certificate;
    r.le("iteration_monotone", c.max_monotonicity_violation, 10.0 * cfg.tol);
    r.le("converged_residual", c.discrete_residual, 10.0 * cfg.tol);
    r.is("log_bounds", c.within_bounds, c.log_max, "exp(-sqrt 8 lambda) <= phi <= exp(sqrt 8 lambda)");
    const RealField Vd = shifted_potential(p);
    const double l2 = 2.0 * lambda * lambda;
    const auto phi1 = RealField::sample(g, [&](cplx z) { return std::exp(std::sqrt(2.0) * lambda * z.real()); });
    const RealField sub = laplacian(phi1) - Vd * phi1;
    double worst_sub = 0.0, worst_super = 0.0;
    const Window w = interior(g, 1);
    for (std::size_t j = w.j0; j < w.j1; ++j)
      for (std::size_t i = w.i0; i < w.i1; ++i) {
        worst_sub = std::max(worst_sub, -sub(i, j) / (l2 * phi1(i, j)));
        worst_super = std::max(worst_super, -Vd(i, j)); // Lap phi2 - V_delta phi2 for constant phi2
      }
    r.le("subsolution_phi1", worst_sub, 10.0 * g.h * g.h * l2, "(Lap_h - V_delta) phi1 >= -O(h^2)");
    r.le("supersolution_phi2", worst_super, 0.0, "(Lap_h - V_delta) phi2 <= 0");
  });
  r.guard("log_identity_order", [&] {
    std::vector<double> errs;
    for (std::size_t n : {32, 64, 128}) {
      const auto g = GridSpec::square(0.0, 2.0, n);
      const auto p = gen_potential(3, 1.0, 0.1, g);
      const auto m = build_multiplier(p);
      errs.push_back(sup_abs(log_identity_residual(m, shifted_potential(p)), physical_interior(g, 0.125)));
    }
    r.ge("log_identity_order", order(errs), 1.0, "Lap Phi + |grad Phi|^2 - V_delta: " + list(errs));
  });
}

inline void verify_stream(VerifyReport& rep, const VerifyOptions& opt) {
  using namespace verify_detail;
  Recorder r(rep, "stream");
  r.guard("modulus_preservation", [&] {
    InstanceSpec sp;
    sp.lambda = 2.0;
    sp.n = 48;
    const Instance I = build_instance(sp);
    const StreamData& s = I.stream;
    double ea = 0.0, ed = 0.0;
    for (std::size_t k = 0; k < s.v.size(); ++k)
      if (std::abs(s.w2[k]) > s.w2_threshold) {
        ea = std::max(ea, std::abs(std::abs(s.alphatilde[k]) - std::abs(s.alpha[k])));
        ed = std::max(ed, std::abs(std::abs(s.deltatilde[k]) - s.delta));
      }
    r.le("modulus_alpha_tilde", ea, 1e-12);
    r.le("modulus_delta_tilde", ed, 1e-12);
  });
  r.guard("div_curl_vanishes", [&] {
    const double delta = 0.3;
    const auto g = unit(48);
    const SmoothFn a(1), b(2), c(3);
    Vec3Field<double> F{RealField::sample(g, [&](cplx z) { return a(z).real(); }),
                        RealField::sample(g, [&](cplx z) { return b(z).real(); }),
                        RealField::sample(g, [&](cplx z) { return c(z).real(); })};
    const RealField d = div_delta(opt.curl(F, delta), delta);
    const Window w = interior(g, 2);
    r.le("div_curl_vanishes", sup_abs(d, w) / sup_abs(F, w), 1e-10, "div_delta curl_delta F = 0");
    const RealField f = F.F1;
    const auto cg = opt.curl(nabla_delta(f, delta), delta);
    r.le("curl_grad_vanishes", sup_abs(cg, w) / sup_abs(f, w), 1e-10, "curl_delta nabla_delta f = 0");
  });
  r.guard("double_curl_identity", [&] {
    const double delta = 0.3;
    const SmoothFn a(4), b(5), c(6);
    std::vector<double> errs;
    for (std::size_t n : {32, 64, 128}) {
      const auto g = unit(n);
      Vec3Field<double> F{RealField::sample(g, [&](cplx z) { return a(z).real(); }),
                          RealField::sample(g, [&](cplx z) { return b(z).imag(); }),
                          RealField::sample(g, [&](cplx z) { return c(z).real(); })};
      const auto cc = opt.curl(opt.curl(F, delta), delta);
      const auto gd = nabla_delta(div_delta(F, delta), delta);
      const double d2 = delta * delta;
      Vec3Field<double> lhs{cc.F1 + laplacian(F.F1) + F.F1 * d2 - gd.F1, cc.F2 + laplacian(F.F2) + F.F2 * d2 - gd.F2,
                            cc.F3 + laplacian(F.F3) + F.F3 * d2 - gd.F3};
      errs.push_back(sup_abs(lhs, physical_interior(g, 0.125)));
    }
    const bool small = errs.back() <= 1e-2;
    r.ge("double_curl_identity_order", small ? order(errs) : -1.0, 1.8,
         "curl curl F + (Lap + delta^2) F - nabla div F: " + list(errs));
  });
  r.guard("residuals_refine", [&] {
    std::map<StreamResidual, std::vector<double>> errs;
    for (std::size_t n : {32, 64, 128}) {
      InstanceSpec sp;
      sp.lambda = 1.0;
      sp.n = n;
      const Instance I = build_instance(sp);
      for (auto k : all_stream_residuals)
        errs[k].push_back(residual(I.stream, k, I.d));
    }
    for (auto k : all_stream_residuals)
      r.ge(std::string("refine_") + to_string(k), order(errs[k]), 0.9, list(errs[k]));
  });
}

inline void verify_cauchy(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "cauchy");
  r.guard("linearity", [&] {
    const auto g = unit(64);
    const CauchyOp T(g);
    const auto F = ComplexField::sample(g, SmoothFn(1));
    const auto G = ComplexField::sample(g, SmoothFn(2));
    const cplx a(0.7, -1.3), b(-2.0, 0.4);
    const auto lhs = T.transform(F * a + G * b);
    const auto rhs = T.transform(F) * a + T.transform(G) * b;
    r.le("linearity", sup_abs(lhs - rhs) / sup_abs(rhs), 1e-12);
  });
  r.guard("operator_norm_consistency", [&] {
    double worst = 0.0;
    for (std::size_t n : {32, 64}) {
      const auto g = unit(n);
      const CauchyOp T(g);
      for (std::uint64_t s = 1; s <= 4; ++s) {
        const auto F = ComplexField::sample(g, SmoothFn(s));
        worst = std::max(worst, sup_abs(T.transform(F)) / (c_infty_exact() * sup_abs(F)));
      }
    }
    r.le("operator_norm_consistency", worst, 1.0, "|T F| / (c_inf |F|)");
  });
  r.guard("strip_constant_stable", [&] {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (long k : {1L, 3L, 7L, 15L}) {
      const double d = admissible_delta(k);
      const double c = measured_C1(d);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    r.le("strip_constant_band", hi / lo, 2.0, "C1(delta) = |T_{R_delta}| / (delta ln(1/delta))");
  });
}

inline void verify_similarity(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "similarity");
  r.guard("matrix_norms", [&] {
    Rng rng(17);
    auto rnd = [&] {
      Mat2 m;
      for (auto& v : m.a)
        v = cplx(rng.uniform(-2, 2), rng.uniform(-2, 2));
      return m;
    };
    bool ok = std::abs(frobenius(Mat2::identity()) - std::sqrt(2.0)) <= 1e-15;
    for (int k = 0; k < 1000; ++k) {
      const Mat2 A = rnd(), B = rnd();
      const double o = opnorm(A), f = frobenius(A);
      ok = ok && o <= f * (1 + 1e-14) && f <= std::sqrt(2.0) * o * (1 + 1e-14) &&
           frobenius(A * B) <= f * opnorm(B) * (1 + 1e-14);
    }
    r.is("matrix_norm_inequalities", ok);
  });
  r.guard("strips", [&] {
    const StripPartition p = make_partition(admissible_delta(1));
    const std::size_t m = 8;
    const GridSpec R = unit_square_grid(p.units * m);
    const MatrixField A = sample_matrix(R, RandomMatrixFn::make(11, 0.3, Rect{0, 1, 0, 1}));
    BeltramiSolution sol = global_solve(A);
    r.le("global_identity", sol.identity_error, 1e-8, "P P^{-1} = I");
    solve_on_strips(sol, A, p);
    double id = 0.0, trunc = 0.0;
    for (const auto& L : sol.locals) {
      for (std::size_t k = 0; k < L.P.size(); ++k)
        id = std::max(id, frobenius(L.P.at(k) * L.P_inv.at(k) - Mat2::identity()));
      for (std::size_t k = 1; k < L.increments.size(); ++k)
        trunc = std::max(trunc, L.increments[k] / (L.increments[0] * std::pow(L.rho, static_cast<double>(k))));
    }
    r.le("local_identity", id, 1e-8, "P_i P_i^{-1} = I");
    r.le("neumann_geometric_decay", trunc, 1.0, "increment_k / (increment_0 rho^k)");
    r.le("factorization_identity", sol.gluing.factorization_error, 1e-6, "g_{i-1} = H_i g_i");
  });
  r.guard("holomorphy_refines", [&] {
    const StripPartition p = make_partition(admissible_delta(1));
    std::vector<double> hh, gh;
    for (std::size_t m : {8, 16, 32}) {
      const GridSpec R = unit_square_grid(p.units * m);
      const MatrixField A = sample_matrix(R, RandomMatrixFn::make(11, 0.3, Rect{0, 1, 0, 1}));
      BeltramiSolution sol = global_solve(A);
      solve_on_strips(sol, A, p);
      double h = 0.0, q = 0.0;
      for (const auto& t : sol.transitions)
        h = std::max(h, t.holomorphy);
      for (double v : sol.gluing.holomorphy)
        q = std::max(q, v);
      hh.push_back(h);
      gh.push_back(q);
    }
    r.ge("transition_holomorphy_order", order(hh), 0.9, list(hh));
    r.ge("gluing_holomorphy_order", order(gh), 0.9, list(gh));
  });
}

inline void verify_interpolation(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "interpolation");
  r.guard("three_circle_polynomials", [&] {
    Rng rng(5);
    double worst = std::numeric_limits<double>::infinity();
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
      const auto t = three_circle_check(poly, 0.25, 0.6, 1.0);
      worst = std::min(worst, t.margin / std::max(1.0, std::abs(std::log(t.M3))));
    }
    r.ge("three_circle_margin", worst, -1e-3, "min over 100 random polynomials");
  });
  r.guard("three_circle_equality", [&] {
    double e = 0.0;
    for (int n = 1; n <= 5; ++n) {
      const auto t = three_circle_check([n](cplx z) { return std::pow(z, n); }, 0.3, 0.55, 0.9);
      e = std::max(e, std::abs(t.margin));
    }
    r.le("three_circle_equality_zn", e, 1e-9);
  });
  r.guard("theta_monotone", [&] {
    bool ok = true;
    for (double F : {1.0, 2.0, 4.0, 8.0})
      ok = ok && theta_exponent(0.5, 2 * F).theta < theta_exponent(0.5, F).theta;
    for (double rr : {0.5, 0.25, 0.125})
      ok = ok && theta_exponent(rr / 2, 2.0).theta < theta_exponent(rr, 2.0).theta;
    r.is("theta_monotone", ok);
  });
  r.guard("vanishing_exact_order", [&] {
    // h = 1/128 keeps the discrete sup bias below the tolerance
    const auto g = GridSpec::square(0.0, 1.0, 256);
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const auto u = RealField::sample(g, [n](cplx z) { return std::pow(z, n).real(); });
      const auto rec = vanishing_order_experiment(u, 1.0, 1.0);
      worst = std::max(worst, std::abs(rec.slope - n));
    }
    r.le("vanishing_exact_order", worst, 0.05, "slope of Re z^n against n");
  });
  r.guard("implied_C_seed_band", [&] {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::uint64_t s = 1; s <= 3; ++s) {
      InstanceSpec sp;
      sp.lambda = 1.0;
      sp.seed = s;
      sp.n = 64;
      const Instance I = build_instance(sp);
      const auto sol = solve_instance(I);
      const auto rec = three_ball_experiment(I.u, I.multiplier, I.stream, sol, 0.5, I.F);
      lo = std::min(lo, rec.implied_C);
      hi = std::max(hi, rec.implied_C);
    }
    r.le("implied_C_seed_band", hi / lo, 4.0, "max/min over seeds at lambda = 1");
  });
}

inline void verify_landis(VerifyReport& rep) {
  using namespace verify_detail;
  Recorder r(rep, "landis");
  r.guard("schedule", [&] {
    double cf = 0.0;
    bool ratios = true, dec = true, inc = true, bound = true;
    for (double eps1 : {0.02, 0.1, 0.25, 0.45})
      for (double a0 : {1.05, 1.5, 2.0}) {
        const Schedule s = schedule_from(2.0 * eps1, a0, 10.0, 20.0);
        cf = std::max(cf, s.closed_form_error);
        ratios = ratios && s.ratios_hold;
        dec = dec && s.strictly_decreasing;
        inc = inc && s.S_increasing;
        bound = bound && s.N <= s.N_bound;
      }
    r.le("closed_form", cf, 1e-12);
    r.is("ratio_bound", ratios);
    r.is("alpha_strictly_decreasing", dec);
    r.is("S_strictly_increasing", inc);
    r.is("N_bound", bound);
  });
  r.guard("step_example", [&] {
    const StepResult st = step({100.0, 1.5, 0.2});
    r.le("step_example_R", std::abs(static_cast<double>(st.R) - 231.957), 1e-3);
    r.le("step_example_beta", std::abs(st.beta - 1.45), 1e-12);
  });
  r.guard("admissibility_threshold", [&] {
    const auto t = admissibility_threshold(0.4, 1.0, 1.0, 1.0);
    const double v = static_cast<double>(admissibility_margin_log(t.log_threshold, 0.4, 1.0, 1.0, 1.0));
    r.le("admissibility_threshold_equality", std::abs(v), 1e-9);
  });
}

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"field",      "elliptic", "multiplier",    "stream",
                                             "cauchy",     "similarity", "interpolation", "landis"};
  return s;
}

/// Runs one suite or "all".
inline VerifyReport verify(const std::string& suite, const VerifyOptions& opt = {}) {
  VerifyReport rep;
  rep.suite = suite;
  auto run = [&](const std::string& s) {
    if (s == "field") verify_field(rep);
    else if (s == "elliptic") verify_elliptic(rep);
    else if (s == "multiplier") verify_multiplier(rep);
    else if (s == "stream") verify_stream(rep, opt);
    else if (s == "cauchy") verify_cauchy(rep);
    else if (s == "similarity") verify_similarity(rep);
    else if (s == "interpolation") verify_interpolation(rep);
    else if (s == "landis") verify_landis(rep);
    else throw Error("verify: unknown suite '" + s + "'");
  };
  if (suite == "all")
    for (const auto& s : verify_suites())
      run(s);
  else
    run(suite);
  return rep;
}

} // namespace ucplab
