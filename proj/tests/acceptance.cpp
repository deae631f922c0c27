// Acceptance run: one PASS/FAIL line per primary criterion, exit status 1 if
// any criterion fails. Tolerances are the contract values; nothing is relaxed.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "support.hpp"
#include "ucplab/ucplab.hpp"

using namespace ucplab;
using testing_support::min_order;
using testing_support::SmoothComplex;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

double band(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

double sup_error(const RealField& u, const std::function<double(cplx)>& exact) {
  double m = 0.0;
  const auto& g = u.spec();
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      m = std::max(m, std::abs(u(i, j) - exact(g.point(i, j))));
  return m;
}

void exact_regressions(Outcome& o) {
  std::vector<double> ed, em;
  bool within = true;
  for (std::size_t n : {64, 128, 256}) {
    const auto g = GridSpec::square({0.0, 0.0}, 1.0, n);
    auto e2x = [](cplx z) { return std::exp(2.0 * z.real()); };
    const RealField u = solve_dirichlet(RealField(g, 4.0), e2x, RealField(g, 0.0), {1e-12, 50000});
    ed.push_back(sup_error(u, e2x));

    const double lambda = 1.0;
    const auto gb = GridSpec::square(0.0, half_width_b(lambda), n);
    const BoundaryFn phi1 = [](cplx z) { return std::exp(std::sqrt(2.0) * z.real()); };
    const Multiplier m = build_multiplier(RealField(gb, 2.0 * lambda * lambda), lambda, phi1);
    em.push_back(sup_error(m.phi(), phi1));
    within = within && ed.back() <= 10.0 * g.h * g.h && em.back() <= 10.0 * gb.h * gb.h;
  }
  o.detail << "dirichlet err " << ed.back() << " order " << min_order(ed) << "; multiplier err " << em.back()
           << " order " << min_order(em) << " ";
  o.check(within, "L_inf error <= 10 h^2");
  o.check(min_order(ed) >= 1.8 && min_order(em) >= 1.8, "order >= 1.8");
}

void dbar_inverse(Outcome& o) {
  double worst_order = 1e300, worst_res = 0.0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    std::vector<double> r;
    for (std::size_t n : {32, 64, 128}) {
      const auto g = GridSpec::square(0, 1.0, n);
      r.push_back(dbar_inverse_residual(CauchyOp(g), ComplexField::sample(g, SmoothComplex(seed))));
    }
    worst_order = std::min(worst_order, min_order(r));
    worst_res = std::max(worst_res, r.back());
  }
  o.detail << "10 random F: min order " << worst_order << ", max residual at n=128 " << worst_res << " ";
  o.check(worst_order >= 0.9, "order >= 0.9");
  o.check(worst_res <= 5e-2, "residual <= 5e-2");
}

void disk_identity(Outcome& o) {
  const std::size_t n = 128;
  const auto g = GridSpec::square(0, 1.0, n);
  CauchyOp op(g, Disk{0.0, 1.0});
  const ComplexField t = op.transform(ComplexField(g, 1.0));
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (op.in_domain(i, j))
        err = std::max(err, std::abs(t(i, j) - std::conj(g.point(i, j))));
  o.detail << "max |T(1) - conj z| = " << err << " vs 5h = " << 5.0 * g.h << " ";
  o.check(err <= 5.0 * g.h, "error <= 5h");
}

void observation_scaling(Outcome& o) {
  std::vector<double> ratios;
  for (int k : {1, 3, 7, 15}) {
    const double d = 2.0 / (2 * k + 3);
    ratios.push_back(kernel_mass(Rect{0.0, 1.5 * d, 0.0, 1.0}, 30) / (d * std::log(1.0 / d)));
  }
  const double disk = kernel_mass(Disk{0.0, 1.0}, 128);
  const double rel = std::abs(disk - 2.0 * pi) / (2.0 * pi);
  o.detail << "strip band " << band(ratios) << "; disk " << disk << " (rel err " << rel << ") ";
  o.check(band(ratios) <= 2.0, "factor-2 band");
  o.check(rel <= 0.03, "disk within 3%");
}

void neumann_contraction(Outcome& o) {
  for (double M : {2.0, 4.0, 8.0}) {
    const DeltaChoice d = choose_delta(M, 0.05);
    const StripPartition p = make_partition(d.delta);
    const auto fn = RandomMatrixFn::make(7, M, Rect{0, 1, 0, 1});
    std::vector<double> res;
    double q = 0.0;
    for (std::size_t m : {2, 4, 8})
      for (std::size_t i : {std::size_t{0}, p.i0 / 2, p.i0}) {
        const LocalSolution s = local_neumann_solve(sample_matrix(strip_grid(p, i, m), fn));
        q = std::max(q, s.q_sup);
        if (i == p.i0 / 2)
          res.push_back(s.residual);
      }
    o.detail << "M=" << M << " delta=" << d.delta << " q=" << q << " res=" << res.back() << "; ";
    o.check(q <= 0.5, "||Q|| <= 1/2");
    o.check(res.back() <= 5e-2, "residual <= 5e-2");
    o.check(res[2] < res[1] && res[1] < res[0], "residual decreasing");
  }
}

void multiplier_certificate(Outcome& o) {
  std::vector<double> c2;
  bool bounds = true;
  for (double lambda : {1.0, 2.0, 4.0}) {
    double worst = 0.0;
    const auto g = GridSpec::square(0.0, half_width_b(lambda), 128);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Multiplier m = build_multiplier(gen_potential(seed, lambda, 0.1, g));
      const double cap = std::sqrt(8.0) * lambda;
      for (double v : m.log_phi.values())
        bounds = bounds && v >= -cap && v <= cap;
      worst = std::max(worst, log_gradient_bound(m, lambda));
    }
    c2.push_back(worst);
  }
  o.detail << "C2 per lambda " << c2[0] << ", " << c2[1] << ", " << c2[2] << " band " << band(c2) << " ";
  o.check(bounds, "exp(-sqrt8 lambda) <= phi <= exp(sqrt8 lambda)");
  o.check(band(c2) <= 3.0, "C2 factor-3 band");
}

void stream_identities(Outcome& o) {
  for (double lambda : {1.0, 2.0, 4.0}) {
    std::map<StreamResidual, std::vector<double>> errs;
    for (std::size_t n : {64, 128, 256}) {
      InstanceSpec sp;
      sp.lambda = lambda;
      sp.n = n;
      const Instance I = build_instance(sp);
      for (auto k : all_stream_residuals)
        errs[k].push_back(residual(I.stream, k, I.d));
    }
    double worst = 1e300;
    for (auto k : all_stream_residuals) {
      worst = std::min(worst, min_order(errs[k]));
      o.check(min_order(errs[k]) >= 0.9, std::string(to_string(k)) + " order >= 0.9");
    }
    o.detail << "lambda=" << lambda << " min order " << worst << "; ";
  }
}

void gluing(Outcome& o) {
  bool transitions = true, ratios = true, cont = true, sub = true;
  double fact = 0.0;
  for (long k : {1L, 2L, 3L}) {
    const StripPartition p = make_partition(admissible_delta(k));
    const GridSpec R = unit_square_grid(static_cast<std::size_t>(p.units) * 8);
    const MatrixField A = sample_matrix(R, RandomMatrixFn::make(11, 0.3, Rect{0, 1, 0, 1}));
    BeltramiSolution sol = global_solve(A);
    solve_on_strips(sol, A, p);
    for (const auto& t : sol.transitions)
      transitions = transitions && t.sup_H <= 10.0 && t.sup_Hinv <= 10.0;
    const GluingCertificate c = verify_gluing_bounds(sol.gluing, sol.transitions, p);
    for (const auto& r : c.ratios)
      ratios = ratios && r.lo >= 0.1 && r.hi <= 10.0;
    fact = std::max(fact, sol.gluing.factorization_error);
    const Majorant mj = majorant(sol.gluing, MajorantSchedule::make(p), p, R);
    cont = cont && mj.certificate.continuity;
    sub = sub && mj.certificate.subharmonic;
  }
  bool ident = true;
  double worst_excess = -1e300;
  for (long k : {1L, 2L, 4L}) {
    const StripPartition p = make_partition(admissible_delta(k));
    const GridSpec R = unit_square_grid(static_cast<std::size_t>(p.units) * 8);
    const Majorant mj = majorant(identity_family(p, R), MajorantSchedule::make(p), p, R);
    ident = ident && mj.certificate.boundary_bound;
    worst_excess = std::max(worst_excess, mj.certificate.log_boundary_max - mj.certificate.log_bound);
  }
  o.detail << "factorization " << fact << "; identity fixture log(max/bound) " << worst_excess << " ";
  o.check(transitions, "sup opnorm(H), opnorm(H^-1) <= 10");
  o.check(ratios, "overlap ratios in [1/10, 10]");
  o.check(fact <= 1e-6, "factorization <= 1e-6");
  o.check(cont, "majorant continuity");
  o.check(sub, "majorant subharmonicity");
  o.check(ident, "identity fixture boundary bound 2exp((i0(i0+1)/2)A - i0 B)");
}

void bound_sweep_criterion(Outcome& o) {
  std::vector<double> worst;
  for (double M : {2.0, 4.0, 8.0}) {
    double w = 0.0;
    for (std::uint64_t seed : {1, 2, 3})
      w = std::max(w, bound_sweep_row(M, seed, 128).ratio);
    worst.push_back(w);
  }
  o.detail << "ratio per M " << worst[0] << ", " << worst[1] << ", " << worst[2] << " band " << band(worst) << " ";
  o.check(band(worst) <= 4.0, "factor-4 band");
}

void three_circle_criterion(Outcome& o) {
  double eq = 0.0;
  for (int n = 0; n <= 6; ++n)
    eq = std::max(eq, std::abs(three_circle_check([n](cplx z) { return std::pow(z, n); }, 0.3, 0.55, 0.9).margin));
  Rng rng(2024);
  double worst = 1e300;
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
    worst = std::min(worst, t.margin / std::max(1.0, std::abs(std::log(t.M3))));
  }
  o.detail << "monomial equality " << eq << "; min scaled margin " << worst << " ";
  o.check(eq <= 1e-9, "equality to 1e-9");
  o.check(worst >= -1e-3, "margin >= -1e-3 scale");
}

void threeball_vanishing(Outcome& o) {
  std::vector<double> per_lambda;
  std::vector<ThreeBallRecord> tb;
  std::vector<VanishingRecord> vr;
  for (double lambda : {1.0, 2.0, 4.0})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      InstanceSpec sp;
      sp.lambda = lambda;
      sp.seed = seed;
      sp.n = 128;
      const Instance I = build_instance(sp);
      const BeltramiSolution sol = solve_instance(I);
      tb.push_back(three_ball_experiment(I.u, I.multiplier, I.stream, sol, 0.5, I.F, I.delta_prescribed));
      per_lambda.push_back(tb.back().implied_C / lambda);
      vr.push_back(vanishing_order_experiment(I.u, lambda, I.F));
    }
  const VanishingSummary vs = summarize_vanishing(vr);
  double mono = 0.0;
  const auto g = GridSpec::square(0.0, 1.0, 256);
  for (int n = 1; n <= 3; ++n) {
    const auto u = RealField::sample(g, [n](cplx z) { return std::pow(z, n).real(); });
    mono = std::max(mono, std::abs(vanishing_order_experiment(u, 1.0, 1.0).slope - n));
  }
  o.detail << "implied_C/lambda band " << band(per_lambda) << "; Re z^n slope error " << mono << "; C_hat spread "
           << vs.spread << " ";
  o.check(band(per_lambda) <= 4.0, "implied_C/lambda factor-4 band");
  o.check(mono <= 0.05, "Re z^n slope = n +- 0.05");
  o.check(vs.bound_holds, "slope <= C_hat lambda^q F");
  o.check(vs.spread <= 4.0, "C_hat stable across lambda (factor 4)");
}

void landis_criterion(Outcome& o) {
  const Schedule s = schedule_from(0.2, 2.0, 10.0);
  bool ratios = true;
  for (std::size_t n = 0; n + 1 < s.trajectory.size(); ++n)
    ratios = ratios && s.trajectory[n].ratio < 1.0 - 0.5 * s.eps1 * s.eps1;
  const StepResult r = step({100.0, 1.5, 0.2});
  const double R = static_cast<double>(r.R);
  o.detail << "eps1 " << s.eps1 << " N " << s.N << "; closed form err " << s.closed_form_error << "; R " << R
           << " beta " << r.beta << " ";
  o.check(s.eps1 == 0.1 && s.N == 43, "N = 43");
  o.check(ratios, "ratio < 1 - eps1^2/2");
  o.check(s.closed_form_error <= 1e-12, "closed form <= 1e-12");
  o.check(std::abs(R - 231.957) <= 1e-3 && std::abs(r.beta - 1.45) <= 1e-3, "step example");
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"exact_solution_regressions", exact_regressions},
      {"dbar_inverse_property", dbar_inverse},
      {"cauchy_disk_identity", disk_identity},
      {"observation_scaling", observation_scaling},
      {"neumann_contraction", neumann_contraction},
      {"multiplier_certificate", multiplier_certificate},
      {"stream_identities", stream_identities},
      {"transition_gluing_suite", gluing},
      {"bound_sweep", bound_sweep_criterion},
      {"three_circle", three_circle_criterion},
      {"three_ball_vanishing_order", threeball_vanishing},
      {"landis_scheduler", landis_criterion},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "] ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::printf("%s %-28s %s(%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed ? 1 : 0;
}
