// ucplab command line: single-stage commands (gen, solve, multiplier, stream,
// beltrami), the experiment pipelines, verify and report. Every command but
// verify writes into a fresh run directory and prints its path.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <ucplab/ucplab.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ucplab;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::size_t threads = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> argv;
};

std::string command_line(const Globals& g) {
  std::string s;
  for (const auto& a : g.argv)
    s += (s.empty() ? "" : " ") + a;
  return s;
}

fs::path root_of(const Globals& g) {
  return runs_root(g.out.empty() ? std::nullopt : std::optional<fs::path>(g.out));
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in)
    throw Error("cannot open " + p.string());
  return json::parse(in);
}

ExperimentConfig base_config(const Globals& g) {
  ExperimentConfig c;
  if (!g.config.empty())
    c = load_config(g.config);
  if (g.threads)
    c.threads = g.threads;
  if (g.seed)
    c.seed_list = {*g.seed};
  return c;
}

RunDir open_run(const Globals& g, const std::string& cmd, const json& params) {
  return RunDir(root_of(g), make_run_id(cmd, params), command_line(g), std::nullopt, params);
}

json stats_json(const SolveStats& s) {
  return {{"iterations", s.iterations}, {"residual", s.residual}, {"preconditioned", s.preconditioned}};
}

Potential load_potential(const fs::path& dir, RunDir* run = nullptr) {
  const json meta = read_json(dir / "potential.json");
  Potential p;
  p.Vplus = ucpf::load_real(dir / "V_plus.ucpf");
  p.Vminus = ucpf::load_real(dir / "V_minus.ucpf");
  require_same_grid(p.Vplus.spec(), p.Vminus.spec(), "potential");
  p.lambda = meta.at("lambda").get<double>();
  p.delta = meta.at("delta").get<double>();
  p.seed = meta.at("seed").get<std::uint64_t>();
  if (meta.at("mode").get<std::string>() == "global")
    p.mode = PotentialMode::global(meta.at("c0").get<double>(), meta.at("eps0").get<double>());
  if (run) {
    run->add_input(dir / "potential.json");
    run->add_input(dir / "V_plus.ucpf");
    run->add_input(dir / "V_minus.ucpf");
  }
  return p;
}

int finish(RunDir& run) {
  run.finish();
  std::cout << run.path().string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  double lambda = 1.0, delta = 0.1, half_side = 0.0, c0 = 1.0, eps0 = 1.0;
  std::size_t n = 128;
  std::string mode = "local";
};

int cmd_gen(const Globals& g, const GenArgs& a) {
  const std::uint64_t seed = g.seed.value_or(1);
  if (a.mode != "local" && a.mode != "global")
    throw Error("gen: --mode must be local or global");
  const PotentialMode mode = a.mode == "global" ? PotentialMode::global(a.c0, a.eps0) : PotentialMode::local();
  const double hs = a.half_side > 0.0 ? a.half_side : half_width_b(a.lambda);
  const json meta = {{"seed", seed}, {"lambda", a.lambda}, {"delta", a.delta}, {"mode", a.mode},
                     {"c0", a.c0},   {"eps0", a.eps0},     {"n", a.n},         {"half_side", hs}};
  const Potential p = gen_potential(seed, a.lambda, a.delta, GridSpec::square(0.0, hs, a.n), mode);
  RunDir run = open_run(g, "gen", meta);
  run.write_field("V_plus.ucpf", p.Vplus);
  run.write_field("V_minus.ucpf", p.Vminus);
  run.write_field("V.ucpf", p.V());
  run.write_json("potential.json", meta);
  return finish(run);
}

struct SolveArgs {
  std::string potential;
  std::size_t modes = 6;
  bool normalize = true;
};

int cmd_solve(const Globals& g, const SolveArgs& a) {
  const Potential pprobe = load_potential(a.potential);
  const std::uint64_t seed = g.seed.value_or(pprobe.seed);
  const json params = {{"potential", a.potential}, {"trace_seed", seed * 7 + 1}, {"modes", a.modes},
                       {"normalize", a.normalize}};
  RunDir run = open_run(g, "solve", params);
  const Potential p = load_potential(a.potential, &run);
  Rng rng(seed * 7 + 1);
  const TrigModes trace = TrigModes::random(rng, a.modes);
  SolveStats stats;
  const RealField V = p.V();
  RealField u = solve_dirichlet(V, [&](cplx z) { return trace(z); }, RealField(p.spec(), 0.0), {}, &stats);
  const double res = sup_abs(discrete_residual(V, u, RealField(p.spec(), 0.0)));
  double scale = 1.0;
  if (a.normalize) {
    scale = std::abs(sample_bilinear(u, cplx(0.0, 0.0)));
    if (!(scale > 0.0))
      throw Error("solve: u(0) vanishes, run with --no-normalize");
    u *= 1.0 / scale;
  }
  run.write_field("u.ucpf", u);
  json meta = params;
  meta["u_scale"] = scale;
  meta["solver"] = stats_json(stats);
  meta["discrete_residual"] = res;
  run.write_json("solve.json", meta);
  return finish(run);
}

int cmd_multiplier(const Globals& g, const std::string& dir) {
  RunDir run = open_run(g, "multiplier", {{"potential", dir}});
  const Potential p = load_potential(dir, &run);
  const Multiplier m = build_multiplier(p);
  run.write_field("log_phi.ucpf", m.log_phi);
  run.write_json("multiplier.json", {{"log_space", true},
                                     {"lambda", m.lambda},
                                     {"delta", m.delta},
                                     {"iterations", m.iterations},
                                     {"log_gradient_C2", log_gradient_bound(m, 1.0)},
                                     {"m_hat", measured_m(m)},
                                     {"certificate", to_json(m.certificate)}});
  return finish(run);
}

struct StreamArgs {
  std::string u, phi;
  double delta = 0.1, lambda = 1.0, d = 0.0;
  bool phi_linear = false;
};

int cmd_stream(const Globals& g, const StreamArgs& a) {
  const json params = {{"u", a.u},         {"phi", a.phi}, {"delta", a.delta},
                       {"lambda", a.lambda}, {"phi_space", a.phi_linear ? "linear" : "log"}};
  RunDir run = open_run(g, "stream", params);
  const RealField u = ucpf::load_real(a.u);
  Multiplier m;
  m.lambda = a.lambda;
  m.delta = a.delta;
  m.log_phi = ucpf::load_real(a.phi);
  if (a.phi_linear) {
    for (double v : m.log_phi.values())
      if (!(v > 0.0))
        throw Error("stream: phi must be positive");
    m.log_phi = m.log_phi.map([](double v) { return std::log(v); });
  }
  run.add_input(a.u);
  run.add_input(a.phi);
  StreamData s = build_stream(u, m, a.delta);
  attach_transforms(s, CauchyOp(u.spec()));
  const double b = u.spec().half_side();
  const double d = a.d > 0.0 ? a.d : (b > 1.0 ? 0.5 * (1.0 + b) : 0.75 * b);
  run.write_field("v.ucpf", s.v);
  run.write_field("v1.ucpf", s.v1);
  run.write_field("v2.ucpf", s.v2);
  run.write_field("w1.ucpf", s.w1);
  run.write_field("w2.ucpf", s.w2);
  run.write_field("alpha.ucpf", s.alpha);
  run.write_field("alphatilde.ucpf", s.alphatilde);
  run.write_field("deltatilde.ucpf", s.deltatilde);
  run.write_field("w1t.ucpf", s.w1t);
  run.write_field("w2t.ucpf", s.w2t);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      run.write_field("G_" + std::to_string(r + 1) + std::to_string(c + 1) + ".ucpf", s.G.entry(r, c));
  json res;
  for (auto k : all_stream_residuals)
    res[to_string(k)] = residual(s, k, d);
  const GBound gb = check_G_bound(s, m, d);
  run.write_json("stream.json", {{"delta", s.delta},
                                 {"d", d},
                                 {"w2_threshold", s.w2_threshold},
                                 {"residuals", res},
                                 {"G_bound",
                                  {{"sup_G", gb.sup_G},
                                   {"c_infty", gb.c_infty},
                                   {"C3", gb.C3},
                                   {"bound", gb.bound},
                                   {"holds", gb.holds}}}});
  return finish(run);
}

struct BeltramiArgs {
  std::string A;
  std::optional<double> delta;
  bool auto_delta = false, sweep = false;
  double c1 = 0.05;
  std::size_t m = 0;
};

MatrixField load_matrix(const fs::path& dir, RunDir& run) {
  for (const char* prefix : {"A_", "G_"}) {
    if (!fs::exists(dir / (std::string(prefix) + "11.ucpf")))
      continue;
    std::array<ComplexField, 4> e;
    for (int q = 0; q < 4; ++q) {
      const fs::path p = dir / (prefix + std::to_string(q / 2 + 1) + std::to_string(q % 2 + 1) + ".ucpf");
      e[static_cast<std::size_t>(q)] = ucpf::load_complex(p);
      run.add_input(p);
    }
    return MatrixField(e[0], e[1], e[2], e[3]);
  }
  throw Error("beltrami: no A_11.ucpf or G_11.ucpf in " + dir.string());
}

json local_json(const LocalSolution& L) {
  return {{"index", L.index},         {"M", L.M},           {"rho", L.rho},
          {"measured_rho", L.measured_rho}, {"q_sup", L.q_sup}, {"sup_P", L.sup_P},
          {"sup_Pinv", L.sup_Pinv},   {"residual", L.residual}, {"iterations", L.increments.size()},
          {"certified", L.certified}};
}

int cmd_beltrami(const Globals& g, const BeltramiArgs& a) {
  if (a.sweep) {
    ExperimentConfig c = base_config(g);
    const RunResult r = run_pipeline(c, PipelineKind::BeltramiSweep, root_of(g), "", command_line(g));
    std::cout << r.dir.string() << "\n";
    return r.failures ? 1 : 0;
  }
  if (a.A.empty())
    throw Error("beltrami: --A is required unless --sweep is given");
  if (a.delta && a.auto_delta)
    throw Error("beltrami: --delta and --auto-delta are exclusive");
  json params = {{"A", a.A}, {"auto_delta", a.auto_delta}, {"c1", a.c1}, {"m", a.m}};
  if (a.delta)
    params["delta"] = *a.delta;
  RunDir run = open_run(g, "beltrami", params);
  const MatrixField A = load_matrix(a.A, run);
  const BeltramiSolution sol = global_solve(A, base_config(g).global_config());
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const std::string ij = std::to_string(r + 1) + std::to_string(c + 1);
      run.write_field("P_" + ij + ".ucpf", sol.P.entry(r, c));
      run.write_field("Pinv_" + ij + ".ucpf", sol.P_inv.entry(r, c));
    }
  json cert = {{"global",
                {{"method", sol.method},
                 {"iterations", sol.iterations},
                 {"residual", sol.residual},
                 {"M", sol.M},
                 {"sup_P", sup_opnorm(sol.P)},
                 {"sup_Pinv", sup_opnorm(sol.P_inv)},
                 {"identity_error", sol.identity_error}}}};
  if (a.delta || a.auto_delta) {
    // strips live on R = [0,1]^2: pull A back, then refine to a multiple of 2 i0 + 3
    const GridSpec& gs = A.spec();
    const Rect src{gs.x0, gs.x1(), gs.y0, gs.y1()};
    const double L = src.width();
    double delta = 0.0;
    json choice;
    if (a.auto_delta) {
      const double M = sup_opnorm(A) * L;
      const DeltaChoice dc = choose_delta(M, a.c1);
      delta = dc.delta;
      choice = {{"M", M}, {"c1", a.c1}, {"raw", dc.raw}, {"delta", dc.delta}, {"C1", dc.C1}, {"rho", dc.rho}};
    } else {
      delta = *a.delta;
    }
    const StripPartition p = make_partition(delta);
    const std::size_t m = a.m ? a.m : std::max<std::size_t>(4, (gs.nx + p.units - 1) / static_cast<std::size_t>(p.units));
    const GridSpec R = unit_square_grid(static_cast<std::size_t>(p.units) * m);
    const MatrixField At = pullback_to_unit_square(A, src, R.nx);
    BeltramiSolution ss = global_solve(At);
    solve_on_strips(ss, At, p);
    const GluingCertificate gc = verify_gluing_bounds(ss.gluing, ss.transitions, p);
    const Majorant mj = majorant(ss.gluing, MajorantSchedule::make(p), p, R);
    json locals = json::array(), trans = json::array(), ratios = json::array();
    for (const auto& L : ss.locals)
      locals.push_back(local_json(L));
    for (const auto& t : ss.transitions)
      trans.push_back({{"index", t.index}, {"sup_H", t.sup_H}, {"sup_Hinv", t.sup_Hinv}, {"holomorphy", t.holomorphy}});
    for (const auto& r : gc.ratios)
      ratios.push_back({{"index", r.index}, {"lo", r.lo}, {"hi", r.hi}, {"hypothesis", r.hypothesis}, {"holds", r.holds}});
    const auto& mc = mj.certificate;
    cert["strips"] = {{"delta", p.delta},
                      {"i0", p.i0},
                      {"cells_per_unit", m},
                      {"choice", choice},
                      {"locals", locals},
                      {"transitions", trans},
                      {"gluing",
                       {{"ratios", ratios},
                        {"ratios_hold", gc.ratios_hold},
                        {"factorization_error", ss.gluing.factorization_error},
                        {"C_hat", gc.C_hat},
                        {"boundary_conditional", gc.boundary_conditional},
                        {"boundary_holds", gc.boundary_holds}}},
                      {"majorant",
                       {{"continuity", mc.continuity},
                        {"continuity_printed_band", mc.continuity_printed_band},
                        {"max_subharmonic_defect", mc.max_subharmonic_defect},
                        {"subharmonic", mc.subharmonic},
                        {"log_boundary_max", mc.log_boundary_max},
                        {"log_bound", mc.log_bound},
                        {"log_bound_last_strip", mc.log_bound_last_strip},
                        {"boundary_bound", mc.boundary_bound},
                        {"boundary_bound_last_strip", mc.boundary_bound_last_strip}}}};
  }
  run.write_json("certificate.json", cert);
  return finish(run);
}

struct LandisArgs {
  std::optional<double> eps, eps0, S0, C0, c, alpha0;
  std::optional<bool> symbolic;
};

int cmd_pipeline(const Globals& g, PipelineKind kind, const std::vector<double>& lambdas,
                 const std::vector<std::size_t>& ns, const LandisArgs& la) {
  ExperimentConfig c = base_config(g);
  if (!lambdas.empty())
    c.lambda_list = lambdas;
  if (!ns.empty())
    c.n_list = ns;
  if (la.eps) c.landis.eps = *la.eps;
  if (la.eps0) c.landis.eps0 = *la.eps0;
  if (la.S0) c.landis.S0 = *la.S0;
  if (la.C0) c.landis.C0 = *la.C0;
  if (la.c) c.landis.c = *la.c;
  if (la.alpha0) c.landis.alpha0 = *la.alpha0;
  if (la.symbolic) c.landis.symbolic = *la.symbolic;
  const RunResult r = run_pipeline(c, kind, root_of(g), "", command_line(g));
  std::cout << r.dir.string() << "\n";
  for (const auto& s : r.manifest.instances)
    if (!s.ok)
      std::cerr << "instance lambda=" << s.lambda << " seed=" << s.seed << " n=" << s.n << ": " << s.error << "\n";
  return r.failures ? 1 : 0;
}

int cmd_verify(const std::string& suite, bool compact) {
  const VerifyReport rep = verify(suite);
  std::cout << rep.to_json().dump(compact ? -1 : 2) << "\n";
  for (const auto& r : rep.results)
    if (!r.passed)
      std::cerr << "FAIL " << r.suite << "/" << r.name << " value=" << r.value << " " << r.relation << " "
                << r.tolerance << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
  return rep.passed() ? 0 : 1;
}

/// delta, mass = sup int_{R_delta} |z - xi|^-1 (quadrature), exact, C1 = exact/(pi delta ln(1/delta)).
Csv kernel_mass_csv() {
  Csv csv{{"delta", "kernel_mass", "kernel_mass_exact", "scaled"}, {}};
  for (long k : {1L, 3L, 7L, 15L}) {
    const double d = admissible_delta(k);
    const Rect r = strip_rect(d);
    const double exact = kernel_mass_exact(r);
    csv.add({fmt(d), fmt(kernel_mass(r, 30)), fmt(exact), fmt(exact / (d * std::log(1.0 / d)))});
  }
  return csv;
}

int cmd_report(const Globals& g, const std::string& dir, bool kernel_mass) {
  if (dir.empty() && !kernel_mass)
    throw Error("report: give --run DIR and/or --kernel-mass");
  json params = {{"run", dir}, {"kernel_mass", kernel_mass}};
  RunDir run = open_run(g, "report", params);
  json rep;
  if (!dir.empty()) {
    const fs::path src(dir);
    const json man = read_json(src / "manifest.json");
    run.add_input(src / "manifest.json");
    rep["run_id"] = man.at("run_id");
    rep["kind"] = man.at("kind");
    std::size_t ok = 0, bad = 0;
    for (const auto& i : man.at("instances"))
      (i.at("status") == "ok" ? ok : bad) += 1;
    rep["instances_ok"] = ok;
    rep["instances_failed"] = bad;
    // re-check the recorded digests
    json outputs = json::array();
    bool intact = true;
    for (const auto& o : man.at("outputs")) {
      const fs::path p = src / o.at("path").get<std::string>();
      const bool same = fs::exists(p) && sha256_file(p) == o.at("sha256").get<std::string>();
      intact = intact && same;
      outputs.push_back({{"path", o.at("path")}, {"digest_matches", same}});
    }
    rep["outputs"] = outputs;
    rep["outputs_intact"] = intact;
    for (const char* f : {"threeball_summary.json", "vanishing_summary.json", "landis_certificate.json"})
      if (fs::exists(src / f)) {
        json j = read_json(src / f);
        if (std::string(f) == "landis_certificate.json")
          j.erase("trajectory");
        rep[fs::path(f).stem().string()] = j;
      }
  }
  if (kernel_mass)
    run.write_text("kernel_mass.csv", kernel_mass_csv().str());
  run.write_json("report.json", rep);
  std::cout << rep.dump(2) << "\n";
  return finish(run);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ucplab: numerical lab for quantitative unique continuation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.argv.assign(argv, argv + argc);
  app.add_option("--config", g.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "runs root (default $UCPLAB_RUNS, else ./runs)");
  app.add_option("--threads", g.threads, "instance-level worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed (single-stage commands; pipelines: the only seed)");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "random admissible potential");
  gen->add_option("--lambda", ga.lambda);
  gen->add_option("--delta", ga.delta);
  gen->add_option("--n", ga.n);
  gen->add_option("--half-side", ga.half_side, "default 1 + 1/lambda");
  gen->add_option("--mode", ga.mode)->check(CLI::IsMember({"local", "global"}));
  gen->add_option("--c0", ga.c0);
  gen->add_option("--eps0", ga.eps0);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Dirichlet solve for a generated potential");
  solve->add_option("--potential", sa.potential, "gen run directory")->required()->check(CLI::ExistingDirectory);
  solve->add_option("--modes", sa.modes, "boundary trace modes");
  solve->add_flag("!--no-normalize", sa.normalize, "keep u unnormalized");

  std::string mdir;
  auto* mult = app.add_subcommand("multiplier", "positive multiplier phi");
  mult->add_option("--potential", mdir, "gen run directory")->required()->check(CLI::ExistingDirectory);

  StreamArgs st;
  auto* stream = app.add_subcommand("stream", "stream functions, w1, w2 and G");
  stream->add_option("--u", st.u)->required()->check(CLI::ExistingFile);
  stream->add_option("--phi", st.phi, "log phi (UCPF)")->required()->check(CLI::ExistingFile);
  stream->add_flag("--phi-linear", st.phi_linear, "the --phi file holds phi, not log phi");
  stream->add_option("--delta", st.delta);
  stream->add_option("--lambda", st.lambda);
  stream->add_option("--d", st.d, "half-width of the residual window");

  BeltramiArgs ba;
  auto* bel = app.add_subcommand("beltrami", "matrix Beltrami solve dbar P = A P");
  bel->add_option("--A", ba.A, "directory of A_ij.ucpf or G_ij.ucpf");
  bel->add_option("--delta", ba.delta, "strip width 2/(2k+3)");
  bel->add_flag("--auto-delta", ba.auto_delta, "delta = c1/(M ln M), rounded to an admissible value");
  bel->add_option("--c1", ba.c1);
  bel->add_option("--m", ba.m, "cells per strip unit");
  bel->add_flag("--sweep", ba.sweep, "bound sweep over the config's M_list and seeds");

  std::vector<double> lambdas;
  std::vector<std::size_t> ns;
  LandisArgs la;
  auto* tb = app.add_subcommand("threeball", "three-ball experiment over the corpus");
  auto* van = app.add_subcommand("vanishing", "vanishing-order experiment over the corpus");
  for (auto* sc : {tb, van}) {
    sc->add_option("--lambda", lambdas, "lambda list");
    sc->add_option("--n", ns, "grid sizes");
  }
  auto* lan = app.add_subcommand("landis", "iteration schedule");
  lan->add_option("--eps", la.eps);
  lan->add_option("--eps0", la.eps0);
  lan->add_option("--S0", la.S0);
  lan->add_option("--C0", la.C0);
  lan->add_option("--c", la.c);
  lan->add_option("--alpha0", la.alpha0);
  lan->add_option("--symbolic", la.symbolic, "true: unit constants, false: measured from the corpus");

  std::string suite = "all";
  bool compact = false;
  auto* ver = app.add_subcommand("verify", "invariant suites");
  ver->add_option("suite", suite)->check(CLI::IsMember([] {
    auto s = verify_suites();
    s.push_back("all");
    return s;
  }()));
  ver->add_flag("--compact", compact, "single-line JSON");

  std::string rdir;
  bool kmass = false;
  auto* rep = app.add_subcommand("report", "summarize a run directory");
  rep->add_option("--run", rdir)->check(CLI::ExistingDirectory);
  rep->add_flag("--kernel-mass", kmass, "also write kernel_mass.csv");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(g, ga);
    if (*solve) return cmd_solve(g, sa);
    if (*mult) return cmd_multiplier(g, mdir);
    if (*stream) return cmd_stream(g, st);
    if (*bel) return cmd_beltrami(g, ba);
    if (*tb) return cmd_pipeline(g, PipelineKind::ThreeBall, lambdas, ns, la);
    if (*van) return cmd_pipeline(g, PipelineKind::Vanishing, lambdas, ns, la);
    if (*lan) return cmd_pipeline(g, PipelineKind::Landis, {}, {}, la);
    if (*ver) return cmd_verify(suite, compact);
    if (*rep) return cmd_report(g, rdir, kmass);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
