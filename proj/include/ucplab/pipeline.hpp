#pragma once

// Experiment pipelines over (lambda, seed, n) and their run directories:
// CSV tables, UCPF fields, JSON certificates and a manifest with SHA-256
// digests of every output.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "corpus.hpp"
#include "landis.hpp"
#include "ucpf.hpp"

namespace ucplab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum class PipelineKind { ThreeBall, Vanishing, BeltramiSweep, Landis };

inline const char* to_string(PipelineKind k) {
  switch (k) {
  case PipelineKind::ThreeBall: return "threeball";
  case PipelineKind::Vanishing: return "vanishing";
  case PipelineKind::BeltramiSweep: return "beltrami_sweep";
  case PipelineKind::Landis: return "landis";
  }
  return "?";
}

inline PipelineKind parse_kind(const std::string& s) {
  if (s == "threeball") return PipelineKind::ThreeBall;
  if (s == "vanishing") return PipelineKind::Vanishing;
  if (s == "beltrami_sweep" || s == "beltrami") return PipelineKind::BeltramiSweep;
  if (s == "landis") return PipelineKind::Landis;
  throw Error("unknown pipeline kind '" + s + "'");
}

struct Tolerances {
  double gmres_tol = 1e-10;
  std::size_t gmres_restart = 60;
  std::size_t gmres_max_iter = 3000;
  double neumann_threshold = 0.5;
};

struct LandisSettings {
  double eps = 0.2;
  double eps0 = 1.0;
  double S0 = 10.0;
  double C0 = 1.0;
  double c = 1.0;
  std::optional<double> alpha0; // set: skip the alpha0 search
  bool symbolic = true;
};

struct ExperimentConfig {
  std::vector<double> lambda_list{1.0, 2.0, 4.0};
  std::vector<std::uint64_t> seed_list{1, 2, 3, 4, 5};
  std::vector<std::size_t> n_list{128};
  FMode F_mode = FMode::Linear;
  std::optional<double> delta_override = 0.1; // nullopt: prescribed
  double c0 = 1.0;
  double r = 0.5;
  std::vector<double> M_list{2.0, 4.0, 8.0};
  LandisSettings landis;
  Tolerances tol;
  std::size_t threads = 1;
  bool write_fields = true;

  [[nodiscard]] GlobalConfig global_config() const {
    GlobalConfig g;
    g.gmres.tol = tol.gmres_tol;
    g.gmres.restart = tol.gmres_restart;
    g.gmres.max_iter = tol.gmres_max_iter;
    g.neumann_threshold = tol.neumann_threshold;
    return g;
  }
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["lambda_list"] = c.lambda_list;
  j["seed_list"] = c.seed_list;
  j["n_list"] = c.n_list;
  j["F_mode"] = to_string(c.F_mode);
  if (c.delta_override)
    j["delta_mode"] = {{"override", *c.delta_override}};
  else
    j["delta_mode"] = "prescribed";
  j["c0"] = c.c0;
  j["r"] = c.r;
  j["M_list"] = c.M_list;
  j["landis"] = {{"eps", c.landis.eps}, {"eps0", c.landis.eps0}, {"S0", c.landis.S0}, {"C0", c.landis.C0},
                 {"c", c.landis.c}, {"symbolic", c.landis.symbolic}};
  if (c.landis.alpha0)
    j["landis"]["alpha0"] = *c.landis.alpha0;
  j["tolerances"] = {{"gmres_tol", c.tol.gmres_tol},
                     {"gmres_restart", c.tol.gmres_restart},
                     {"gmres_max_iter", c.tol.gmres_max_iter},
                     {"neumann_threshold", c.tol.neumann_threshold}};
  j["threads"] = c.threads;
  j["write_fields"] = c.write_fields;
  return j;
}

/// Keys absent from j keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig c = {}) {
  static const std::set<std::string> known = {"lambda_list", "seed_list", "n_list", "F_mode", "delta_mode",
                                              "c0", "r", "M_list", "landis", "tolerances", "threads",
                                              "write_fields"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k))
      throw Error("config: unknown key '" + k + "'");
  if (j.contains("lambda_list")) c.lambda_list = j["lambda_list"].get<std::vector<double>>();
  if (j.contains("seed_list")) c.seed_list = j["seed_list"].get<std::vector<std::uint64_t>>();
  if (j.contains("n_list")) c.n_list = j["n_list"].get<std::vector<std::size_t>>();
  if (j.contains("F_mode")) c.F_mode = parse_fmode(j["F_mode"].get<std::string>());
  if (j.contains("delta_mode")) {
    const json& d = j["delta_mode"];
    if (d.is_string() && d.get<std::string>() == "prescribed")
      c.delta_override.reset();
    else if (d.is_object() && d.contains("override"))
      c.delta_override = d["override"].get<double>();
    else if (d.is_number())
      c.delta_override = d.get<double>();
    else
      throw Error("config: delta_mode must be \"prescribed\" or {\"override\": value}");
  }
  if (j.contains("c0")) c.c0 = j["c0"].get<double>();
  if (j.contains("r")) c.r = j["r"].get<double>();
  if (j.contains("M_list")) c.M_list = j["M_list"].get<std::vector<double>>();
  if (j.contains("landis")) {
    const json& l = j["landis"];
    if (l.contains("eps")) c.landis.eps = l["eps"].get<double>();
    if (l.contains("eps0")) c.landis.eps0 = l["eps0"].get<double>();
    if (l.contains("S0")) c.landis.S0 = l["S0"].get<double>();
    if (l.contains("C0")) c.landis.C0 = l["C0"].get<double>();
    if (l.contains("c")) c.landis.c = l["c"].get<double>();
    if (l.contains("alpha0")) c.landis.alpha0 = l["alpha0"].get<double>();
    if (l.contains("symbolic")) c.landis.symbolic = l["symbolic"].get<bool>();
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (t.contains("gmres_tol")) c.tol.gmres_tol = t["gmres_tol"].get<double>();
    if (t.contains("gmres_restart")) c.tol.gmres_restart = t["gmres_restart"].get<std::size_t>();
    if (t.contains("gmres_max_iter")) c.tol.gmres_max_iter = t["gmres_max_iter"].get<std::size_t>();
    if (t.contains("neumann_threshold")) c.tol.neumann_threshold = t["neumann_threshold"].get<double>();
  }
  if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
  if (j.contains("write_fields")) c.write_fields = j["write_fields"].get<bool>();
  return c;
}

inline ExperimentConfig load_config(const fs::path& p, ExperimentConfig base = {}) {
  std::ifstream in(p);
  if (!in)
    throw Error("config: cannot open " + p.string());
  return config_from_json(json::parse(in), base);
}

/// Module preconditions checked before anything runs.
inline void validate(const ExperimentConfig& c, PipelineKind kind) {
  for (double l : c.lambda_list)
    if (!(l >= 1.0))
      throw Error("config: every lambda must be >= 1");
  for (std::size_t n : c.n_list)
    if (n < 16)
      throw Error("config: grid sizes must be at least 16");
  if (c.delta_override && !(*c.delta_override > 0.0 && *c.delta_override <= 1.0))
    throw Error("config: delta override must lie in (0, 1]");
  if (!(c.r > 0.0 && c.r < 1.0))
    throw Error("config: r must lie in (0, 1)");
  if (!(c.c0 > 0.0))
    throw Error("config: c0 must be positive");
  if (c.threads == 0)
    throw Error("config: threads must be at least 1");
  if (kind == PipelineKind::BeltramiSweep)
    for (double M : c.M_list)
      if (!(M > 0.0))
        throw Error("config: M_list entries must be positive");
  if (kind == PipelineKind::Landis) {
    const auto& l = c.landis;
    if (!(l.eps > 0.0 && l.eps < l.eps0 / (1.0 + l.eps0)))
      throw Error("config: landis eps must lie in (0, eps0/(1+eps0))");
    if (!(l.S0 > 2.0))
      throw Error("config: landis S0 must exceed 2");
  }
}

// ---------------------------------------------------------------------------
// Digests and formatting

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return os.str();
}

inline std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error("sha256: cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

/// Shortest round-tripping decimal; "nan" and "inf" spelled out.
inline std::string fmt(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Number or null: JSON has no NaN.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) {
    if (r.size() != header.size())
      throw Error("csv: row width does not match header");
    rows.push_back(std::move(r));
  }
  [[nodiscard]] std::string str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t k = 0; k < r.size(); ++k)
        os << (k ? "," : "") << r[k];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows)
      line(r);
    return os.str();
  }
};

inline std::vector<std::string> csv_header_threeball() {
  return {"seed",        "lambda",      "delta_used",   "delta_prescribed", "r",           "theta",
          "norm_u_B1",   "norm_u_Br",   "norm_u_Br2",   "norm_u_Bd",        "norm_u_Bb",   "norm_w1_B1",
          "norm_w1_Br2", "norm_w1_Bd",  "norm_w2_Br2",  "norm_w2_Bd",       "norm_P_Bd",   "norm_Pinv_Bd",
          "implied_C",   "n",           "F_mode",       "F",                "implied_C_final",
          "three_circle_margin", "beltrami_residual", "beltrami_method"};
}
inline std::vector<std::string> csv_header_vanishing() {
  return {"seed", "lambda", "F_mode", "slope", "bound_exponent", "C_hat", "n", "q", "C_hat_instance"};
}
inline std::vector<std::string> csv_header_sweep() {
  return {"M", "seed", "n", "sup_P", "sup_Pinv", "log_sum", "ratio", "residual", "iterations", "method"};
}
inline std::vector<std::string> csv_header_landis() { return {"n", "S_n", "alpha_n", "ratio", "admissible"}; }

// ---------------------------------------------------------------------------
// Run directories

struct InstanceStatus {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  bool ok = false;
  std::string error;
};

struct RunManifest {
  std::string run_id;
  std::string timestamp;
  std::string command;
  std::optional<PipelineKind> kind; // unset for the single-stage commands
  json config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> grid_sizes;
  std::vector<InstanceStatus> instances;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs; // path relative to the run dir, sha256

  [[nodiscard]] json to_json() const {
    json j;
    j["run_id"] = run_id;
    j["timestamp"] = timestamp;
    j["command"] = command;
    j["kind"] = kind ? json(ucplab::to_string(*kind)) : json(command);
    j["config"] = config;
    j["seeds"] = seeds;
    j["grid_sizes"] = grid_sizes;
    j["instances"] = json::array();
    for (const auto& s : instances) {
      json e = {{"lambda", s.lambda}, {"seed", s.seed}, {"n", s.n}, {"status", s.ok ? "ok" : "error"}};
      if (!s.ok)
        e["error"] = s.error;
      j["instances"].push_back(e);
    }
    j["inputs"] = json::array();
    for (const auto& [p, h] : inputs)
      j["inputs"].push_back({{"path", p}, {"sha256", h}});
    j["outputs"] = json::array();
    for (const auto& [p, h] : outputs)
      j["outputs"].push_back({{"path", p}, {"sha256", h}});
    return j;
  }
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// --out, else $UCPLAB_RUNS, else ./runs.
inline fs::path runs_root(const std::optional<fs::path>& out = std::nullopt) {
  if (out)
    return *out;
  if (const char* env = std::getenv("UCPLAB_RUNS"); env && *env)
    return env;
  return "runs";
}

/// <command>-<UTC stamp>-<first 8 hex of the config digest>.
inline std::string make_run_id(const std::string& command, const json& config) {
  std::string stamp = utc_timestamp();
  stamp.erase(std::remove_if(stamp.begin(), stamp.end(), [](char ch) { return ch == '-' || ch == ':'; }),
              stamp.end());
  return command + "-" + stamp + "-" + sha256_hex(config.dump()).substr(0, 8);
}

/// One writer per run directory; every path is resolved inside it.
class RunDir {
public:
  RunDir(fs::path root, std::string run_id, std::string command, std::optional<PipelineKind> kind, json config)
      : dir_(std::move(root) / run_id) {
    if (fs::exists(dir_))
      throw Error("run directory already exists: " + dir_.string());
    fs::create_directories(dir_);
    manifest_.run_id = std::move(run_id);
    manifest_.timestamp = utc_timestamp();
    manifest_.command = std::move(command);
    manifest_.kind = kind;
    manifest_.config = std::move(config);
  }

  [[nodiscard]] const fs::path& path() const { return dir_; }
  RunManifest& manifest() { return manifest_; }

  void write_text(const std::string& rel, const std::string& text) {
    const fs::path p = resolve(rel);
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out)
      throw Error("cannot write " + p.string());
    record(rel);
  }
  void write_json(const std::string& rel, const json& j) { write_text(rel, j.dump(2) + "\n"); }
  template <typename FieldT> void write_field(const std::string& rel, const FieldT& f) {
    ucpf::save(resolve(rel), f);
    record(rel);
  }
  void add_input(const fs::path& p) { manifest_.inputs.emplace_back(p.string(), sha256_file(p)); }

  /// Writes manifest.json; outputs are listed in path order.
  void finish() {
    std::sort(manifest_.outputs.begin(), manifest_.outputs.end());
    std::ofstream out(dir_ / "manifest.json");
    out << manifest_.to_json().dump(2) << "\n";
    if (!out)
      throw Error("cannot write manifest");
  }

private:
  fs::path resolve(const std::string& rel) {
    const fs::path p = (dir_ / rel).lexically_normal();
    const auto d = dir_.lexically_normal().string();
    if (p.string().compare(0, d.size(), d) != 0 || rel.find("..") != std::string::npos)
      throw Error("refusing to write outside the run directory: " + rel);
    fs::create_directories(p.parent_path());
    return p;
  }
  void record(const std::string& rel) { manifest_.outputs.emplace_back(rel, sha256_file(dir_ / rel)); }

  fs::path dir_;
  RunManifest manifest_;
};

// ---------------------------------------------------------------------------
// Instance-level work

struct InstanceKey {
  double lambda;
  std::uint64_t seed;
  std::size_t n;
};

inline std::string instance_tag(const InstanceKey& k) {
  std::ostringstream os;
  os << "l" << fmt(k.lambda) << "_s" << k.seed << "_n" << k.n;
  return os.str();
}

/// Runs fn over all keys on up to `threads` workers; results keep key order.
template <typename R, typename Fn>
std::vector<R> run_instances(const std::vector<InstanceKey>& keys, std::size_t threads, Fn&& fn) {
  std::vector<R> out(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < keys.size(); k = next++)
      out[k] = fn(keys[k]);
  };
  const std::size_t t = std::max<std::size_t>(1, std::min(threads, keys.size()));
  if (t == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < t; ++k)
    pool.emplace_back(worker);
  for (auto& th : pool)
    th.join();
  return out;
}

inline std::vector<InstanceKey> instance_keys(const ExperimentConfig& c) {
  std::vector<InstanceKey> keys;
  for (double l : c.lambda_list)
    for (std::uint64_t s : c.seed_list)
      for (std::size_t n : c.n_list)
        keys.push_back({l, s, n});
  return keys;
}

inline InstanceSpec instance_spec(const ExperimentConfig& c, const InstanceKey& k) {
  InstanceSpec sp;
  sp.lambda = k.lambda;
  sp.seed = k.seed;
  sp.n = k.n;
  sp.F_mode = c.F_mode;
  sp.delta_override = c.delta_override;
  sp.c0 = c.c0;
  return sp;
}

/// Fields saved per instance.
struct InstanceFields {
  RealField u, log_phi, V;
  ComplexField w1t, w2t;
};

struct ThreeBallOutcome {
  bool ok = false;
  std::string error;
  ThreeBallRecord rec;
  double residual = 0.0;
  std::string method;
  json certificate;
  std::optional<InstanceFields> fields;
};

inline json to_json(const ThreeBallRecord& r) {
  json j;
  j["lambda"] = r.lambda;
  j["F"] = r.F;
  j["delta_used"] = r.delta;
  j["delta_prescribed"] = num(r.delta_prescribed);
  j["r"] = r.r;
  j["theta"] = r.theta;
  j["three_circle_margin"] = num(r.three_circle_margin);
  j["implied_C"] = num(r.implied_C);
  j["implied_C_final"] = num(r.implied_C_final);
  j["chain"] = json::array();
  for (const auto& s : r.steps)
    j["chain"].push_back({{"step", s.name},
                          {"log_lhs", num(s.log_lhs)},
                          {"log_rhs", num(s.log_rhs)},
                          {"log_factor", num(s.log_factor)},
                          {"needed_C", num(s.needed_C)}});
  return j;
}

inline json to_json(const MultiplierCertificate& c) {
  return {{"log_min", c.log_min},
          {"log_max", c.log_max},
          {"log_bound", c.log_bound},
          {"within_bounds", c.within_bounds},
          {"lower_margin", num(c.lower_margin)},
          {"max_monotonicity_violation", c.max_monotonicity_violation},
          {"final_increment", c.final_increment},
          {"discrete_residual", c.discrete_residual},
          {"converged", c.converged}};
}

inline json instance_json(const Instance& I) {
  const GBound gb = check_G_bound(I.stream, I.multiplier, I.d);
  json stream;
  for (auto k : all_stream_residuals)
    stream[to_string(k)] = residual(I.stream, k, I.d);
  return {{"lambda", I.spec.lambda},
          {"seed", I.spec.seed},
          {"n", I.spec.n},
          {"F_mode", to_string(I.spec.F_mode)},
          {"F", I.F},
          {"b", I.b},
          {"d", I.d},
          {"delta_used", I.delta_used},
          {"delta_prescribed", num(I.delta_prescribed)},
          {"m_hat", I.m_hat},
          {"u_scale", I.u_scale},
          {"multiplier", to_json(I.multiplier.certificate)},
          {"multiplier_iterations", I.multiplier.iterations},
          {"stream_residuals", stream},
          {"G_bound",
           {{"sup_G", gb.sup_G}, {"c_infty", gb.c_infty}, {"C3", gb.C3}, {"bound", gb.bound}, {"holds", gb.holds}}}};
}

inline ThreeBallOutcome threeball_instance(const ExperimentConfig& c, const InstanceKey& k) {
  ThreeBallOutcome o;
  try {
    const Instance I = build_instance(instance_spec(c, k));
    const BeltramiSolution sol = solve_instance(I, c.global_config());
    o.rec = three_ball_experiment(I.u, I.multiplier, I.stream, sol, c.r, I.F, I.delta_prescribed);
    o.residual = sol.residual;
    o.method = sol.method;
    o.certificate = instance_json(I);
    o.certificate["beltrami"] = {{"method", sol.method},
                                 {"iterations", sol.iterations},
                                 {"residual", sol.residual},
                                 {"M", sol.M},
                                 {"identity_error", sol.identity_error}};
    o.certificate["threeball"] = to_json(o.rec);
    if (c.write_fields)
      o.fields = InstanceFields{I.u, I.multiplier.log_phi, I.potential.V(), I.stream.w1t, I.stream.w2t};
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

struct VanishingOutcome {
  bool ok = false;
  std::string error;
  VanishingRecord rec;
};

inline VanishingOutcome vanishing_instance(const ExperimentConfig& c, const InstanceKey& k) {
  VanishingOutcome o;
  try {
    const Instance I = build_instance(instance_spec(c, k));
    o.rec = vanishing_order_experiment(I.u, k.lambda, I.F);
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

/// Per-lambda C^ (max over seeds of slope / (lambda^q F)), the run constant
/// (max over lambda) and the spread max/min across lambda.
struct VanishingSummary {
  std::map<double, double> C_hat_by_lambda;
  double C_hat = 0.0;
  double spread = std::numeric_limits<double>::quiet_NaN();
  bool bound_holds = true;
};

inline VanishingSummary summarize_vanishing(const std::vector<VanishingRecord>& recs) {
  VanishingSummary s;
  for (const auto& r : recs) {
    double& c = s.C_hat_by_lambda[r.lambda];
    c = std::max(c, r.C_hat);
    s.C_hat = std::max(s.C_hat, r.C_hat);
  }
  if (!s.C_hat_by_lambda.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [l, c] : s.C_hat_by_lambda) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    s.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  for (const auto& r : recs)
    s.bound_holds = s.bound_holds && r.slope <= s.C_hat * std::pow(r.lambda, r.q) * r.F * (1.0 + 1e-12);
  return s;
}

/// Factor max/min of implied_C over the corpus, overall and per lambda.
struct ImpliedCSummary {
  double min = 0.0, max = 0.0, band = std::numeric_limits<double>::quiet_NaN();
  std::map<double, double> band_by_lambda;
};

inline ImpliedCSummary summarize_implied_C(const std::vector<ThreeBallRecord>& recs) {
  ImpliedCSummary s;
  std::map<double, std::pair<double, double>> by;
  s.min = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    s.min = std::min(s.min, r.implied_C);
    s.max = std::max(s.max, r.implied_C);
    auto [it, fresh] = by.try_emplace(r.lambda, r.implied_C, r.implied_C);
    if (!fresh) {
      it->second.first = std::min(it->second.first, r.implied_C);
      it->second.second = std::max(it->second.second, r.implied_C);
    }
  }
  if (!recs.empty() && s.min > 0.0)
    s.band = s.max / s.min;
  for (const auto& [l, mm] : by)
    s.band_by_lambda[l] = mm.first > 0.0 ? mm.second / mm.first : std::numeric_limits<double>::infinity();
  return s;
}

// ---------------------------------------------------------------------------
// Landis

inline json to_json(const Schedule& s) {
  json j;
  j["eps"] = s.eps;
  j["eps1"] = s.eps1;
  j["eps0"] = s.eps0;
  j["alpha0"] = s.alpha0;
  j["S0"] = to_string(s.S0);
  j["constants"] = {{"c0", s.constants.c0},
                    {"m_hat", s.constants.m_hat},
                    {"C", s.constants.C},
                    {"C0", s.constants.C0},
                    {"symbolic", s.constants.symbolic}};
  j["N"] = s.N;
  j["N_bound"] = s.N_bound;
  j["N_within_bound"] = s.N <= s.N_bound;
  j["ratio_bound"] = s.ratio_bound;
  j["ratios_hold"] = s.ratios_hold;
  j["alpha_strictly_decreasing"] = s.strictly_decreasing;
  j["S_strictly_increasing"] = s.S_increasing;
  j["closed_form_error"] = s.closed_form_error;
  j["admissibility"] = {{"gap", s.admissibility.gap},
                        {"exists", s.admissibility.exists},
                        {"log_threshold", to_string(s.admissibility.log_threshold)},
                        {"threshold", to_string(s.admissibility.threshold())}};
  j["final"] = {{"log_S", to_string(s.log_S_final)},
                {"log_threshold", to_string(s.log_final_threshold)},
                {"holds", s.final_holds},
                {"exponent", s.final_exponent}};
  if (s.initial_threshold)
    j["initial_threshold"] = to_string(*s.initial_threshold);
  std::size_t admissible = 0, growth = 0;
  for (const auto& r : s.trajectory) {
    admissible += r.admissible;
    growth += r.growth;
  }
  j["steps_admissible"] = admissible;
  j["steps_growth"] = growth;
  return j;
}

inline Csv landis_csv(const Schedule& s) {
  Csv csv{csv_header_landis(), {}};
  for (const auto& r : s.trajectory)
    csv.add({std::to_string(r.n), to_string(r.S), fmt(r.alpha), fmt(r.ratio), r.admissible ? "1" : "0"});
  return csv;
}

/// Measured constants for a non-symbolic schedule: m and the lumped C from a
/// corpus instance, c0 from the global potential mode.
inline LandisConstants measured_landis_constants(const ExperimentConfig& c) {
  if (c.lambda_list.empty() || c.seed_list.empty() || c.n_list.empty())
    throw Error("landis: measured constants need one corpus instance (lambda, seed, n)");
  const InstanceKey k{c.lambda_list.front(), c.seed_list.front(), c.n_list.front()};
  const Instance I = build_instance(instance_spec(c, k));
  const BeltramiSolution sol = solve_instance(I, c.global_config());
  const ThreeBallRecord rec = three_ball_experiment(I.u, I.multiplier, I.stream, sol, c.r, I.F);
  LandisConstants lc;
  lc.c0 = PotentialMode{}.c0;
  lc.m_hat = I.m_hat;
  lc.C = std::max(rec.implied_C, 1e-12);
  lc.C0 = c.landis.C0;
  lc.symbolic = false;
  return lc;
}

inline Schedule landis_schedule(const ExperimentConfig& c) {
  const LandisSettings& l = c.landis;
  LandisConstants k;
  if (!l.symbolic)
    k = measured_landis_constants(c);
  k.C0 = l.C0;
  if (l.alpha0)
    return schedule_from(l.eps, *l.alpha0, l.S0, l.eps0, k);
  return run_schedule(l.eps, l.eps0, l.S0, l.C0, l.c, k);
}

// ---------------------------------------------------------------------------

struct RunResult {
  fs::path dir;
  RunManifest manifest;
  std::size_t failures = 0;
};

/**
 * gen -> solve -> multiplier -> stream -> beltrami -> experiment for each
 * (lambda, seed, n). A failing instance is recorded in the manifest and the
 * remaining instances still run.
 */
inline RunResult run_pipeline(const ExperimentConfig& c, PipelineKind kind, const fs::path& root,
                              std::string run_id = {}, const std::string& command = {}) {
  validate(c, kind);
  const json cj = to_json(c);
  if (run_id.empty())
    run_id = make_run_id(to_string(kind), cj);
  RunDir run(root, run_id, command.empty() ? std::string(to_string(kind)) : command, kind, cj);
  RunManifest& man = run.manifest();
  man.seeds = c.seed_list;
  man.grid_sizes = c.n_list;
  const auto keys = instance_keys(c);
  RunResult res;

  auto note = [&](const InstanceKey& k, bool ok, const std::string& err) {
    man.instances.push_back({k.lambda, k.seed, k.n, ok, err});
    res.failures += ok ? 0 : 1;
  };

  switch (kind) {
  case PipelineKind::ThreeBall: {
    if (keys.empty())
      break;
    const auto outs = run_instances<ThreeBallOutcome>(keys, c.threads,
                                                      [&](const InstanceKey& k) { return threeball_instance(c, k); });
    Csv csv{csv_header_threeball(), {}};
    std::vector<ThreeBallRecord> recs;
    for (std::size_t q = 0; q < keys.size(); ++q) {
      const auto& k = keys[q];
      const auto& o = outs[q];
      note(k, o.ok, o.error);
      if (!o.ok)
        continue;
      const auto& r = o.rec;
      recs.push_back(r);
      csv.add({std::to_string(k.seed), fmt(k.lambda), fmt(r.delta), fmt(r.delta_prescribed), fmt(r.r),
               fmt(r.theta), fmt(r.norm_u_B1), fmt(r.norm_u_Br), fmt(r.norm_u_Br2), fmt(r.norm_u_Bd),
               fmt(r.norm_u_Bb), fmt(r.norm_w1_B1), fmt(r.norm_w1_Br2), fmt(r.norm_w1_Bd), fmt(r.norm_w2_Br2),
               fmt(r.norm_w2_Bd), fmt(r.norm_P_Bd), fmt(r.norm_Pinv_Bd), fmt(r.implied_C), std::to_string(k.n),
               to_string(c.F_mode), fmt(r.F), fmt(r.implied_C_final), fmt(r.three_circle_margin),
               fmt(o.residual), o.method});
      const std::string tag = instance_tag(k);
      run.write_json("certificates/" + tag + ".json", o.certificate);
      if (o.fields) {
        run.write_field("fields/" + tag + "/u.ucpf", o.fields->u);
        run.write_field("fields/" + tag + "/log_phi.ucpf", o.fields->log_phi);
        run.write_field("fields/" + tag + "/V.ucpf", o.fields->V);
        run.write_field("fields/" + tag + "/w1t.ucpf", o.fields->w1t);
        run.write_field("fields/" + tag + "/w2t.ucpf", o.fields->w2t);
      }
    }
    run.write_text("threeball.csv", csv.str());
    const auto s = summarize_implied_C(recs);
    json band = json::object();
    for (const auto& [l, b] : s.band_by_lambda)
      band[fmt(l)] = num(b);
    run.write_json("threeball_summary.json", {{"instances", recs.size()},
                                              {"implied_C_min", num(recs.empty() ? NAN : s.min)},
                                              {"implied_C_max", num(recs.empty() ? NAN : s.max)},
                                              {"implied_C_band", num(s.band)},
                                              {"band_by_lambda", band}});
    break;
  }
  case PipelineKind::Vanishing: {
    if (keys.empty())
      break;
    const auto outs = run_instances<VanishingOutcome>(keys, c.threads,
                                                      [&](const InstanceKey& k) { return vanishing_instance(c, k); });
    std::vector<VanishingRecord> recs;
    std::vector<InstanceKey> ok_keys;
    for (std::size_t q = 0; q < keys.size(); ++q) {
      note(keys[q], outs[q].ok, outs[q].error);
      if (outs[q].ok) {
        recs.push_back(outs[q].rec);
        ok_keys.push_back(keys[q]);
      }
    }
    const VanishingSummary s = summarize_vanishing(recs);
    Csv csv{csv_header_vanishing(), {}};
    for (std::size_t q = 0; q < recs.size(); ++q) {
      const auto& r = recs[q];
      const double scale = std::pow(r.lambda, r.q) * r.F;
      csv.add({std::to_string(ok_keys[q].seed), fmt(r.lambda), to_string(c.F_mode), fmt(r.slope),
               fmt(s.C_hat * scale), fmt(s.C_hat), std::to_string(ok_keys[q].n), fmt(r.q), fmt(r.C_hat)});
    }
    run.write_text("vanishing.csv", csv.str());
    json by = json::object();
    for (const auto& [l, v] : s.C_hat_by_lambda)
      by[fmt(l)] = v;
    run.write_json("vanishing_summary.json", {{"instances", recs.size()},
                                              {"C_hat", s.C_hat},
                                              {"C_hat_by_lambda", by},
                                              {"spread", num(s.spread)},
                                              {"bound_holds", s.bound_holds}});
    break;
  }
  case PipelineKind::BeltramiSweep: {
    std::vector<InstanceKey> sk;
    for (double M : c.M_list)
      for (std::uint64_t s : c.seed_list)
        for (std::size_t n : c.n_list)
          sk.push_back({M, s, n});
    if (sk.empty())
      break;
    struct Out {
      bool ok = false;
      std::string error;
      SweepRow row;
    };
    const GlobalConfig gc = c.global_config();
    const auto outs = run_instances<Out>(sk, c.threads, [&](const InstanceKey& k) {
      Out o;
      try {
        o.row = bound_sweep_row(k.lambda, k.seed, k.n, gc);
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      return o;
    });
    Csv csv{csv_header_sweep(), {}};
    for (std::size_t q = 0; q < sk.size(); ++q) {
      note(sk[q], outs[q].ok, outs[q].error);
      if (!outs[q].ok)
        continue;
      const auto& r = outs[q].row;
      csv.add({fmt(r.M), std::to_string(r.seed), std::to_string(r.n), fmt(r.sup_P), fmt(r.sup_Pinv),
               fmt(r.log_sum), fmt(r.ratio), fmt(r.residual), std::to_string(r.iterations), r.method});
    }
    run.write_text("bound_sweep.csv", csv.str());
    break;
  }
  case PipelineKind::Landis: {
    const Schedule s = landis_schedule(c);
    run.write_text("landis.csv", landis_csv(s).str());
    run.write_json("landis_certificate.json", to_json(s));
    break;
  }
  }
  run.finish();
  res.dir = run.path();
  res.manifest = man;
  return res;
}

} // namespace ucplab
