#pragma once

// The rescaling step S -> R = S + (S/2)^{1/(1-eps)} - 1 and the schedule
// (S_n, alpha_n) it drives. Everything runs in quad precision; S_n is carried
// as log S_n so the schedule survives long past the double range.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "field.hpp"

namespace ucplab {

using Quad = boost::multiprecision::cpp_bin_float_quad;

namespace landis_detail {

inline Quad ln2() { return boost::multiprecision::log(Quad(2)); }

// log(e^a + e^b - 1) for a, b >= 0.
inline Quad log_sum_minus_one(const Quad& a, const Quad& b) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  const Quad m = a > b ? a : b;
  return m + log(exp(a - m) + exp(b - m) - exp(-m));
}

// Smallest x in [lo, hi] with f(x) >= 0 for increasing f, f(lo) < 0 <= f(hi).
template <typename Fn> Quad bisect_increasing(Fn&& f, Quad lo, Quad hi) {
  for (int it = 0; it < 400 && hi - lo > Quad(1e-30) * (1 + abs(hi)); ++it) {
    const Quad mid = (lo + hi) / 2;
    (f(mid) >= 0 ? hi : lo) = mid;
  }
  return hi;
}

} // namespace landis_detail

/// Formats a quad for CSV/JSON. Values past the double range keep their exponent.
inline std::string to_string(const Quad& q, int digits = 17) {
  std::ostringstream os;
  os.precision(digits);
  os << q;
  return os.str();
}

/// Constants entering the proposition: c0 (decay of V_-), m = 2 c_inf C3, and
/// the lumped constant C of the conclusion. Symbolic runs set all three to 1.
struct LandisConstants {
  double c0 = 1.0;
  double m_hat = 1.0;
  double C = 1.0;
  double C0 = 1.0; // growth bound of u, enters as C1 = 5 C0
  bool symbolic = true;
};

struct StepInput {
  double S = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  double eps0 = 1.0;
  double c0 = 1.0;
  double C0 = 1.0;
  double m = 1.0;
};

/// Hypotheses of the order-of-vanishing theorem after rescaling by T.
struct ParameterMap {
  Quad lambda; // T
  Quad b;      // 1 + lambda^{-eps}
  double C1 = 0.0;
  double c1 = 4.0;
  double p = 0.0;
  double q = 0.0;
};

enum class StepCase { Case1, Case2 };

struct StepResult {
  Quad T, R;
  Quad logT, logR; // finite when T, R overflow
  StepCase which = StepCase::Case1;
  double beta = 0.0;           // Case1
  double final_exponent = 0.0; // Case2: 1 + eps
  bool log_factor = false;     // Case2 carries exp(-C R^{1+eps} log R)
  ParameterMap params;
};

/// One application of the proposition in log space: logS = ln S.
inline StepResult step_log(const Quad& logS, double alpha, double eps, double C0 = 1.0) {
  using boost::multiprecision::exp;
  if (!(alpha > 1.0))
    throw Error("landis::step: alpha must exceed 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw Error("landis::step: eps must lie in (0, 1)");
  StepResult r;
  r.logT = (logS - landis_detail::ln2()) / Quad(1.0 - eps);
  r.logR = landis_detail::log_sum_minus_one(logS, r.logT);
  r.T = exp(r.logT);
  r.R = exp(r.logR);
  r.params.lambda = r.T;
  r.params.b = 1 + exp(-Quad(eps) * r.logT);
  r.params.C1 = 5.0 * C0;
  r.params.c1 = 4.0;
  r.params.p = alpha * (1.0 - eps);
  r.params.q = std::max(r.params.p, 1.0) + eps;
  if (alpha > 1.0 / (1.0 - eps)) {
    r.which = StepCase::Case1;
    r.beta = alpha - 0.5 * (alpha - 1.0) * eps;
  } else {
    r.which = StepCase::Case2;
    r.final_exponent = 1.0 + eps;
    r.log_factor = true;
  }
  return r;
}

inline StepResult step(const StepInput& in) {
  if (!(in.S > 2.0))
    throw Error("landis::step: S must exceed 2");
  return step_log(boost::multiprecision::log(Quad(in.S)), in.alpha, in.eps, in.C0);
}

/// (1+eps0) ln(S/2 - 1) - ln(S/2)/(1-eps) - ln(3m/c0) as a function of ln S.
inline Quad admissibility_margin_log(const Quad& logS, double eps, double eps0, double m_hat, double c0) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::log1p;
  const Quad half = logS - landis_detail::ln2();
  const Quad lhs = Quad(1.0 + eps0) * (half + log1p(-2 * exp(-logS)));
  return lhs - half / Quad(1.0 - eps) - log(Quad(3.0 * m_hat / c0));
}

/// (S/2 - 1)^{1+eps0} / (S/2)^{1/(1-eps)} >= 3m/c0.
inline bool admissibility(double S, double eps, double eps0, double m_hat, double c0) {
  if (!(S > 2.0))
    throw Error("landis::admissibility: S must exceed 2");
  return admissibility_margin_log(boost::multiprecision::log(Quad(S)), eps, eps0, m_hat, c0) >= 0;
}

struct AdmissibilityThreshold {
  double gap = 0.0;            // (1 + eps0) - 1/(1 - eps)
  bool exists = false;         // false when the exponents do not separate
  Quad log_threshold;          // ln S~; the inequality holds exactly for S >= S~
  [[nodiscard]] Quad threshold() const { return boost::multiprecision::exp(log_threshold); }
};

/**
 * The margin is strictly increasing in S when eps < eps0/(1+eps0), so the
 * threshold is the unique root. Otherwise the ratio tends to 1 or 0 and the
 * inequality fails for large S once 3m/c0 >= 1; exists = false then.
 */
inline AdmissibilityThreshold admissibility_threshold(double eps, double eps0, double m_hat, double c0) {
  AdmissibilityThreshold t;
  t.gap = (1.0 + eps0) - 1.0 / (1.0 - eps);
  auto f = [&](const Quad& L) { return admissibility_margin_log(L, eps, eps0, m_hat, c0); };
  if (!(t.gap > 0.0)) {
    t.exists = false;
    return t;
  }
  Quad lo = landis_detail::ln2() + Quad(1e-30), hi = Quad(2);
  while (f(hi) < 0) {
    lo = hi;
    hi *= 2;
    if (hi > Quad(1e6))
      return t;
  }
  if (f(lo) >= 0) {
    t.exists = true;
    t.log_threshold = lo;
    return t;
  }
  t.exists = true;
  t.log_threshold = landis_detail::bisect_increasing(f, lo, hi);
  return t;
}

/// Second size condition of case 1: (S/2)^{eps^2/(2(1-eps)^2)} / log(S/2) >= C/(1-eps).
inline bool case1_growth(const Quad& logS, double eps, double C) {
  using boost::multiprecision::log;
  const Quad half = logS - landis_detail::ln2();
  if (half <= 0)
    return false;
  const double e = eps * eps / (2.0 * (1.0 - eps) * (1.0 - eps));
  return Quad(e) * half - log(half) >= log(Quad(C / (1.0 - eps)));
}

/// Smallest ln S beyond which C S^{1+eps1} ln S <= S^{1+eps} (eps = 2 eps1).
inline Quad final_log_threshold(double eps1, double C) {
  using boost::multiprecision::log;
  auto h = [&](const Quad& L) { return Quad(eps1) * L - log(L) - log(Quad(C)); };
  const Quad Lmin = Quad(1.0 / eps1);
  if (h(Lmin) >= 0)
    return Quad(0);
  Quad hi = 2 * Lmin;
  while (h(hi) < 0)
    hi *= 2;
  return landis_detail::bisect_increasing(h, Lmin, hi);
}

struct ScheduleRow {
  long n = 0;
  Quad S, logS;
  double alpha = 0.0;
  double alpha_closed = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN(); // alpha_{n+1}/alpha_n, n < N
  bool admissible = false;
  bool growth = false;
};

struct Schedule {
  double eps = 0.0, eps1 = 0.0, eps0 = 0.0, alpha0 = 0.0;
  Quad S0;
  LandisConstants constants;
  std::vector<ScheduleRow> trajectory; // n = 0..N
  long N = 0;
  long N_bound = 0;
  double ratio_bound = 0.0;            // 1 - eps1^2/2
  bool ratios_hold = true;
  bool strictly_decreasing = true;
  bool S_increasing = true;
  double closed_form_error = 0.0;
  AdmissibilityThreshold admissibility;
  Quad log_S_final;                    // ln S_{N+1}
  Quad log_final_threshold;
  bool final_holds = false;
  double final_exponent = 0.0;         // 1 + eps
  std::optional<Quad> initial_threshold; // from the alpha0 search, when performed
};

inline double alpha_closed_form(double alpha0, double eps1, long n) {
  using boost::multiprecision::pow;
  return static_cast<double>(1 + Quad(alpha0 - 1.0) * pow(Quad(1.0 - 0.5 * eps1), static_cast<int>(n)));
}

/// ceil(ln((alpha0-1)(1-eps1)/eps1) / -ln(1-eps1/2)) + 1.
inline long schedule_N_bound(double alpha0, double eps1) {
  const double num = std::log((alpha0 - 1.0) * (1.0 - eps1) / eps1);
  return static_cast<long>(std::ceil(std::max(0.0, num) / -std::log1p(-0.5 * eps1))) + 1;
}

/// Iterates from a given alpha0; eps is the target exponent gap, eps1 = eps/2.
inline Schedule schedule_from(double eps, double alpha0, double S0, double eps0 = 1.0,
                              const LandisConstants& k = {}) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  if (!(eps > 0.0 && eps < eps0 / (1.0 + eps0)))
    throw Error("landis: eps must lie in (0, eps0/(1+eps0))");
  if (!(alpha0 > 1.0 && alpha0 <= 2.0))
    throw Error("landis: alpha0 must lie in (1, 2]");
  if (!(S0 > 2.0))
    throw Error("landis: S0 must exceed 2");
  Schedule s;
  s.eps = eps;
  s.eps1 = 0.5 * eps;
  s.eps0 = eps0;
  s.alpha0 = alpha0;
  s.S0 = Quad(S0);
  s.constants = k;
  s.ratio_bound = 1.0 - 0.5 * s.eps1 * s.eps1;
  s.final_exponent = 1.0 + eps;
  s.admissibility = admissibility_threshold(s.eps1, eps0, k.m_hat, k.c0);
  s.N_bound = schedule_N_bound(alpha0, s.eps1);

  Quad alpha = Quad(alpha0);
  Quad logS = log(Quad(S0));
  constexpr long cap = 10'000'000;
  for (long n = 0;; ++n) {
    ScheduleRow row;
    row.n = n;
    row.logS = logS;
    row.S = exp(logS);
    row.alpha = static_cast<double>(alpha);
    row.alpha_closed = alpha_closed_form(alpha0, s.eps1, n);
    row.admissible = admissibility_margin_log(logS, s.eps1, eps0, k.m_hat, k.c0) >= 0;
    row.growth = case1_growth(logS, s.eps1, k.C);
    s.closed_form_error = std::max(s.closed_form_error, std::abs(row.alpha - row.alpha_closed));
    const StepResult st = step_log(logS, row.alpha, s.eps1, k.C0);
    if (st.which == StepCase::Case2) {
      s.N = n;
      s.log_S_final = st.logR;
      s.trajectory.push_back(row);
      break;
    }
    const Quad next = alpha - (alpha - 1) / 2 * Quad(s.eps1);
    row.ratio = static_cast<double>(next / alpha);
    s.ratios_hold = s.ratios_hold && row.ratio < s.ratio_bound;
    s.strictly_decreasing = s.strictly_decreasing && next < alpha;
    const Quad nextLogS = st.logR;
    s.S_increasing = s.S_increasing && nextLogS > logS;
    s.trajectory.push_back(row);
    alpha = next;
    logS = nextLogS;
    if (n + 1 >= cap)
      throw Error("landis: schedule did not reach case 2");
  }
  s.log_final_threshold = final_log_threshold(s.eps1, k.C);
  s.final_holds = s.log_S_final >= s.log_final_threshold;
  return s;
}

/// Smallest ln S with c S^{4/3} ln S <= S^2, the floor for alpha0 <= 2.
inline Quad initial_log_threshold(double c) {
  using boost::multiprecision::log;
  auto h = [&](const Quad& L) { return Quad(2.0 / 3.0) * L - log(L) - log(Quad(c)); };
  const Quad Lmin = Quad(1.5);
  if (h(Lmin) >= 0)
    return Quad(0);
  Quad hi = 2 * Lmin;
  while (h(hi) < 0)
    hi *= 2;
  return landis_detail::bisect_increasing(h, Lmin, hi);
}

/**
 * alpha0 = 4/3 + ln(c ln S0)/ln S0, the smallest exponent with
 * c S0^{4/3} ln S0 <= S0^{alpha0}, floored at 4/3.
 */
inline double initial_alpha(double S0, double c) {
  if (!(S0 > 1.0))
    throw Error("landis: S0 must exceed 1");
  const double L = std::log(S0);
  const double a = 4.0 / 3.0 + std::log(c * L) / L;
  if (a > 2.0) {
    std::ostringstream msg;
    msg << "landis: no admissible S0: need c S0^{4/3} ln S0 <= S0^2, which requires S0 >= "
        << to_string(boost::multiprecision::exp(initial_log_threshold(c)), 8);
    throw Error(msg.str());
  }
  return std::max(a, 4.0 / 3.0);
}

inline Schedule run_schedule(double eps, double eps0, double S0, double C0, double c,
                             LandisConstants k = {}) {
  k.C0 = C0;
  const double a0 = initial_alpha(S0, c);
  Schedule s = schedule_from(eps, a0, S0, eps0, k);
  s.initial_threshold = boost::multiprecision::exp(initial_log_threshold(c));
  return s;
}

} // namespace ucplab
