#pragma once

// Matrix Beltrami equation dbar P = A P on rectangles: strip partitions of
// R = [0,1]^2, Neumann-series local solves, a Krylov global solve, transition
// matrices, the derived gluing family g_i = P_i^{-1} P and the subharmonic
// majorant built from it.

#include <functional>
#include <sstream>

#include "cauchy.hpp"
#include "elliptic.hpp"
#include "matrix.hpp"

namespace ucplab {

// ---------------------------------------------------------------------------
// Strip partitions. Coordinates are kept as integers in units of delta/2, so
// 1 = 2 i0 + 3 units and every endpoint is exact.

struct UnitInterval {
  long a = 0, b = 0;
};

struct StripPartition {
  double delta = 0.0;
  std::size_t i0 = 0;
  long units = 0; // 2 i0 + 3
  std::vector<UnitInterval> V;        // V_i, i = 0..i0
  std::vector<UnitInterval> overlaps; // overlaps[i - 1] = V_{i-1} cap V_i, i = 1..i0
  std::vector<UnitInterval> W;        // W_i, i = 0..i0

  [[nodiscard]] double x(long unit) const { return static_cast<double>(unit) / static_cast<double>(units); }
  [[nodiscard]] Rect U(std::size_t i) const { return {x(V[i].a), x(V[i].b), 0.0, 1.0}; }
  [[nodiscard]] Rect overlap(std::size_t i) const { return {x(overlaps[i - 1].a), x(overlaps[i - 1].b), 0.0, 1.0}; }
  [[nodiscard]] Rect Wrect(std::size_t i) const { return {x(W[i].a), x(W[i].b), 0.0, 1.0}; }
  /// x_i^- = i delta and x_i^+ = i delta + delta / 2 (i >= 1).
  [[nodiscard]] double x_minus(std::size_t i) const { return x(2 * static_cast<long>(i)); }
  [[nodiscard]] double x_plus(std::size_t i) const { return x(2 * static_cast<long>(i) + 1); }
};

/// 2 / (2k + 3) for k >= 1.
inline double admissible_delta(long k) { return 2.0 / static_cast<double>(2 * k + 3); }

/// Largest admissible 2/(2k+3) not exceeding x (rounding down).
inline double admissible_floor(double x) {
  if (!(x > 0.0))
    throw Error("admissible_floor: argument must be positive");
  const double q = (2.0 / x - 3.0) / 2.0;
  const long k = std::max(1L, static_cast<long>(std::ceil(q - 1e-9)));
  return admissible_delta(k);
}

inline StripPartition make_partition(double delta) {
  if (!(delta > 0.0))
    throw Error("make_partition: delta must be positive");
  const double q = 1.0 / delta - 1.5;
  const long k = std::lround(q);
  if (std::abs(q - static_cast<double>(k)) > 1e-9 || k < 1) {
    const long lo = std::max(1L, static_cast<long>(std::floor(q)));
    const long hi = std::max(lo + 1, static_cast<long>(std::ceil(q)));
    std::ostringstream msg;
    msg.precision(10);
    msg << "make_partition: inadmissible delta " << delta << " (1/delta - 3/2 = " << q
        << " is not a positive integer); nearest admissible values: 2/" << 2 * hi + 3 << " = "
        << admissible_delta(hi) << ", 2/" << 2 * lo + 3 << " = " << admissible_delta(lo);
    throw Error(msg.str());
  }
  StripPartition p;
  p.delta = admissible_delta(k);
  p.i0 = static_cast<std::size_t>(k);
  p.units = 2 * k + 3;
  for (long i = 0; i <= k; ++i) {
    p.V.push_back({2 * i, 2 * i + 3});
    if (i >= 1)
      p.overlaps.push_back({2 * i, 2 * i + 1});
    if (i == 0)
      p.W.push_back({0, 2});
    else if (i < k)
      p.W.push_back({2 * i + 1, 2 * i + 2});
    else
      p.W.push_back({2 * i + 1, 2 * i + 3});
  }
  return p;
}

/// ||T_R|| on L-infinity, (1/pi) sup_z int_R 1/|z - xi|, closed form.
inline double transform_norm(const Rect& r) { return kernel_mass_exact(r) / pi; }

/// The strip R_delta = [0, 3 delta / 2] x [0, 1] of the local solves.
inline Rect strip_rect(double delta) { return {0.0, 1.5 * delta, 0.0, 1.0}; }

/// Measured C_1(delta) = ||T_{R_delta}|| / (delta ln(1/delta)).
inline double measured_C1(double delta) {
  return transform_norm(strip_rect(delta)) / (delta * std::log(1.0 / delta));
}

struct DeltaChoice {
  double raw = 0.0;   // c1 / (M ln M)
  double delta = 0.0; // admissible value used
  double C1 = 0.0;    // measured C_1(delta)
  double rho = 0.0;   // C_1 delta ln(1/delta) M
};

/// delta := largest admissible value <= c1 / (M ln M), then checked against
/// C_1 delta log(1/delta) M <= 1/3 with the measured C_1.
inline DeltaChoice choose_delta(double M, double c1, double M0 = 2.0) {
  if (!(M >= M0))
    throw Error("choose_delta: need M >= M0 = " + std::to_string(M0));
  if (!(c1 > 0.0))
    throw Error("choose_delta: c1 must be positive");
  DeltaChoice d;
  d.raw = c1 / (M * std::log(M));
  d.delta = admissible_floor(d.raw);
  d.C1 = measured_C1(d.delta);
  d.rho = d.C1 * d.delta * std::log(1.0 / d.delta) * M;
  if (d.rho > 1.0 / 3.0) {
    long k = static_cast<long>(std::lround(1.0 / d.delta - 1.5));
    while (transform_norm(strip_rect(admissible_delta(k))) * M > 1.0 / 3.0)
      ++k;
    std::ostringstream msg;
    msg << "choose_delta: constraint C1 delta log(1/delta) M <= 1/3 fails for M = " << M << ", c1 = " << c1
        << " (delta = " << d.delta << ", value " << d.rho << "); the largest admissible delta is 2/" << 2 * k + 3
        << ", use c1 <= " << admissible_delta(k) * M * std::log(M);
    throw Error(msg.str());
  }
  return d;
}

/// Grid over R = [0,1]^2 with n cells per side; n must be a multiple of 2/delta's denominator.
inline GridSpec unit_square_grid(std::size_t n) { return GridSpec::rect(0.0, 0.0, 1.0 / static_cast<double>(n), n, n); }

inline std::size_t cells_per_unit(const StripPartition& p, const GridSpec& g) {
  const auto n = static_cast<long>(g.nx);
  if (g.nx != g.ny || std::abs(g.x0) > 1e-12 || std::abs(g.y0) > 1e-12 || std::abs(g.h * n - 1.0) > 1e-12)
    throw Error("strip partition: grid must cover R = [0,1]^2");
  if (n % p.units != 0)
    throw Error("strip partition: n = " + std::to_string(n) + " must be a multiple of " + std::to_string(p.units) +
                " so that strip edges fall on grid lines");
  return static_cast<std::size_t>(n / p.units);
}

inline Window columns(const GridSpec& g, std::size_t m, UnitInterval u) {
  return {static_cast<std::size_t>(u.a) * m, static_cast<std::size_t>(u.b) * m, 0, g.ny};
}

/// Grid of the strip U_i with m cells per unit, height 1.
inline GridSpec strip_grid(const StripPartition& p, std::size_t i, std::size_t m) {
  const double h = 1.0 / static_cast<double>(static_cast<std::size_t>(p.units) * m);
  return GridSpec::rect(p.x(p.V[i].a), 0.0, h, 3 * m, static_cast<std::size_t>(p.units) * m);
}

// ---------------------------------------------------------------------------
// Random smooth matrix fields.

/// A(z) = scale * (sum of cosine modes per real/imaginary part of each entry),
/// with scale set so that sup opnorm A = M on a fixed reference sampling of
/// the domain (independent of the grid later used).
struct RandomMatrixFn {
  std::array<TrigModes, 8> parts;
  double scale = 1.0;

  [[nodiscard]] Mat2 raw(cplx z) const {
    Mat2 m;
    for (std::size_t k = 0; k < 4; ++k)
      m.a[k] = cplx(parts[2 * k](z), parts[2 * k + 1](z));
    return m;
  }
  [[nodiscard]] Mat2 operator()(cplx z) const { return cplx(scale) * raw(z); }

  static RandomMatrixFn make(std::uint64_t seed, double M, const Rect& domain, std::size_t reference = 256) {
    Rng rng(seed);
    RandomMatrixFn f;
    for (auto& p : f.parts)
      p = TrigModes::random(rng, 4, pi / std::max(domain.width(), domain.height()));
    double sup = 0.0;
    for (std::size_t j = 0; j <= reference; ++j)
      for (std::size_t i = 0; i <= reference; ++i) {
        const cplx z(domain.x0 + domain.width() * static_cast<double>(i) / static_cast<double>(reference),
                     domain.y0 + domain.height() * static_cast<double>(j) / static_cast<double>(reference));
        sup = std::max(sup, opnorm(f.raw(z)));
      }
    f.scale = sup > 0.0 ? M / sup : 0.0;
    return f;
  }
};

inline MatrixField sample_matrix(const GridSpec& g, const std::function<Mat2(cplx)>& fn) {
  MatrixField out(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      out.set(g.index(i, j), fn(g.point(i, j)));
  return out;
}

/**
 * Pulls A back from a square src of side L to R = [0,1]^2:
 * A~(zeta) = L A(z0 + L zeta), so that dbar P = A P on src becomes
 * dbar P~ = A~ P~ on R. Bilinear sampling, constant beyond the outermost
 * cell centers; n cells per side.
 */
inline MatrixField pullback_to_unit_square(const MatrixField& A, const Rect& src, std::size_t n) {
  const double L = src.width();
  if (std::abs(src.height() - L) > 1e-12 * L)
    throw Error("pullback_to_unit_square: source must be a square");
  const GridSpec g = unit_square_grid(n);
  const GridSpec& a = A.spec();
  // R's outer half-cells map beyond A's cell centers: clamp onto the hull
  auto inside = [&](cplx z) {
    return cplx(std::clamp(z.real(), a.x(0), a.x(a.nx - 1)), std::clamp(z.imag(), a.y(0), a.y(a.ny - 1)));
  };
  MatrixField out(g);
  for (std::size_t q = 0; q < 4; ++q) {
    const ComplexField& e = A.entry(static_cast<int>(q / 2), static_cast<int>(q % 2));
    auto& o = out.entry(static_cast<int>(q / 2), static_cast<int>(q % 2));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        o(i, j) = L * sample_bilinear(e, inside(cplx(src.x0, src.y0) + L * g.point(i, j)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuals.

/// sup over w of opnorm(dbar P - A P), divided by sup opnorm P over the grid.
inline double beltrami_residual(const MatrixField& P, const MatrixField& A, const Window& w) {
  require_same_grid(P.spec(), A.spec(), "beltrami_residual");
  const MatrixField dP = dbar(P);
  double num = 0.0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i) {
      const std::size_t k = P.spec().index(i, j);
      num = std::max(num, opnorm(dP.at(k) - A.at(k) * P.at(k)));
    }
  const double den = sup_opnorm(P);
  return den > 0.0 ? num / den : 0.0;
}

/// sup over w of |dbar F| / sup |F| (Frobenius norms).
inline double holomorphy_residual(const MatrixField& F, const Window& w) {
  const MatrixField d = dbar(F);
  const double den = sup_frobenius(F);
  return den > 0.0 ? sup_frobenius(d, w) / den : 0.0;
}

/// Margin used on strips and overlaps: a third of the short side (>= 2 cells).
inline constexpr double strip_margin_fraction = 1.0 / 3.0;
/// Margin used on R and other squares.
inline constexpr double square_margin_fraction = 0.125;

// ---------------------------------------------------------------------------
// Local Neumann solves.

struct NeumannConfig {
  double tol = 1e-10;        // stop when sup opnorm(Q^{k+1} - Q^k) <= tol
  std::size_t max_iter = 500;
  bool certify = true;       // require rho <= 1/3 before iterating
};

struct LocalSolution {
  std::size_t index = 0;
  MatrixField P, P_inv;
  double M = 0.0;            // sup opnorm A on the strip
  double rho = 0.0;          // ||T_strip|| M, the certified contraction bound
  double measured_rho = 0.0; // largest ratio of successive increments
  double q_sup = 0.0;        // sup opnorm Q
  double sup_P = 0.0, sup_Pinv = 0.0, min_det = 0.0;
  double residual = 0.0;     // beltrami_residual on the strip interior
  std::vector<double> increments;
  bool certified = false;    // rho <= 1/3, ||P|| < 3 and ||P^{-1}|| < 3
};

/**
 * Q = sum_{k>=1} (T o A)^k I by the iteration Q <- T(A (I + Q)), on the grid of
 * A (a strip R_delta, or any rectangle) with T = T over that rectangle.
 */
inline LocalSolution local_neumann_solve(const MatrixField& A, const CauchyOp& T, const NeumannConfig& cfg = {}) {
  const GridSpec& g = A.spec();
  require_same_grid(g, T.spec(), "local_neumann_solve");
  LocalSolution s;
  s.M = sup_opnorm(A);
  s.rho = transform_norm(T.domain()) * s.M;
  if (cfg.certify && s.rho > 1.0 / 3.0)
    throw Error("local_neumann_solve: contraction not certified (C1 delta log(1/delta) M = " + std::to_string(s.rho) +
                " > 1/3)");
  MatrixField Q(g);
  const MatrixField I = MatrixField::identity(g);
  std::size_t it = 0;
  bool done = s.M == 0.0;
  for (; !done && it < cfg.max_iter; ++it) {
    const MatrixField AQ = A * (I + Q);
    MatrixField next = AQ.map_entries([&](const ComplexField& f) { return T.transform(f); });
    const double inc = sup_opnorm(next - Q);
    if (!s.increments.empty() && s.increments.back() > 0.0)
      s.measured_rho = std::max(s.measured_rho, inc / s.increments.back());
    s.increments.push_back(inc);
    Q = std::move(next);
    if (!std::isfinite(inc))
      break;
    done = inc <= cfg.tol;
  }
  if (!done)
    throw NonConvergence("local_neumann_solve: Neumann series did not reach the increment tolerance",
                         s.increments.empty() ? 0.0 : s.increments.back());
  s.q_sup = sup_opnorm(Q);
  s.P = I + Q;
  s.min_det = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k)
    s.min_det = std::min(s.min_det, std::abs(s.P.at(k).det()));
  if (s.min_det < 1e-6)
    throw Error("local_neumann_solve: invertibility lost (|det P| = " + std::to_string(s.min_det) + ")");
  s.P_inv = inverse(s.P);
  s.sup_P = sup_opnorm(s.P);
  s.sup_Pinv = sup_opnorm(s.P_inv);
  s.residual = beltrami_residual(s.P, A, physical_interior(g, strip_margin_fraction));
  s.certified = s.rho <= 1.0 / 3.0 && s.sup_P < 3.0 && s.sup_Pinv < 3.0;
  if (cfg.certify && !s.certified)
    throw Error("local_neumann_solve: bound ||P|| < 3, ||P^{-1}|| < 3 not met");
  return s;
}

inline LocalSolution local_neumann_solve(const MatrixField& A, const NeumannConfig& cfg = {}) {
  return local_neumann_solve(A, CauchyOp(A.spec()), cfg);
}

// ---------------------------------------------------------------------------
// Restarted GMRES on complex vectors.

struct GmresConfig {
  double tol = 1e-10; // relative to ||b||_2
  std::size_t restart = 60;
  std::size_t max_iter = 3000;
};

struct GmresResult {
  std::vector<cplx> x;
  std::vector<double> history; // relative residual per iteration
  std::size_t iterations = 0;
  bool converged = false;
};

namespace gmres_detail {

inline cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s{};
  for (std::size_t k = 0; k < a.size(); ++k)
    s += std::conj(a[k]) * b[k];
  return s;
}
inline double norm2(const std::vector<cplx>& a) { return std::sqrt(std::abs(dot(a, a))); }

} // namespace gmres_detail

inline GmresResult gmres(const std::function<std::vector<cplx>(const std::vector<cplx>&)>& apply,
                         const std::vector<cplx>& b, const GmresConfig& cfg) {
  using namespace gmres_detail;
  GmresResult r;
  r.x.assign(b.size(), cplx{});
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    r.converged = true;
    return r;
  }
  const std::size_t m = cfg.restart;
  while (r.iterations < cfg.max_iter) {
    std::vector<cplx> res = b;
    const auto Ax = apply(r.x);
    for (std::size_t k = 0; k < res.size(); ++k)
      res[k] -= Ax[k];
    const double beta = norm2(res);
    if (beta <= cfg.tol * bnorm) {
      r.converged = true;
      break;
    }
    std::vector<std::vector<cplx>> Vb{res};
    for (auto& v : Vb[0])
      v /= beta;
    std::vector<std::vector<cplx>> H(m + 1, std::vector<cplx>(m, cplx{}));
    std::vector<double> cs(m);
    std::vector<cplx> sn(m), gv(m + 1, cplx{});
    gv[0] = beta;
    std::size_t k = 0;
    const double start = r.history.empty() ? 1.0 : r.history.back();
    for (; k < m && r.iterations < cfg.max_iter; ++k) {
      std::vector<cplx> w = apply(Vb[k]);
      for (std::size_t j = 0; j <= k; ++j) { // modified Gram-Schmidt
        H[j][k] = dot(Vb[j], w);
        for (std::size_t q = 0; q < w.size(); ++q)
          w[q] -= H[j][k] * Vb[j][q];
      }
      const double hn = norm2(w);
      H[k + 1][k] = hn;
      for (std::size_t j = 0; j < k; ++j) {
        const cplx t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -std::conj(sn[j]) * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const cplx h1 = H[k][k], h2 = H[k + 1][k];
      const double den = std::hypot(std::abs(h1), std::abs(h2));
      if (std::abs(h1) == 0.0) {
        cs[k] = 0.0;
        sn[k] = 1.0;
      } else {
        cs[k] = std::abs(h1) / den;
        sn[k] = (h1 / std::abs(h1)) * std::conj(h2) / den;
      }
      H[k][k] = cs[k] * h1 + sn[k] * h2;
      H[k + 1][k] = 0.0;
      gv[k + 1] = -std::conj(sn[k]) * gv[k];
      gv[k] = cs[k] * gv[k];
      ++r.iterations;
      r.history.push_back(std::abs(gv[k + 1]) / bnorm);
      if (hn > 0.0) {
        for (auto& v : w)
          v /= hn;
      }
      Vb.push_back(std::move(w));
      if (r.history.back() <= cfg.tol || hn == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution and update
    std::vector<cplx> y(k);
    for (std::size_t i = k; i-- > 0;) {
      cplx s = gv[i];
      for (std::size_t j = i + 1; j < k; ++j)
        s -= H[i][j] * y[j];
      y[i] = s / H[i][i];
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t q = 0; q < r.x.size(); ++q)
        r.x[q] += y[j] * Vb[j][q];
    if (!r.history.empty() && r.history.back() > 0.999 * start && k == m)
      break; // a full cycle without progress
  }
  if (!r.converged) {
    std::vector<cplx> res = b;
    const auto Ax = apply(r.x);
    for (std::size_t k = 0; k < res.size(); ++k)
      res[k] -= Ax[k];
    r.converged = norm2(res) <= cfg.tol * bnorm;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Global solve.

struct Transition {
  std::size_t index = 0; // H_i on U_{i-1} cap U_i
  MatrixField H, H_inv;
  double sup_H = 0.0, sup_Hinv = 0.0, holomorphy = 0.0;
};

struct GluingFamily {
  std::vector<MatrixField> g;         // g_i on U_i
  std::vector<double> holomorphy;     // sup |dbar g_i| / sup |g_i| on the strip interior
  double factorization_error = 0.0;   // max_i sup |g_{i-1} - H_i g_i| / sup |g_i|
};

struct BeltramiSolution {
  MatrixField P, P_inv;
  double residual = 0.0;
  double M = 0.0;
  std::string method;
  std::size_t iterations = 0;
  std::vector<double> history;
  double identity_error = 0.0; // sup |P P_inv - I|
  // strip artifacts (filled by solve_on_strips)
  std::vector<LocalSolution> locals;
  std::vector<Transition> transitions;
  GluingFamily gluing;
};

struct GlobalConfig {
  GmresConfig gmres{};
  double neumann_threshold = 0.5; // use the Neumann series when ||T|| M below this
};

inline BeltramiSolution global_solve(const MatrixField& A, const CauchyOp& T, const GlobalConfig& cfg = {}) {
  const GridSpec& g = A.spec();
  require_same_grid(g, T.spec(), "global_solve");
  BeltramiSolution sol;
  sol.M = sup_opnorm(A);
  const MatrixField I = MatrixField::identity(g);
  if (transform_norm(T.domain()) * sol.M < cfg.neumann_threshold) {
    NeumannConfig nc;
    nc.certify = false;
    nc.tol = 1e-12;
    LocalSolution loc = local_neumann_solve(A, T, nc);
    sol.P = std::move(loc.P);
    sol.method = "neumann";
    sol.iterations = loc.increments.size();
    sol.history = loc.increments;
  } else {
    const std::size_t N = g.size();
    auto apply = [&](const std::vector<cplx>& x) {
      // x holds one column (q1, q2); returns x - T(A x)
      ComplexField q1(g, std::vector<cplx>(x.begin(), x.begin() + static_cast<long>(N)));
      ComplexField q2(g, std::vector<cplx>(x.begin() + static_cast<long>(N), x.end()));
      ComplexField a1(g), a2(g);
      for (std::size_t k = 0; k < N; ++k) {
        const Mat2 m = A.at(k);
        a1[k] = m.a[0] * q1[k] + m.a[1] * q2[k];
        a2[k] = m.a[2] * q1[k] + m.a[3] * q2[k];
      }
      const ComplexField t1 = T.transform(a1), t2 = T.transform(a2);
      std::vector<cplx> out(2 * N);
      for (std::size_t k = 0; k < N; ++k) {
        out[k] = x[k] - t1[k];
        out[N + k] = x[N + k] - t2[k];
      }
      return out;
    };
    MatrixField Q(g);
    for (int c = 0; c < 2; ++c) {
      const ComplexField b1 = T.transform(A.entry(0, c)), b2 = T.transform(A.entry(1, c));
      std::vector<cplx> b(2 * N);
      std::copy(b1.values().begin(), b1.values().end(), b.begin());
      std::copy(b2.values().begin(), b2.values().end(), b.begin() + static_cast<long>(N));
      GmresResult r = gmres(apply, b, cfg.gmres);
      sol.iterations += r.iterations;
      sol.history.insert(sol.history.end(), r.history.begin(), r.history.end());
      if (!r.converged) {
        std::ostringstream msg;
        msg << "global_solve: Krylov stagnation in column " << c << " after " << r.iterations
            << " iterations; residual history:";
        for (std::size_t k = 0; k < r.history.size(); k += std::max<std::size_t>(1, r.history.size() / 10))
          msg << ' ' << r.history[k];
        if (!r.history.empty())
          msg << ' ' << r.history.back();
        throw NonConvergence(msg.str(), r.history.empty() ? 0.0 : r.history.back());
      }
      for (std::size_t k = 0; k < N; ++k) {
        Q.entry(0, c)[k] = r.x[k];
        Q.entry(1, c)[k] = r.x[N + k];
      }
    }
    sol.P = I + Q;
    sol.method = "gmres";
  }
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(sol.P.at(k).det()) == 0.0)
      throw Error("global_solve: P is singular");
  sol.P_inv = inverse(sol.P);
  double e = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    e = std::max(e, frobenius(sol.P.at(k) * sol.P_inv.at(k) - Mat2::identity()));
  sol.identity_error = e;
  sol.residual = beltrami_residual(sol.P, A, physical_interior(g, square_margin_fraction));
  return sol;
}

inline BeltramiSolution global_solve(const MatrixField& A, const GlobalConfig& cfg = {}) {
  return global_solve(A, CauchyOp(A.spec()), cfg);
}

// ---------------------------------------------------------------------------
// Strips: local solves, transitions, gluing.

/// Local solves on every U_i of a grid over R; locals[i].P lives on U_i's cells.
inline std::vector<LocalSolution> local_solves(const MatrixField& A, const StripPartition& p,
                                               const NeumannConfig& cfg = {}) {
  const std::size_t m = cells_per_unit(p, A.spec());
  std::vector<LocalSolution> out;
  for (std::size_t i = 0; i <= p.i0; ++i) {
    const MatrixField Ai = A.sub(columns(A.spec(), m, p.V[i]));
    LocalSolution s = local_neumann_solve(Ai, cfg);
    s.index = i;
    out.push_back(std::move(s));
  }
  return out;
}

/// H_i = P_{i-1}^{-1} P_i on each overlap, with norms and holomorphy residual.
inline std::vector<Transition> transition_matrices(const std::vector<LocalSolution>& locals, const StripPartition& p) {
  if (locals.size() != p.i0 + 1)
    throw Error("transition_matrices: need one local solution per strip");
  std::vector<Transition> out;
  for (std::size_t i = 1; i <= p.i0; ++i) {
    const GridSpec& gl = locals[i - 1].P.spec();
    const std::size_t m = gl.nx / 3;
    // overlap = last m columns of U_{i-1} = first m columns of U_i
    const Window wl{2 * m, 3 * m, 0, gl.ny};
    const Window wr{0, m, 0, gl.ny};
    Transition t;
    t.index = i;
    t.H = locals[i - 1].P_inv.sub(wl) * locals[i].P.sub(wr);
    t.H_inv = inverse(t.H);
    t.sup_H = sup_opnorm(t.H);
    t.sup_Hinv = sup_opnorm(t.H_inv);
    t.holomorphy = holomorphy_residual(t.H, physical_interior(t.H.spec(), strip_margin_fraction));
    out.push_back(std::move(t));
  }
  return out;
}

/// g_i = P_i^{-1} P on U_i, P the global solution on R.
inline GluingFamily derive_gluing(const BeltramiSolution& global, const std::vector<LocalSolution>& locals,
                                  const std::vector<Transition>& H, const StripPartition& p) {
  const std::size_t m = cells_per_unit(p, global.P.spec());
  GluingFamily f;
  for (std::size_t i = 0; i <= p.i0; ++i) {
    MatrixField gi = locals[i].P_inv * global.P.sub(columns(global.P.spec(), m, p.V[i]));
    f.holomorphy.push_back(holomorphy_residual(gi, physical_interior(gi.spec(), strip_margin_fraction)));
    f.g.push_back(std::move(gi));
  }
  for (std::size_t i = 1; i <= p.i0; ++i) {
    const GridSpec& gs = f.g[i].spec();
    const Window wl{2 * m, 3 * m, 0, gs.ny}, wr{0, m, 0, gs.ny};
    const MatrixField diff = f.g[i - 1].sub(wl) - H[i - 1].H * f.g[i].sub(wr);
    f.factorization_error = std::max(f.factorization_error, sup_frobenius(diff) / sup_frobenius(f.g[i]));
  }
  return f;
}

/// Local solves, transitions and gluing attached to a global solution over R.
inline void solve_on_strips(BeltramiSolution& sol, const MatrixField& A, const StripPartition& p,
                            const NeumannConfig& cfg = {}) {
  sol.locals = local_solves(A, p, cfg);
  sol.transitions = transition_matrices(sol.locals, p);
  sol.gluing = derive_gluing(sol, sol.locals, sol.transitions, p);
}

// ---------------------------------------------------------------------------
// Gluing bounds.

struct OverlapRatio {
  std::size_t index = 0;
  double lo = 0.0, hi = 0.0; // range of |g_{i-1}| / |g_i| on the overlap
  bool hypothesis = false;   // ||H_i||, ||H_i^{-1}|| <= 10
  bool holds = false;        // [lo, hi] inside [1/10, 10]
};

struct GluingCertificate {
  std::vector<OverlapRatio> ratios;
  bool ratios_hold = true;     // every overlap whose hypothesis holds passes
  double C_hat = 0.0;          // delta^2 ln sup_i sup_{U_i} (|g_i|^2 + |g_i^{-1}|^2)
  double log_sup = 0.0;        // the ln sup itself
  // |g_i|^2 in [2/10^2, 2 10^2] on dR cap U_i needs the boundary normalization
  // g_i* g_i = I, which the derived family does not have: recorded only.
  double boundary_g2_min = 0.0, boundary_g2_max = 0.0;
  bool boundary_conditional = true;
  bool boundary_holds = false;
};

inline GluingCertificate verify_gluing_bounds(const GluingFamily& f, const std::vector<Transition>& H,
                                              const StripPartition& p) {
  GluingCertificate c;
  for (std::size_t i = 1; i <= p.i0; ++i) {
    const GridSpec& gs = f.g[i].spec();
    const std::size_t m = gs.nx / 3;
    OverlapRatio r;
    r.index = i;
    r.lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < gs.ny; ++j)
      for (std::size_t q = 0; q < m; ++q) {
        const double ratio = frobenius(f.g[i - 1].at(2 * m + q, j)) / frobenius(f.g[i].at(q, j));
        r.lo = std::min(r.lo, ratio);
        r.hi = std::max(r.hi, ratio);
      }
    r.hypothesis = H[i - 1].sup_H <= 10.0 && H[i - 1].sup_Hinv <= 10.0;
    r.holds = r.lo >= 0.1 && r.hi <= 10.0;
    if (r.hypothesis && !r.holds)
      c.ratios_hold = false;
    c.ratios.push_back(r);
  }
  double sup = 0.0;
  c.boundary_g2_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= p.i0; ++i) {
    const MatrixField& g = f.g[i];
    const GridSpec& gs = g.spec();
    for (std::size_t j = 0; j < gs.ny; ++j)
      for (std::size_t q = 0; q < gs.nx; ++q) {
        const Mat2 a = g.at(q, j);
        const double f2 = std::norm(frobenius(a));
        sup = std::max(sup, f2 + std::norm(frobenius(a.inverse())));
        const bool on_dR = j == 0 || j + 1 == gs.ny || (i == 0 && q == 0) || (i == p.i0 && q + 1 == gs.nx);
        if (on_dR) {
          c.boundary_g2_min = std::min(c.boundary_g2_min, f2);
          c.boundary_g2_max = std::max(c.boundary_g2_max, f2);
        }
      }
  }
  c.log_sup = std::log(sup);
  c.C_hat = p.delta * p.delta * c.log_sup;
  c.boundary_holds = c.boundary_g2_min >= 2e-2 && c.boundary_g2_max <= 2e2;
  return c;
}

// ---------------------------------------------------------------------------
// The subharmonic majorant.

struct MajorantSchedule {
  double delta = 0.0;
  std::size_t i0 = 0;
  double A_const = 10.5 * std::log(10.0);
  double B_const = 3.0 * std::log(10.0);
  std::vector<double> c_plus, b_plus;   // i = 0..i0
  std::vector<double> c_minus, b_minus; // i = 1..i0 (index 0 unused)

  static MajorantSchedule make(const StripPartition& p) {
    MajorantSchedule s;
    s.delta = p.delta;
    s.i0 = p.i0;
    for (std::size_t i = 0; i <= p.i0; ++i) {
      const auto di = static_cast<double>(i);
      s.c_plus.push_back(di * s.A_const / p.delta);
      s.b_plus.push_back(-0.5 * di * (di + 1.0) * s.A_const - di * s.B_const);
      s.c_minus.push_back(i == 0 ? 0.0 : s.c_plus[i - 1]);
      s.b_minus.push_back(i == 0 ? 0.0 : s.b_plus[i - 1]);
    }
    return s;
  }

  /// ln 2 + (i0 (i0 + 1) / 2) A - i0 B, the stated boundary bound for |g|^2 = 2.
  [[nodiscard]] double log_boundary_bound() const {
    const auto k = static_cast<double>(i0);
    return std::log(2.0) + 0.5 * k * (k + 1.0) * A_const - k * B_const;
  }
  /// Same with the last strip running to x = 1 > (i0 + 1) delta:
  /// ln 2 + (i0 (i0 + 2) / 2) A - i0 B.
  [[nodiscard]] double log_boundary_bound_last_strip() const {
    const auto k = static_cast<double>(i0);
    return std::log(2.0) + 0.5 * k * (k + 2.0) * A_const - k * B_const;
  }
};

struct InterfaceCheck {
  std::size_t index = 0;
  double left_max = 0.0;   // max of D = ln(branch_i / branch_{i-1}) near x_i^-, must be <= 0
  double right_min = 0.0;  // min of D near x_i^+, must be >= 0
  double printed_right_min = 0.0; // min of D over the printed 11/21 band (clipped to the overlap)
  bool holds = false;
};

struct MajorantCertificate {
  std::vector<InterfaceCheck> interfaces;
  bool continuity = false;        // bands 1/10.5 near x_i^- and 1/42 near x_i^+
  bool continuity_printed_band = false; // with the printed band 11/21 near x_i^+
  double max_subharmonic_defect = 0.0; // max over interior of (1 - mean(nbrs)/v) / h^2
  double subharmonic_tolerance = 0.0;
  bool subharmonic = false;
  double log_boundary_max = 0.0;
  double log_bound = 0.0;            // stated constant
  double log_bound_last_strip = 0.0; // constant with x_{i0+1}^- = 1
  bool boundary_bound = false;
  bool boundary_bound_last_strip = false;
};

struct Majorant {
  RealField log_v;
  MajorantCertificate certificate;
};

inline constexpr double band_near_minus = 1.0 / 10.5;
inline constexpr double band_near_plus = 1.0 / 42.0;
inline constexpr double band_near_plus_printed = 11.0 / 21.0;

/**
 * v assembled in log-space on the R grid from |g_i|^2 and the schedule.
 * `subharmonic_C` scales the h^2 allowance of the discrete mean-value check.
 */
inline Majorant majorant(const GluingFamily& f, const MajorantSchedule& s, const StripPartition& p,
                         const GridSpec& R, double subharmonic_C = 10.0) {
  const std::size_t m = cells_per_unit(p, R);
  if (f.g.size() != p.i0 + 1 || s.i0 != p.i0)
    throw Error("majorant: family, schedule and partition disagree");
  auto log_g2 = [&](std::size_t i, std::size_t col, std::size_t j) {
    const std::size_t local = col - static_cast<std::size_t>(p.V[i].a) * m;
    return 2.0 * std::log(frobenius(f.g[i].at(local, j)));
  };
  auto branch = [&](std::size_t i, std::size_t col, std::size_t j, double x) {
    return log_g2(i, col, j) + s.c_plus[i] * x + s.b_plus[i];
  };
  Majorant out;
  out.log_v = RealField(R);
  for (std::size_t i = 0; i <= p.i0; ++i) {
    const Window w = columns(R, m, p.W[i]);
    for (std::size_t j = 0; j < R.ny; ++j)
      for (std::size_t c = w.i0; c < w.i1; ++c)
        out.log_v(c, j) = branch(i, c, j, R.x(c));
  }
  for (std::size_t i = 1; i <= p.i0; ++i) {
    const Window w = columns(R, m, p.overlaps[i - 1]);
    for (std::size_t j = 0; j < R.ny; ++j)
      for (std::size_t c = w.i0; c < w.i1; ++c) {
        const double x = R.x(c);
        // c_i^- = c_{i-1}^+, b_i^- = b_{i-1}^+
        out.log_v(c, j) = std::max(branch(i - 1, c, j, x), branch(i, c, j, x));
      }
  }

  MajorantCertificate& cert = out.certificate;
  // (a) continuity: sign of D = ln branch_i - ln branch_{i-1} in the bands,
  // including the exact interface abscissae with |g| from the adjacent column.
  cert.continuity = cert.continuity_printed_band = true;
  for (std::size_t i = 1; i <= p.i0; ++i) {
    const Window w = columns(R, m, p.overlaps[i - 1]);
    InterfaceCheck ic;
    ic.index = i;
    ic.left_max = -std::numeric_limits<double>::infinity();
    ic.right_min = ic.printed_right_min = std::numeric_limits<double>::infinity();
    const double xm = p.x_minus(i), xp = p.x_plus(i);
    auto D = [&](std::size_t c, std::size_t j, double x) { return branch(i, c, j, x) - branch(i - 1, c, j, x); };
    for (std::size_t j = 0; j < R.ny; ++j) {
      ic.left_max = std::max(ic.left_max, D(w.i0, j, xm));
      ic.right_min = std::min(ic.right_min, D(w.i1 - 1, j, xp));
      ic.printed_right_min = std::min(ic.printed_right_min, D(w.i1 - 1, j, xp));
      for (std::size_t c = w.i0; c < w.i1; ++c) {
        const double x = R.x(c);
        if (x <= xm + band_near_minus * p.delta)
          ic.left_max = std::max(ic.left_max, D(c, j, x));
        if (x >= xp - band_near_plus * p.delta)
          ic.right_min = std::min(ic.right_min, D(c, j, x));
        if (x >= xp - band_near_plus_printed * p.delta)
          ic.printed_right_min = std::min(ic.printed_right_min, D(c, j, x));
      }
      // the printed band reaches past x_i^- into W_{i-1}; its left end is x_i^-
      ic.printed_right_min = std::min(ic.printed_right_min, D(w.i0, j, xm));
    }
    ic.holds = ic.left_max <= 0.0 && ic.right_min >= 0.0;
    cert.continuity = cert.continuity && ic.holds;
    cert.continuity_printed_band = cert.continuity_printed_band && ic.left_max <= 0.0 && ic.printed_right_min >= 0.0;
    cert.interfaces.push_back(ic);
  }

  // (b) v(z) <= mean of the four neighbours + C h^2 v(z), checked in log-space.
  const Window win = physical_interior(R, square_margin_fraction);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = std::max<std::size_t>(win.j0, 1); j < std::min(win.j1, R.ny - 1); ++j)
    for (std::size_t c = std::max<std::size_t>(win.i0, 1); c < std::min(win.i1, R.nx - 1); ++c) {
      const double L = out.log_v(c, j);
      const double mean = 0.25 * (std::exp(out.log_v(c - 1, j) - L) + std::exp(out.log_v(c + 1, j) - L) +
                                  std::exp(out.log_v(c, j - 1) - L) + std::exp(out.log_v(c, j + 1) - L));
      worst = std::max(worst, (1.0 - mean) / (R.h * R.h));
    }
  cert.max_subharmonic_defect = worst;
  cert.subharmonic_tolerance = subharmonic_C;
  cert.subharmonic = worst <= subharmonic_C;

  // (c) boundary bound
  double bmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < R.ny; ++j)
    for (std::size_t c = 0; c < R.nx; ++c)
      if (j == 0 || c == 0 || j + 1 == R.ny || c + 1 == R.nx)
        bmax = std::max(bmax, out.log_v(c, j));
  cert.log_boundary_max = bmax;
  cert.log_bound = s.log_boundary_bound();
  cert.log_bound_last_strip = s.log_boundary_bound_last_strip();
  cert.boundary_bound = bmax <= cert.log_bound;
  cert.boundary_bound_last_strip = bmax <= cert.log_bound_last_strip;
  return out;
}

/// The all-identity gluing family g_i = I on the strips of a grid over R.
inline GluingFamily identity_family(const StripPartition& p, const GridSpec& R) {
  const std::size_t m = cells_per_unit(p, R);
  GluingFamily f;
  for (std::size_t i = 0; i <= p.i0; ++i) {
    f.g.push_back(MatrixField::identity(R.sub(static_cast<std::size_t>(p.V[i].a) * m, 0, 3 * m, R.ny)));
    f.holomorphy.push_back(0.0);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Sweep of ln(||P|| + ||P^{-1}||) against M^2 (ln M)^2.

struct SweepRow {
  double M = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double sup_P = 0.0, sup_Pinv = 0.0;
  double log_sum = 0.0; // ln(sup ||P|| + sup ||P^{-1}||)
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  std::size_t iterations = 0;
  std::string method;
};

inline SweepRow bound_sweep_row(double M, std::uint64_t seed, std::size_t n, const GlobalConfig& cfg = {}) {
  const GridSpec R = unit_square_grid(n);
  const auto fn = RandomMatrixFn::make(seed, M, Rect{0, 1, 0, 1});
  const MatrixField A = sample_matrix(R, fn);
  const BeltramiSolution sol = global_solve(A, cfg);
  SweepRow r;
  r.M = M;
  r.seed = seed;
  r.n = n;
  r.sup_P = sup_opnorm(sol.P);
  r.sup_Pinv = sup_opnorm(sol.P_inv);
  r.log_sum = std::log(r.sup_P + r.sup_Pinv);
  if (M > 1.0)
    r.ratio = r.log_sum / std::pow(M * std::log(M), 2);
  r.residual = sol.residual;
  r.iterations = sol.iterations;
  r.method = sol.method;
  return r;
}

inline std::vector<SweepRow> bound_sweep(const std::vector<double>& Ms, const std::vector<std::uint64_t>& seeds,
                                         std::size_t n, const GlobalConfig& cfg = {}) {
  std::vector<SweepRow> rows;
  for (double M : Ms)
    for (std::uint64_t s : seeds)
      rows.push_back(bound_sweep_row(M, s, n, cfg));
  return rows;
}

} // namespace ucplab
