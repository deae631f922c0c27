#pragma once

// Admissible potentials, the Dirichlet problem for -Lap u + V u = f on a
// square grid, and the rescaling map z -> z1 + T z.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "field.hpp"

namespace ucplab {

/// Thrown when conjugate gradients exhausts its budget.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, double last_residual)
      : Error(what), residual(last_residual) {}
  double residual;
};

/// Deterministic uniform draws in [0, 1) from a 64-bit Mersenne twister.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  std::uint64_t next() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

/// Smooth random function: a sum of at most 8 low-frequency cosine modes.
struct TrigModes {
  struct Mode {
    double amplitude, kx, ky, phase;
  };
  std::vector<Mode> modes;

  static TrigModes random(Rng& rng, std::size_t count = 8, double base_frequency = pi / 2) {
    TrigModes t;
    count = std::clamp<std::size_t>(count, 1, 8);
    for (std::size_t k = 0; k < count; ++k) {
      int p = 0, q = 0;
      while (p == 0 && q == 0) {
        p = rng.integer(-3, 3);
        q = rng.integer(-3, 3);
      }
      t.modes.push_back({rng.uniform(0.2, 1.0), base_frequency * p, base_frequency * q,
                         rng.uniform(0.0, 2.0 * pi)});
    }
    return t;
  }

  [[nodiscard]] double operator()(cplx z) const {
    double s = 0.0;
    for (const auto& m : modes)
      s += m.amplitude * std::cos(m.kx * z.real() + m.ky * z.imag() + m.phase);
    return s;
  }

  /// Sum of |amplitude|, an exact bound on sup |modes|.
  [[nodiscard]] double bound() const {
    double s = 0.0;
    for (const auto& m : modes)
      s += std::abs(m.amplitude);
    return s;
  }
};

struct PotentialMode {
  enum class Kind { Local, Global };
  Kind kind = Kind::Local;
  double c0 = 1.0;
  double eps0 = 1.0;

  static PotentialMode local() { return {}; }
  static PotentialMode global(double c0, double eps0) { return {Kind::Global, c0, eps0}; }
};

struct Potential {
  RealField Vplus;
  RealField Vminus;
  double lambda = 1.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  PotentialMode mode;

  [[nodiscard]] RealField V() const { return Vplus - Vminus; }
  [[nodiscard]] const GridSpec& spec() const { return Vplus.spec(); }
};

/**
 * Random admissible potential. V+ = lambda^2 (1 + S/|S|max)/2 and
 * V- = delta^2 (1 + S'/|S'|max)/2 for independent mode sums S, S', both
 * clipped into their ranges; global mode multiplies V- by
 * exp(-c0 |z|^(1 + eps0)). The fields are continuous functions of z, so the
 * same seed gives the same potential on every grid.
 */
inline Potential gen_potential(std::uint64_t seed, double lambda, double delta, const GridSpec& spec,
                               PotentialMode mode = PotentialMode::local()) {
  if (delta < 0.0)
    throw Error("gen_potential: delta must be nonnegative");
  if (!(lambda >= 1.0) || delta > 1.0)
    throw Error("gen_potential: need lambda >= 1 >= delta");
  Rng rng(seed);
  const TrigModes plus = TrigModes::random(rng, 8);
  const TrigModes minus = TrigModes::random(rng, 8);
  const double l2 = lambda * lambda;
  const double d2 = delta * delta;
  Potential p;
  p.lambda = lambda;
  p.delta = delta;
  p.seed = seed;
  p.mode = mode;
  p.Vplus = RealField::sample(spec, [&](cplx z) {
    return std::clamp(0.5 * l2 * (1.0 + plus(z) / plus.bound()), 0.0, l2);
  });
  p.Vminus = RealField::sample(spec, [&](cplx z) {
    if (d2 == 0.0)
      return 0.0;
    double v = std::clamp(0.5 * d2 * (1.0 + minus(z) / minus.bound()), 0.0, d2);
    if (mode.kind == PotentialMode::Kind::Global)
      v *= std::exp(-mode.c0 * std::pow(std::abs(z), 1.0 + mode.eps0));
    return v;
  });
  return p;
}

struct SolveConfig {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
};

struct SolveStats {
  std::size_t iterations = 0;
  double residual = 0.0;
  bool preconditioned = false;
};

/// Smallest eigenvalue of the discrete Dirichlet -Lap on the interior cells.
inline double dirichlet_mu1(const GridSpec& g) {
  auto term = [&](std::size_t n) {
    const double s = std::sin(pi / (2.0 * static_cast<double>(n - 1)));
    return 4.0 * s * s / (g.h * g.h);
  };
  return term(g.nx) + term(g.ny);
}

namespace detail {

// (-Lap_h + V) on interior cells of a flat grid array, ring entries treated as 0.
inline void apply_operator(const GridSpec& g, const std::vector<double>& V, const std::vector<double>& x,
                           std::vector<double>& y) {
  const double ih2 = 1.0 / (g.h * g.h);
  const std::size_t nx = g.nx, ny = g.ny;
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    const std::size_t row = j * nx;
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = row + i;
      const double l = (i > 1 ? x[k - 1] : 0.0) + (i + 2 < nx ? x[k + 1] : 0.0) +
                       (j > 1 ? x[k - nx] : 0.0) + (j + 2 < ny ? x[k + nx] : 0.0);
      y[k] = (4.0 * x[k] - l) * ih2 + V[k] * x[k];
    }
  }
}

inline double dot_interior(const GridSpec& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t k = j * g.nx + i;
      s += a[k] * b[k];
    }
  return s;
}

// (Preconditioned) conjugate gradients; x holds the initial guess on entry.
inline bool conjugate_gradients(const GridSpec& g, const std::vector<double>& V, const std::vector<double>& b,
                                std::vector<double>& x, const SolveConfig& cfg, bool jacobi,
                                SolveStats& stats) {
  const std::size_t N = g.size();
  const double ih2 = 1.0 / (g.h * g.h);
  std::vector<double> r(N, 0.0), z(N, 0.0), p(N, 0.0), Ap(N, 0.0);
  apply_operator(g, V, x, Ap);
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t k = j * g.nx + i;
      r[k] = b[k] - Ap[k];
    }
  auto precondition = [&]() {
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
      for (std::size_t i = 1; i + 1 < g.nx; ++i) {
        const std::size_t k = j * g.nx + i;
        z[k] = jacobi ? r[k] / (4.0 * ih2 + V[k]) : r[k];
      }
  };
  const double bnorm = std::sqrt(dot_interior(g, b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.residual = 0.0;
    return true;
  }
  precondition();
  p = z;
  double rz = dot_interior(g, r, z);
  double rnorm = std::sqrt(dot_interior(g, r, r));
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    stats.iterations = it;
    stats.residual = rnorm / bnorm;
    if (stats.residual <= cfg.tol)
      return true;
    apply_operator(g, V, p, Ap);
    const double pAp = dot_interior(g, p, Ap);
    if (!(pAp > 0.0))
      return false;
    const double a = rz / pAp;
    for (std::size_t k = 0; k < N; ++k) {
      x[k] += a * p[k];
      r[k] -= a * Ap[k];
    }
    precondition();
    const double rz_new = dot_interior(g, r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < N; ++k)
      p[k] = z[k] + beta * p[k];
    rnorm = std::sqrt(dot_interior(g, r, r));
  }
  stats.residual = rnorm / bnorm;
  stats.iterations = cfg.max_iter;
  return stats.residual <= cfg.tol;
}

} // namespace detail

/**
 * Solve (-Lap_h + V) u = f on the interior cells with u fixed to the
 * boundary ring of `start`. Interior values of `start` are the initial guess.
 * Unpreconditioned CG first, Jacobi-preconditioned CG as the fallback.
 */
inline RealField solve_dirichlet(const RealField& V, const RealField& start, const RealField& f,
                                 const SolveConfig& cfg = {}, SolveStats* stats_out = nullptr) {
  const GridSpec& g = V.spec();
  require_same_grid(g, start.spec(), "solve_dirichlet");
  require_same_grid(g, f.spec(), "solve_dirichlet");
  if (!(cfg.tol > 0.0))
    throw Error("solve_dirichlet: tol must be positive");
  if (g.nx < 4 || g.ny < 4)
    throw Error("solve_dirichlet: grid too small");
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      vmin = std::min(vmin, V(i, j));
  if (!(vmin > -dirichlet_mu1(g)))
    throw Error("solve_dirichlet: indefinite system (inf V <= -mu1)");

  const double ih2 = 1.0 / (g.h * g.h);
  const std::size_t N = g.size();
  std::vector<double> b(N, 0.0), x(N, 0.0);
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      double rhs = f[k];
      if (i == 1)
        rhs += start(0, j) * ih2;
      if (i + 2 == g.nx)
        rhs += start(g.nx - 1, j) * ih2;
      if (j == 1)
        rhs += start(i, 0) * ih2;
      if (j + 2 == g.ny)
        rhs += start(i, g.ny - 1) * ih2;
      b[k] = rhs;
      x[k] = start[k];
    }
  SolveStats stats;
  const std::vector<double> x0 = x;
  bool ok = detail::conjugate_gradients(g, V.values(), b, x, cfg, false, stats);
  if (!ok) {
    x = x0;
    stats = {};
    stats.preconditioned = true;
    ok = detail::conjugate_gradients(g, V.values(), b, x, cfg, true, stats);
  }
  if (stats_out)
    *stats_out = stats;
  if (!ok)
    throw NonConvergence("solve_dirichlet: CG did not converge, residual " +
                             std::to_string(stats.residual),
                         stats.residual);
  RealField u = start;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      u(i, j) = x[g.index(i, j)];
  return u;
}

using BoundaryFn = std::function<double(cplx)>;

/// Boundary ring sampled from g, interior initial guess zero.
inline RealField boundary_start(const GridSpec& spec, const BoundaryFn& g) {
  RealField s(spec);
  for (std::size_t j = 0; j < spec.ny; ++j)
    for (std::size_t i = 0; i < spec.nx; ++i)
      if (i == 0 || j == 0 || i + 1 == spec.nx || j + 1 == spec.ny)
        s(i, j) = g(spec.point(i, j));
  return s;
}

inline RealField solve_dirichlet(const RealField& V, const BoundaryFn& g, const RealField& f,
                                 const SolveConfig& cfg = {}, SolveStats* stats = nullptr) {
  return solve_dirichlet(V, boundary_start(V.spec(), g), f, cfg, stats);
}

/// Interior residual (-Lap_h + V) u - f, zero on the ring.
inline RealField discrete_residual(const RealField& V, const RealField& u, const RealField& f) {
  const GridSpec& g = u.spec();
  const double ih2 = 1.0 / (g.h * g.h);
  RealField r(g);
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      r(i, j) = (4.0 * u(i, j) - u(i - 1, j) - u(i + 1, j) - u(i, j - 1) - u(i, j + 1)) * ih2 +
                V(i, j) * u(i, j) - f(i, j);
  return r;
}

struct Rescaled {
  RealField u;
  RealField V;
};

/// u~(z) = u(z1 + T z), V~(z) = T^2 V(z1 + T z) sampled on `target`.
inline Rescaled rescale(const RealField& u, const RealField& V, cplx z1, double T, const GridSpec& target) {
  if (!(T > 0.0))
    throw Error("rescale: T must be positive");
  require_same_grid(u.spec(), V.spec(), "rescale");
  const GridSpec& s = u.spec();
  const double lo_x = s.x(0), hi_x = s.x(s.nx - 1), lo_y = s.y(0), hi_y = s.y(s.ny - 1);
  const double tol = 1e-9 * s.h;
  const cplx a = z1 + T * target.point(0, 0);
  const cplx b = z1 + T * target.point(target.nx - 1, target.ny - 1);
  if (a.real() < lo_x - tol || a.imag() < lo_y - tol || b.real() > hi_x + tol || b.imag() > hi_y + tol)
    throw Error("rescale: footprint exceeded");
  Rescaled r{RealField(target), RealField(target)};
  for (std::size_t j = 0; j < target.ny; ++j)
    for (std::size_t i = 0; i < target.nx; ++i) {
      const cplx w = z1 + T * target.point(i, j);
      r.u(i, j) = sample_bilinear(u, w);
      r.V(i, j) = T * T * sample_bilinear(V, w);
    }
  return r;
}

} // namespace ucplab
