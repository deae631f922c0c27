#pragma once

// Uniform cell-centered grids, sampled fields, finite-difference calculus and
// region norms. Every other header in ucplab builds on these types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace ucplab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

template <typename T> struct is_complex : std::false_type {};
template <typename T> struct is_complex<std::complex<T>> : std::true_type {};

/**
 * Rectangular cell-centered grid. Cell (i, j) has its center at
 * (x0 + (i + 1/2) h, y0 + (j + 1/2) h); i runs along x, j along y, and values
 * are stored row-major from the bottom-left cell (index j * nx + i).
 *
 * Square footprints Q_s(z) are built with square(); strips and sub-cubes are
 * sub-rectangles of a parent grid (sub()).
 */
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  static GridSpec square(cplx center, double half_side, std::size_t n) {
    if (n < 8)
      throw Error("GridSpec: need at least 8 cells per side, got " + std::to_string(n));
    if (!(half_side > 0.0))
      throw Error("GridSpec: half_side must be positive");
    GridSpec g;
    g.h = 2.0 * half_side / static_cast<double>(n);
    g.x0 = center.real() - half_side;
    g.y0 = center.imag() - half_side;
    g.nx = g.ny = n;
    return g;
  }

  static GridSpec rect(double x0, double y0, double h, std::size_t nx, std::size_t ny) {
    if (!(h > 0.0) || nx == 0 || ny == 0)
      throw Error("GridSpec: empty rectangle");
    return GridSpec{x0, y0, h, nx, ny};
  }

  [[nodiscard]] std::size_t size() const { return nx * ny; }
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  [[nodiscard]] double x(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * h; }
  [[nodiscard]] double y(std::size_t j) const { return y0 + (static_cast<double>(j) + 0.5) * h; }
  [[nodiscard]] cplx point(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }
  [[nodiscard]] double x1() const { return x0 + static_cast<double>(nx) * h; }
  [[nodiscard]] double y1() const { return y0 + static_cast<double>(ny) * h; }
  [[nodiscard]] bool is_square() const { return nx == ny; }
  [[nodiscard]] cplx center() const { return {0.5 * (x0 + x1()), 0.5 * (y0 + y1())}; }
  [[nodiscard]] double half_side() const { return 0.5 * static_cast<double>(nx) * h; }

  /// Sub-rectangle of cells [i0, i0 + mx) x [j0, j0 + my).
  [[nodiscard]] GridSpec sub(std::size_t i0, std::size_t j0, std::size_t mx, std::size_t my) const {
    if (i0 + mx > nx || j0 + my > ny || mx == 0 || my == 0)
      throw Error("GridSpec::sub: window exceeds grid");
    return GridSpec{x0 + static_cast<double>(i0) * h, y0 + static_cast<double>(j0) * h, h, mx, my};
  }

  [[nodiscard]] bool same_as(const GridSpec& o) const {
    const double tol = 1e-12 * std::max({1.0, std::abs(x0), std::abs(y0), h * static_cast<double>(nx)});
    return nx == o.nx && ny == o.ny && std::abs(h - o.h) <= 1e-12 * h &&
           std::abs(x0 - o.x0) <= tol && std::abs(y0 - o.y0) <= tol;
  }
};

/// Index window [i0, i1) x [j0, j1) of a grid.
struct Window {
  std::size_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  [[nodiscard]] bool empty() const { return i1 <= i0 || j1 <= j0; }
};

inline Window full_window(const GridSpec& g) { return {0, g.nx, 0, g.ny}; }

/// Cells at index distance >= margin from every edge.
inline Window interior(const GridSpec& g, std::size_t margin) {
  if (2 * margin >= g.nx || 2 * margin >= g.ny)
    return {0, 0, 0, 0};
  return {margin, g.nx - margin, margin, g.ny - margin};
}

/// Cells whose centers lie in the closed box [xa, xb] x [ya, yb].
inline Window box_window(const GridSpec& g, double xa, double xb, double ya, double yb) {
  auto lo = [&](double a, double origin, std::size_t n) {
    double t = std::ceil((a - origin) / g.h - 0.5 - 1e-9);
    return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(n)));
  };
  auto hi = [&](double b, double origin, std::size_t n) {
    double t = std::floor((b - origin) / g.h - 0.5 + 1e-9) + 1.0;
    return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(n)));
  };
  return {lo(xa, g.x0, g.nx), hi(xb, g.x0, g.nx), lo(ya, g.y0, g.ny), hi(yb, g.y0, g.ny)};
}

template <typename T> class Field {
public:
  using value_type = T;

  Field() = default;
  explicit Field(GridSpec spec, T fill = T{}) : spec_(spec), values_(spec.size(), fill) {}
  Field(GridSpec spec, std::vector<T> values) : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
      throw Error("Field: value count does not match grid");
  }

  template <typename Fn> static Field sample(const GridSpec& spec, Fn&& fn) {
    Field f(spec);
    for (std::size_t j = 0; j < spec.ny; ++j)
      for (std::size_t i = 0; i < spec.nx; ++i)
        f(i, j) = static_cast<T>(fn(spec.point(i, j)));
    return f;
  }

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<T>& values() const { return values_; }
  [[nodiscard]] std::vector<T>& values() { return values_; }
  T& operator()(std::size_t i, std::size_t j) { return values_[spec_.index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[spec_.index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  template <typename Fn> [[nodiscard]] auto map(Fn&& fn) const {
    using R = std::decay_t<decltype(fn(std::declval<T>()))>;
    Field<R> out(spec_);
    for (std::size_t k = 0; k < values_.size(); ++k)
      out[k] = fn(values_[k]);
    return out;
  }

  [[nodiscard]] bool all_finite() const {
    for (const auto& v : values_)
      if (!std::isfinite(std::abs(v)))
        return false;
    return true;
  }

  [[nodiscard]] Field sub(const Window& w) const {
    Field out(spec_.sub(w.i0, w.j0, w.i1 - w.i0, w.j1 - w.j0));
    for (std::size_t j = w.j0; j < w.j1; ++j)
      for (std::size_t i = w.i0; i < w.i1; ++i)
        out(i - w.i0, j - w.j0) = (*this)(i, j);
    return out;
  }

  Field& operator+=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a += b; }); }
  Field& operator-=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a -= b; }); }
  Field& operator*=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a *= b; }); }
  Field& operator*=(T s) {
    for (auto& v : values_)
      v *= s;
    return *this;
  }

private:
  template <typename Op> Field& zip_assign(const Field& o, Op op) {
    require_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k)
      op(values_[k], o.values_[k]);
    return *this;
  }
  void require_same(const Field& o) const {
    if (!spec_.same_as(o.spec_))
      throw Error("Field: operands live on different grids");
  }

  GridSpec spec_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

template <typename T> Field<T> operator+(Field<T> a, const Field<T>& b) { return a += b; }
template <typename T> Field<T> operator-(Field<T> a, const Field<T>& b) { return a -= b; }
template <typename T> Field<T> operator*(Field<T> a, const Field<T>& b) { return a *= b; }
template <typename T> Field<T> operator*(Field<T> a, T s) { return a *= s; }
template <typename T> Field<T> operator*(T s, Field<T> a) { return a *= s; }

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!a.same_as(b))
    throw Error(std::string(what) + ": mismatched grids");
}

inline ComplexField to_complex(const RealField& f) {
  return f.map([](double v) { return cplx(v, 0.0); });
}
inline RealField real_part(const ComplexField& f) {
  return f.map([](const cplx& v) { return v.real(); });
}
inline ComplexField conj(const ComplexField& f) {
  return f.map([](const cplx& v) { return std::conj(v); });
}
template <typename T> RealField abs(const Field<T>& f) {
  return f.map([](const T& v) { return static_cast<double>(std::abs(v)); });
}
inline ComplexField exp(const ComplexField& f) {
  return f.map([](const cplx& v) { return std::exp(v); });
}

// ---------------------------------------------------------------------------
// Finite differences. Centered in the interior; second-order one-sided on the
// boundary ring, so first derivatives are exact on quadratics.

namespace detail {

template <typename T>
T first_diff(const T& a0, const T& a1, const T& a2, double inv2h) {
  return (-3.0 * a0 + 4.0 * a1 - a2) * inv2h;
}

template <typename T, typename Get>
T deriv_1d(std::size_t k, std::size_t n, double h, Get get) {
  const double inv2h = 1.0 / (2.0 * h);
  if (k == 0)
    return first_diff(get(0), get(1), get(2), inv2h);
  if (k + 1 == n)
    return -first_diff(get(n - 1), get(n - 2), get(n - 3), inv2h);
  return (get(k + 1) - get(k - 1)) * inv2h;
}

template <typename T, typename Get>
T second_1d(std::size_t k, std::size_t n, double h, Get get) {
  const double inv_h2 = 1.0 / (h * h);
  if (k == 0)
    return (2.0 * get(0) - 5.0 * get(1) + 4.0 * get(2) - get(3)) * inv_h2;
  if (k + 1 == n)
    return (2.0 * get(n - 1) - 5.0 * get(n - 2) + 4.0 * get(n - 3) - get(n - 4)) * inv_h2;
  return (get(k + 1) - 2.0 * get(k) + get(k - 1)) * inv_h2;
}

inline void require_stencil(const GridSpec& g, std::size_t need) {
  if (g.nx < need || g.ny < need)
    throw Error("finite differences: grid too small for the stencil");
}

} // namespace detail

template <typename T> Field<T> d_dx(const Field<T>& f) {
  const auto& g = f.spec();
  detail::require_stencil(g, 3);
  Field<T> out(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      out(i, j) = detail::deriv_1d<T>(i, g.nx, g.h, [&](std::size_t k) { return f(k, j); });
  return out;
}

template <typename T> Field<T> d_dy(const Field<T>& f) {
  const auto& g = f.spec();
  detail::require_stencil(g, 3);
  Field<T> out(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      out(i, j) = detail::deriv_1d<T>(j, g.ny, g.h, [&](std::size_t k) { return f(i, k); });
  return out;
}

/// d/dzbar = (d/dx + i d/dy) / 2
inline ComplexField dbar(const ComplexField& f) {
  auto fx = d_dx(f);
  auto fy = d_dy(f);
  ComplexField out(f.spec());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = 0.5 * (fx[k] + cplx(0.0, 1.0) * fy[k]);
  return out;
}

/// d/dz = (d/dx - i d/dy) / 2
inline ComplexField del(const ComplexField& f) {
  auto fx = d_dx(f);
  auto fy = d_dy(f);
  ComplexField out(f.spec());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = 0.5 * (fx[k] - cplx(0.0, 1.0) * fy[k]);
  return out;
}

inline ComplexField dbar(const RealField& f) { return dbar(to_complex(f)); }
inline ComplexField del(const RealField& f) { return del(to_complex(f)); }

inline std::pair<RealField, RealField> gradient(const RealField& f) { return {d_dx(f), d_dy(f)}; }

/// Five-point Laplacian; third-order one-sided second differences on the ring.
template <typename T> Field<T> laplacian(const Field<T>& f) {
  const auto& g = f.spec();
  detail::require_stencil(g, 4);
  Field<T> out(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      out(i, j) = detail::second_1d<T>(i, g.nx, g.h, [&](std::size_t k) { return f(k, j); }) +
                  detail::second_1d<T>(j, g.ny, g.h, [&](std::size_t k) { return f(i, k); });
  return out;
}

// ---------------------------------------------------------------------------
// Regions and norms.

struct Region {
  enum class Kind { Cube, Ball };
  Kind kind = Kind::Cube;
  cplx center{};
  double size = 0.0; // half side for cubes, radius for balls

  static Region cube(cplx c, double half_side) { return {Kind::Cube, c, half_side}; }
  static Region ball(cplx c, double radius) { return {Kind::Ball, c, radius}; }

  [[nodiscard]] bool contains(cplx z) const {
    const cplx d = z - center;
    if (kind == Kind::Cube)
      return std::abs(d.real()) <= size && std::abs(d.imag()) <= size;
    return std::norm(d) <= size * size;
  }
};

namespace detail {

inline void require_inside(const GridSpec& g, const Region& r) {
  const double tol = 1e-9 * std::max(1.0, g.h * static_cast<double>(std::max(g.nx, g.ny)));
  if (r.center.real() - r.size < g.x0 - tol || r.center.real() + r.size > g.x1() + tol ||
      r.center.imag() - r.size < g.y0 - tol || r.center.imag() + r.size > g.y1() + tol)
    throw Error("region exceeds the grid footprint");
}

template <typename T, typename Acc>
std::size_t over_region(const Field<T>& f, const Region& r, Acc acc) {
  const auto& g = f.spec();
  require_inside(g, r);
  const Window w = box_window(g, r.center.real() - r.size, r.center.real() + r.size,
                              r.center.imag() - r.size, r.center.imag() + r.size);
  std::size_t count = 0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      if (r.contains(g.point(i, j))) {
        acc(f(i, j));
        ++count;
      }
  if (count == 0)
    throw Error("region contains no grid cells");
  return count;
}

} // namespace detail

/// sup |f| over cells whose centers lie in r.
template <typename T> double sup_norm(const Field<T>& f, const Region& r) {
  double m = 0.0;
  detail::over_region(f, r, [&](const T& v) { m = std::max(m, static_cast<double>(std::abs(v))); });
  return m;
}

/// h^2 * sum |f|^2 over cells whose centers lie in r.
template <typename T> double l2_sq(const Field<T>& f, const Region& r) {
  double s = 0.0;
  detail::over_region(f, r, [&](const T& v) { s += std::norm(v); });
  return s * f.spec().h * f.spec().h;
}

template <typename T> double sup_abs(const Field<T>& f, const Window& w) {
  double m = 0.0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      m = std::max(m, static_cast<double>(std::abs(f(i, j))));
  return m;
}

template <typename T> double sup_abs(const Field<T>& f) { return sup_abs(f, full_window(f.spec())); }

// ---------------------------------------------------------------------------
// Bilinear interpolation through cell centers.

template <typename T> T sample_bilinear(const Field<T>& f, cplx z) {
  const auto& g = f.spec();
  const double s = (z.real() - g.x0) / g.h - 0.5;
  const double t = (z.imag() - g.y0) / g.h - 0.5;
  const double eps = 1e-9;
  if (s < -eps || t < -eps || s > static_cast<double>(g.nx - 1) + eps ||
      t > static_cast<double>(g.ny - 1) + eps)
    throw Error("sample_bilinear: point outside the cell-center hull");
  auto clampi = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(n - 2)));
  };
  const std::size_t i = clampi(s, g.nx);
  const std::size_t j = clampi(t, g.ny);
  const double a = s - static_cast<double>(i);
  const double b = t - static_cast<double>(j);
  return (1 - a) * (1 - b) * f(i, j) + a * (1 - b) * f(i + 1, j) + (1 - a) * b * f(i, j + 1) +
         a * b * f(i + 1, j + 1);
}

} // namespace ucplab
