#pragma once

// The Cauchy-Pompeiu transform T F(z) = (1/pi) int F(xi) / (z - xi) dA(xi)
// over a rectangle (optionally masked to a disk), discretized on the
// cell-centered grid of the rectangle, plus kernel-mass estimates.

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <optional>

#include "field.hpp"

namespace ucplab {

// ---------------------------------------------------------------------------
// Closed-form rectangle integrals of 1/zeta and 1/|zeta|.

namespace cauchy_detail {

inline double xlogr2(double a, double b) { // a * ln(a^2 + b^2), continuous at 0
  return a == 0.0 ? 0.0 : a * std::log(a * a + b * b);
}
inline double xatan(double a, double b) { // a * atan(b / a), continuous at a = 0
  return a == 0.0 ? 0.0 : a * std::atan(b / a);
}
inline double xasinh(double a, double b) { // a * asinh(b / |a|), odd in both
  return a == 0.0 ? 0.0 : a * std::asinh(b / std::abs(a));
}

// Mixed antiderivatives: d^2 F / dx dy equals x / r^2, y / r^2, 1 / r.
inline double anti_re(double x, double y) { return 0.5 * xlogr2(y, x) - y + xatan(x, y); }
inline double anti_im(double x, double y) { return 0.5 * xlogr2(x, y) - x + xatan(y, x); }
inline double anti_abs(double x, double y) { return xasinh(x, y) + xasinh(y, x); }

template <typename Fn> double corner_sum(Fn F, double x1, double x2, double y1, double y2) {
  return F(x2, y2) - F(x1, y2) - F(x2, y1) + F(x1, y1);
}

} // namespace cauchy_detail

/// Exact integral of 1/zeta over [x1, x2] x [y1, y2].
inline cplx rect_integral_inv(double x1, double x2, double y1, double y2) {
  using namespace cauchy_detail;
  return {corner_sum(anti_re, x1, x2, y1, y2), -corner_sum(anti_im, x1, x2, y1, y2)};
}

/// Exact integral of 1/|zeta| over [x1, x2] x [y1, y2].
inline double rect_integral_absinv(double x1, double x2, double y1, double y2) {
  return cauchy_detail::corner_sum(cauchy_detail::anti_abs, x1, x2, y1, y2);
}

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
  [[nodiscard]] cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

/// Exact T(1)(z) = (1/pi) int_R 1/(z - xi) dA over a rectangle.
inline cplx transform_of_one(const Rect& r, cplx z) {
  return -rect_integral_inv(r.x0 - z.real(), r.x1 - z.real(), r.y0 - z.imag(), r.y1 - z.imag()) / pi;
}

/// Exact int_R 1/|z - xi| dA.
inline double kernel_integral(const Rect& r, cplx z) {
  return rect_integral_absinv(r.x0 - z.real(), r.x1 - z.real(), r.y0 - z.imag(), r.y1 - z.imag());
}

/// sup_z int_R 1/|z - xi| dA, attained at the center of the rectangle.
inline double kernel_mass_exact(const Rect& r) { return kernel_integral(r, r.center()); }

// ---------------------------------------------------------------------------
// Cell weights. Self cell exact, the eight neighbours by 3x3 sub-sampling,
// everything else by the midpoint rule.

namespace cauchy_detail {

template <typename Kernel>
auto cell_weight(long di, long dj, double h, Kernel k) -> decltype(k(cplx{})) {
  const long far = std::max(std::abs(di), std::abs(dj));
  const cplx c(static_cast<double>(di) * h, static_cast<double>(dj) * h);
  if (far > 1)
    return k(c) * (h * h);
  decltype(k(cplx{})) s{};
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      s += k(c + cplx(a * h / 3.0, b * h / 3.0));
  return s * (h * h / 9.0);
}

// (1/pi) int_cell 1/(z - xi) for a source cell whose center sits at offset
// (di, dj) h = z - xi_c from the target.
inline cplx inv_weight(long di, long dj, double h) {
  if (di == 0 && dj == 0)
    return {0.0, 0.0}; // odd kernel over a centered square
  return cell_weight(di, dj, h, [](cplx zeta) { return 1.0 / zeta; }) / pi;
}

inline double abs_weight(long di, long dj, double h) {
  if (di == 0 && dj == 0)
    return 4.0 * h * std::log1p(std::sqrt(2.0));
  return cell_weight(di, dj, h, [](cplx zeta) { return 1.0 / std::abs(zeta); });
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!p)
    throw Error("fftw_malloc failed");
  return FftwBuffer(p);
}

/// Zero-padded 2D convolution out(i,j) = sum w(i-i', j-j') F(i', j') with a
/// kernel tabulated for offsets in (-nx, nx) x (-ny, ny).
class Convolver {
public:
  template <typename KernelFn> Convolver(std::size_t nx, std::size_t ny, KernelFn weight)
      : nx_(nx), ny_(ny), px_(2 * nx), py_(2 * ny), kernel_(fftw_buffer(px_ * py_)) {
    auto in = fftw_buffer(px_ * py_);
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      const int dims[2] = {static_cast<int>(py_), static_cast<int>(px_)};
      forward_ = fftw_plan_dft(2, dims, in.get(), kernel_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft(2, dims, in.get(), kernel_.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!forward_ || !backward_)
      throw Error("FFTW planning failed");
    for (std::size_t q = 0; q < py_; ++q)
      for (std::size_t p = 0; p < px_; ++p) {
        const long di = p < nx_ ? static_cast<long>(p) : static_cast<long>(p) - static_cast<long>(px_);
        const long dj = q < ny_ ? static_cast<long>(q) : static_cast<long>(q) - static_cast<long>(py_);
        cplx w{};
        if (std::abs(di) < static_cast<long>(nx_) && std::abs(dj) < static_cast<long>(ny_))
          w = weight(di, dj);
        in[q * px_ + p][0] = w.real();
        in[q * px_ + p][1] = w.imag();
      }
    fftw_execute_dft(forward_, in.get(), kernel_.get());
  }

  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  ~Convolver() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void apply(const std::vector<cplx>& src, std::vector<cplx>& dst) const {
    const std::size_t N = px_ * py_;
    auto a = fftw_buffer(N);
    auto b = fftw_buffer(N);
    for (std::size_t k = 0; k < N; ++k)
      a[k][0] = a[k][1] = 0.0;
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i) {
        a[j * px_ + i][0] = src[j * nx_ + i].real();
        a[j * px_ + i][1] = src[j * nx_ + i].imag();
      }
    fftw_execute_dft(forward_, a.get(), b.get());
    for (std::size_t k = 0; k < N; ++k) {
      const cplx v = cplx(b[k][0], b[k][1]) * cplx(kernel_[k][0], kernel_[k][1]);
      b[k][0] = v.real();
      b[k][1] = v.imag();
    }
    fftw_execute_dft(backward_, b.get(), a.get());
    const double scale = 1.0 / static_cast<double>(N);
    dst.assign(nx_ * ny_, cplx{});
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i)
        dst[j * nx_ + i] = cplx(a[j * px_ + i][0], a[j * px_ + i][1]) * scale;
  }

private:
  std::size_t nx_, ny_, px_, py_;
  FftwBuffer kernel_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

} // namespace cauchy_detail

struct Disk {
  cplx center{};
  double radius = 1.0;
};

/**
 * T over the cells of a rectangular grid, evaluated at the same cell
 * centers. With a disk mask only cells whose centers lie in the disk carry
 * source mass (diagnostic mode).
 */
class CauchyOp {
public:
  CauchyOp() = default;
  explicit CauchyOp(const GridSpec& spec, std::optional<Disk> mask = std::nullopt)
      : spec_(spec), mask_(mask) {
    const double h = spec.h;
    conv_ = std::make_shared<cauchy_detail::Convolver>(
        spec.nx, spec.ny, [h](long di, long dj) { return cauchy_detail::inv_weight(di, dj, h); });
  }

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] const std::optional<Disk>& mask() const { return mask_; }
  [[nodiscard]] Rect domain() const { return {spec_.x0, spec_.x1(), spec_.y0, spec_.y1()}; }

  [[nodiscard]] bool in_domain(std::size_t i, std::size_t j) const {
    if (!mask_)
      return true;
    return std::norm(spec_.point(i, j) - mask_->center) <= mask_->radius * mask_->radius;
  }

  /// FFT convolution path.
  [[nodiscard]] ComplexField transform(const ComplexField& F) const {
    check(F);
    std::vector<cplx> out;
    conv_->apply(masked(F), out);
    return ComplexField(spec_, std::move(out));
  }

  /// Direct summation path, O(N^2).
  [[nodiscard]] ComplexField transform_naive(const ComplexField& F) const {
    check(F);
    const auto src = masked(F);
    const std::size_t nx = spec_.nx, ny = spec_.ny;
    std::vector<cplx> table((2 * nx - 1) * (2 * ny - 1));
    for (std::size_t q = 0; q < 2 * ny - 1; ++q)
      for (std::size_t p = 0; p < 2 * nx - 1; ++p)
        table[q * (2 * nx - 1) + p] = cauchy_detail::inv_weight(
            static_cast<long>(p) - static_cast<long>(nx - 1), static_cast<long>(q) - static_cast<long>(ny - 1),
            spec_.h);
    ComplexField out(spec_);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        cplx s{};
        for (std::size_t jj = 0; jj < ny; ++jj)
          for (std::size_t ii = 0; ii < nx; ++ii) {
            const cplx f = src[jj * nx + ii];
            if (f != cplx{})
              s += table[(j + ny - 1 - jj) * (2 * nx - 1) + (i + nx - 1 - ii)] * f;
          }
        out(i, j) = s;
      }
    return out;
  }

private:
  void check(const ComplexField& F) const {
    if (!conv_)
      throw Error("CauchyOp: not initialized");
    require_same_grid(spec_, F.spec(), "CauchyOp::transform");
  }
  [[nodiscard]] std::vector<cplx> masked(const ComplexField& F) const {
    std::vector<cplx> v = F.values();
    if (mask_)
      for (std::size_t j = 0; j < spec_.ny; ++j)
        for (std::size_t i = 0; i < spec_.nx; ++i)
          if (!in_domain(i, j))
            v[spec_.index(i, j)] = cplx{};
    return v;
  }

  GridSpec spec_;
  std::optional<Disk> mask_;
  std::shared_ptr<const cauchy_detail::Convolver> conv_;
};

/**
 * sup over the window of |dbar(T F) - F| / sup |F|. The window defaults to the
 * cells at distance >= margin_fraction * (short side) + 2 cells from the
 * edge; near the corners of the domain the discrete dbar of T F carries an
 * O(1) error that does not shrink at a fixed cell margin.
 */
inline double dbar_inverse_residual(const CauchyOp& op, const ComplexField& F, const Window& w) {
  const double scale = sup_abs(F);
  if (scale == 0.0)
    return 0.0;
  const ComplexField r = dbar(op.transform(F)) - F;
  double m = 0.0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      if (op.in_domain(i, j))
        m = std::max(m, std::abs(r(i, j)));
  return m / scale;
}

inline Window physical_interior(const GridSpec& g, double margin_fraction, std::size_t min_cells = 2) {
  const double side = std::min(g.x1() - g.x0, g.y1() - g.y0);
  const double d = margin_fraction * side;
  const std::size_t cells = std::max(min_cells, static_cast<std::size_t>(std::ceil(d / g.h - 1e-9)));
  return interior(g, cells);
}

inline double dbar_inverse_residual(const CauchyOp& op, const ComplexField& F, double margin_fraction = 0.125) {
  return dbar_inverse_residual(op, F, physical_interior(op.spec(), margin_fraction));
}

/// Field of int_domain 1/|z - xi| dA over the grid cells (FFT convolution).
inline RealField kernel_mass_field(const GridSpec& g, std::optional<Disk> mask = std::nullopt) {
  const double h = g.h;
  cauchy_detail::Convolver conv(g.nx, g.ny,
                                [h](long di, long dj) { return cplx(cauchy_detail::abs_weight(di, dj, h)); });
  std::vector<cplx> ind(g.size(), cplx(1.0));
  if (mask)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (std::norm(g.point(i, j) - mask->center) > mask->radius * mask->radius)
          ind[g.index(i, j)] = 0.0;
  std::vector<cplx> out;
  conv.apply(ind, out);
  RealField m(g);
  for (std::size_t k = 0; k < m.size(); ++k)
    m[k] = ind[k].real() != 0.0 ? out[k].real() : 0.0;
  return m;
}

/// Grid over a rectangle with `cells_short` cells across its short side; the
/// long side must then be a whole number of cells.
inline GridSpec grid_for(const Rect& r, std::size_t cells_short) {
  const bool wide = r.width() >= r.height();
  const double h = (wide ? r.height() : r.width()) / static_cast<double>(cells_short);
  const double n_long = (wide ? r.width() : r.height()) / h;
  const auto m = static_cast<std::size_t>(std::llround(n_long));
  if (std::abs(n_long - static_cast<double>(m)) > 1e-6)
    throw Error("grid_for: rectangle sides are not commensurate with the cell size");
  return wide ? GridSpec::rect(r.x0, r.y0, h, m, cells_short) : GridSpec::rect(r.x0, r.y0, h, cells_short, m);
}

/// Quadrature estimate of sup_z int_R 1/|z - xi| dA, maximized over cell centers.
inline double kernel_mass(const Rect& r, std::size_t cells_short = 32) {
  return sup_abs(kernel_mass_field(grid_for(r, cells_short)));
}

/// Same for a disk; the grid is the circumscribed square with n cells per side.
inline double kernel_mass(const Disk& d, std::size_t n = 128) {
  const auto g = GridSpec::square(d.center, d.radius, n);
  return sup_abs(kernel_mass_field(g, d));
}

/// (1/pi) max over s in [1, 3/2] of the kernel mass of Q_s (the L-infinity
/// operator norm of T on Q_s), sampled at n_samples values of s.
inline double c_infty_estimate(std::size_t n_samples = 3, std::size_t n = 128) {
  if (n_samples < 1)
    throw Error("c_infty_estimate: need at least one sample");
  double best = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double s = n_samples == 1 ? 1.5 : 1.0 + 0.5 * static_cast<double>(k) / static_cast<double>(n_samples - 1);
    best = std::max(best, kernel_mass(Rect{-s, s, -s, s}, n) / pi);
  }
  return best;
}

/// Exact c_infty: (1/pi) * 8 s ln(1 + sqrt 2) at s = 3/2.
inline double c_infty_exact() { return 12.0 * std::log1p(std::sqrt(2.0)) / pi; }

} // namespace ucplab
