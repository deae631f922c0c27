#pragma once

// 2x2 complex matrices and matrix-valued fields.

#include <array>

#include "field.hpp"

namespace ucplab {

/// Row-major 2x2 complex matrix {a11, a12, a21, a22}.
struct Mat2 {
  std::array<cplx, 4> a{};

  static Mat2 identity() { return {{cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)}}; }
  static Mat2 zero() { return {}; }

  cplx& operator()(int r, int c) { return a[static_cast<std::size_t>(2 * r + c)]; }
  const cplx& operator()(int r, int c) const { return a[static_cast<std::size_t>(2 * r + c)]; }

  [[nodiscard]] cplx det() const { return a[0] * a[3] - a[1] * a[2]; }
  [[nodiscard]] Mat2 inverse() const {
    const cplx d = det();
    if (d == cplx{})
      throw Error("Mat2::inverse: singular matrix");
    return {{a[3] / d, -a[1] / d, -a[2] / d, a[0] / d}};
  }
  [[nodiscard]] Mat2 adjoint() const { return {{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}}; }
};

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
           x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
}
inline Mat2 operator+(Mat2 x, const Mat2& y) {
  for (std::size_t k = 0; k < 4; ++k)
    x.a[k] += y.a[k];
  return x;
}
inline Mat2 operator-(Mat2 x, const Mat2& y) {
  for (std::size_t k = 0; k < 4; ++k)
    x.a[k] -= y.a[k];
  return x;
}
inline Mat2 operator*(cplx s, Mat2 x) {
  for (auto& v : x.a)
    v *= s;
  return x;
}

/// |A| = sqrt(tr A*A)
inline double frobenius(const Mat2& m) {
  return std::sqrt(std::norm(m.a[0]) + std::norm(m.a[1]) + std::norm(m.a[2]) + std::norm(m.a[3]));
}

/// ||A||, the largest singular value.
inline double opnorm(const Mat2& m) {
  const double f2 = std::norm(m.a[0]) + std::norm(m.a[1]) + std::norm(m.a[2]) + std::norm(m.a[3]);
  const double d = std::abs(m.det());
  const double disc = std::max(0.0, f2 * f2 - 4.0 * d * d);
  return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

/// Matrix-valued field stored as four complex entry fields.
class MatrixField {
public:
  MatrixField() = default;
  explicit MatrixField(const GridSpec& spec, const Mat2& fill = Mat2::zero()) {
    for (std::size_t k = 0; k < 4; ++k)
      e_[k] = ComplexField(spec, fill.a[k]);
  }
  MatrixField(ComplexField a11, ComplexField a12, ComplexField a21, ComplexField a22)
      : e_{std::move(a11), std::move(a12), std::move(a21), std::move(a22)} {
    for (std::size_t k = 1; k < 4; ++k)
      require_same_grid(e_[0].spec(), e_[k].spec(), "MatrixField");
  }
  static MatrixField identity(const GridSpec& spec) { return MatrixField(spec, Mat2::identity()); }

  [[nodiscard]] const GridSpec& spec() const { return e_[0].spec(); }
  [[nodiscard]] std::size_t size() const { return e_[0].size(); }
  [[nodiscard]] ComplexField& entry(int r, int c) { return e_[static_cast<std::size_t>(2 * r + c)]; }
  [[nodiscard]] const ComplexField& entry(int r, int c) const { return e_[static_cast<std::size_t>(2 * r + c)]; }

  [[nodiscard]] Mat2 at(std::size_t k) const { return {{e_[0][k], e_[1][k], e_[2][k], e_[3][k]}}; }
  [[nodiscard]] Mat2 at(std::size_t i, std::size_t j) const { return at(spec().index(i, j)); }
  void set(std::size_t k, const Mat2& m) {
    for (std::size_t q = 0; q < 4; ++q)
      e_[q][k] = m.a[q];
  }

  [[nodiscard]] MatrixField sub(const Window& w) const {
    return {e_[0].sub(w), e_[1].sub(w), e_[2].sub(w), e_[3].sub(w)};
  }

  template <typename Fn> [[nodiscard]] MatrixField map(Fn&& fn) const {
    MatrixField out(spec());
    for (std::size_t k = 0; k < size(); ++k)
      out.set(k, fn(at(k)));
    return out;
  }

  template <typename Fn> [[nodiscard]] MatrixField map_entries(Fn&& fn) const {
    return {fn(e_[0]), fn(e_[1]), fn(e_[2]), fn(e_[3])};
  }

  MatrixField& operator+=(const MatrixField& o) {
    for (std::size_t q = 0; q < 4; ++q)
      e_[q] += o.e_[q];
    return *this;
  }
  MatrixField& operator-=(const MatrixField& o) {
    for (std::size_t q = 0; q < 4; ++q)
      e_[q] -= o.e_[q];
    return *this;
  }

private:
  std::array<ComplexField, 4> e_;
};

inline MatrixField operator+(MatrixField a, const MatrixField& b) { return a += b; }
inline MatrixField operator-(MatrixField a, const MatrixField& b) { return a -= b; }

/// Pointwise product.
inline MatrixField operator*(const MatrixField& a, const MatrixField& b) {
  require_same_grid(a.spec(), b.spec(), "MatrixField product");
  MatrixField out(a.spec());
  for (std::size_t k = 0; k < a.size(); ++k)
    out.set(k, a.at(k) * b.at(k));
  return out;
}

inline MatrixField inverse(const MatrixField& a) {
  return a.map([](const Mat2& m) { return m.inverse(); });
}

inline MatrixField dbar(const MatrixField& a) {
  return a.map_entries([](const ComplexField& f) { return dbar(f); });
}

/// sup over the window of opnorm(A(z)).
inline double sup_opnorm(const MatrixField& a, const Window& w) {
  double m = 0.0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      m = std::max(m, opnorm(a.at(i, j)));
  return m;
}
inline double sup_opnorm(const MatrixField& a) { return sup_opnorm(a, full_window(a.spec())); }

inline double sup_frobenius(const MatrixField& a, const Window& w) {
  double m = 0.0;
  for (std::size_t j = w.j0; j < w.j1; ++j)
    for (std::size_t i = w.i0; i < w.i1; ++i)
      m = std::max(m, frobenius(a.at(i, j)));
  return m;
}
inline double sup_frobenius(const MatrixField& a) { return sup_frobenius(a, full_window(a.spec())); }

/// Column c of a matrix field as a pair of complex fields.
inline std::array<ComplexField, 2> column(const MatrixField& a, int c) { return {a.entry(0, c), a.entry(1, c)}; }

} // namespace ucplab
