#pragma once

// delta-calculus and the reduction u -> (w1, w2) -> (w1~, w2~) with the
// coefficient matrix G of the vector Beltrami equation dbar w - G w = 0.

#include <functional>

#include "cauchy.hpp"
#include "matrix.hpp"
#include "multiplier.hpp"

namespace ucplab {

template <typename T> struct Vec3Field {
  Field<T> F1, F2, F3;
  [[nodiscard]] const GridSpec& spec() const { return F1.spec(); }
};

template <typename T> Vec3Field<T> nabla_delta(const Field<T>& f, double delta) {
  return {d_dx(f), d_dy(f), f * static_cast<T>(delta)};
}

template <typename T> Field<T> div_delta(const Vec3Field<T>& F, double delta) {
  return d_dx(F.F1) + d_dy(F.F2) + F.F3 * static_cast<T>(delta);
}

template <typename T> Vec3Field<T> curl_delta(const Vec3Field<T>& F, double delta) {
  const T d = static_cast<T>(delta);
  return {d_dy(F.F3) - F.F2 * d, F.F1 * d - d_dx(F.F3), d_dx(F.F2) - d_dy(F.F1)};
}

template <typename T> Vec3Field<T> operator-(Vec3Field<T> a, const Vec3Field<T>& b) {
  a.F1 -= b.F1;
  a.F2 -= b.F2;
  a.F3 -= b.F3;
  return a;
}

template <typename T> double sup_abs(const Vec3Field<T>& F, const Window& w) {
  return std::max({sup_abs(F.F1, w), sup_abs(F.F2, w), sup_abs(F.F3, w)});
}

struct StreamData {
  double delta = 0.0;
  double w2_threshold = 0.0;
  RealField phi;
  RealField v, v1, v2;
  ComplexField w1, w2;
  ComplexField alpha, alphatilde, deltatilde;
  // Filled by attach_transforms():
  ComplexField T2alpha, Tminus, Tplus; // T(2 alpha), T(alpha - alpha~), T(alpha + alpha~)
  ComplexField w1t, w2t;
  MatrixField G;

  [[nodiscard]] const GridSpec& spec() const { return v.spec(); }
  [[nodiscard]] bool has_transforms() const { return w1t.size() == v.size() && v.size() > 0; }
};

/**
 * v = u/phi, v1 = phi^2 v_y / delta, v2 = -phi^2 v_x / delta, w1 = phi^2 v,
 * w2 = v2 + i v1, alpha = dbar log phi, and the w2-phase-twisted alpha~,
 * delta~ (zero where |w2| <= threshold). threshold < 0 selects the default
 * 1e-12 sup |w2|.
 */
inline StreamData build_stream(const RealField& u, const Multiplier& m, double delta, double w2_zero_threshold = -1.0) {
  if (delta == 0.0)
    throw Error("degenerate: stream inverse delta^-1 undefined");
  if (!(delta > 0.0))
    throw Error("build_stream: delta must be positive");
  require_same_grid(u.spec(), m.spec(), "build_stream");
  StreamData s;
  s.delta = delta;
  s.phi = m.phi();
  const GridSpec& g = u.spec();
  s.v = RealField(g);
  for (std::size_t k = 0; k < g.size(); ++k)
    s.v[k] = u[k] / s.phi[k];
  auto [vx, vy] = gradient(s.v);
  s.v1 = RealField(g);
  s.v2 = RealField(g);
  s.w1 = ComplexField(g);
  s.w2 = ComplexField(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double p2 = s.phi[k] * s.phi[k];
    s.v1[k] = p2 * vy[k] / delta;
    s.v2[k] = -p2 * vx[k] / delta;
    s.w1[k] = p2 * s.v[k];
    s.w2[k] = cplx(s.v2[k], s.v1[k]);
  }
  s.alpha = dbar(m.log_phi);
  s.w2_threshold = w2_zero_threshold >= 0.0 ? w2_zero_threshold : 1e-12 * sup_abs(s.w2);
  s.alphatilde = ComplexField(g);
  s.deltatilde = ComplexField(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx w = s.w2[k];
    if (std::abs(w) > s.w2_threshold) {
      const cplx phase = std::conj(w) / w;
      s.alphatilde[k] = std::conj(s.alpha[k]) * phase;
      s.deltatilde[k] = delta * phase;
    }
  }
  return s;
}

/// w1~ = exp(-T(2 alpha)) w1, w2~ = exp(-T(alpha - alpha~)) w2.
inline std::pair<ComplexField, ComplexField> tilde_w(const StreamData& s, const CauchyOp& T) {
  const ComplexField a2 = T.transform(s.alpha * cplx(2.0));
  const ComplexField am = T.transform(s.alpha - s.alphatilde);
  return {exp(a2 * cplx(-1.0)) * s.w1, exp(am * cplx(-1.0)) * s.w2};
}

/// G = [[0, -(delta~/2) e^{-T(alpha + alpha~)}], [(delta/2) e^{T(alpha + alpha~)}, 0]].
inline MatrixField assemble_G(const StreamData& s, const CauchyOp& T) {
  const ComplexField tp = T.transform(s.alpha + s.alphatilde);
  const GridSpec& g = s.spec();
  MatrixField G(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    Mat2 m;
    m.a[1] = -0.5 * s.deltatilde[k] * std::exp(-tp[k]);
    m.a[2] = 0.5 * s.delta * std::exp(tp[k]);
    G.set(k, m);
  }
  return G;
}

/// Computes the three transforms once and fills w1~, w2~ and G.
inline void attach_transforms(StreamData& s, const CauchyOp& T) {
  require_same_grid(s.spec(), T.spec(), "attach_transforms");
  s.T2alpha = T.transform(s.alpha * cplx(2.0));
  s.Tminus = T.transform(s.alpha - s.alphatilde);
  s.Tplus = T.transform(s.alpha + s.alphatilde);
  const GridSpec& g = s.spec();
  s.w1t = ComplexField(g);
  s.w2t = ComplexField(g);
  s.G = MatrixField(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    s.w1t[k] = std::exp(-s.T2alpha[k]) * s.w1[k];
    s.w2t[k] = std::exp(-s.Tminus[k]) * s.w2[k];
    Mat2 m;
    m.a[1] = -0.5 * s.deltatilde[k] * std::exp(-s.Tplus[k]);
    m.a[2] = 0.5 * s.delta * std::exp(s.Tplus[k]);
    s.G.set(k, m);
  }
}

enum class StreamResidual { DivergenceForm, StreamSystem, DbarW1, DbarW2, VecBeltrami };

inline const char* to_string(StreamResidual k) {
  switch (k) {
  case StreamResidual::DivergenceForm: return "divergence_form";
  case StreamResidual::StreamSystem: return "stream_system";
  case StreamResidual::DbarW1: return "dbar_w1";
  case StreamResidual::DbarW2: return "dbar_w2";
  case StreamResidual::VecBeltrami: return "vec_beltrami";
  }
  return "?";
}

inline constexpr std::array<StreamResidual, 5> all_stream_residuals = {
    StreamResidual::DivergenceForm, StreamResidual::StreamSystem, StreamResidual::DbarW1,
    StreamResidual::DbarW2, StreamResidual::VecBeltrami};

namespace stream_detail {

// sup_w |sum of terms| / sup_w sum |terms|, over all components.
template <typename T>
double relative(const std::vector<std::vector<const Field<T>*>>& components, const Window& w) {
  double num = 0.0, den = 0.0;
  for (const auto& terms : components) {
    const GridSpec& g = terms.front()->spec();
    for (std::size_t j = w.j0; j < w.j1; ++j)
      for (std::size_t i = w.i0; i < w.i1; ++i) {
        const std::size_t k = g.index(i, j);
        T s{};
        double a = 0.0;
        for (const auto* t : terms) {
          s += (*t)[k];
          a += std::abs((*t)[k]);
        }
        num = std::max(num, static_cast<double>(std::abs(s)));
        den = std::max(den, a);
      }
  }
  return den > 0.0 ? num / den : 0.0;
}

} // namespace stream_detail

/**
 * Interior sup of one of the displayed identities, relative to the sup of
 * the sum of the moduli of its terms, over the window (typically Q_d).
 */
inline double residual(const StreamData& s, StreamResidual which, const Window& w) {
  const GridSpec& g = s.spec();
  const double d = s.delta;
  switch (which) {
  case StreamResidual::DivergenceForm: {
    RealField p2 = s.phi * s.phi;
    auto [vx, vy] = gradient(s.v);
    RealField a = d_dx(p2 * vx), b = d_dy(p2 * vy), c = p2 * s.v * (d * d);
    return stream_detail::relative<double>({{&a, &b, &c}}, w);
  }
  case StreamResidual::StreamSystem: {
    RealField p2 = s.phi * s.phi;
    auto [vx, vy] = gradient(s.v);
    // curl_delta(v1, v2, 0) - phi^2 nabla_delta v
    RealField a1 = s.v2 * (-d), b1 = (p2 * vx) * -1.0;
    RealField a2 = s.v1 * d, b2 = (p2 * vy) * -1.0;
    RealField a3 = d_dx(s.v2), b3 = d_dy(s.v1) * -1.0, c3 = (p2 * s.v) * (-d);
    return stream_detail::relative<double>({{&a1, &b1}, {&a2, &b2}, {&a3, &b3, &c3}}, w);
  }
  case StreamResidual::DbarW1: {
    ComplexField a = dbar(s.w1), b = s.alpha * s.w1 * cplx(-2.0), c = conj(s.w2) * cplx(0.5 * d);
    return stream_detail::relative<cplx>({{&a, &b, &c}}, w);
  }
  case StreamResidual::DbarW2: {
    ComplexField a = dbar(s.w2), b = s.w1 * cplx(-0.5 * d), c = s.alpha * s.w2 * cplx(-1.0),
                 e = conj(s.alpha) * conj(s.w2);
    return stream_detail::relative<cplx>({{&a, &b, &c, &e}}, w);
  }
  case StreamResidual::VecBeltrami: {
    if (!s.has_transforms())
      throw Error("residual: vec_beltrami needs attach_transforms()");
    ComplexField d1 = dbar(s.w1t), d2 = dbar(s.w2t);
    ComplexField g1(g), g2(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Mat2 G = s.G.at(k);
      g1[k] = -G.a[1] * s.w2t[k];
      g2[k] = -G.a[2] * s.w1t[k];
    }
    return stream_detail::relative<cplx>({{&d1, &g1}, {&d2, &g2}}, w);
  }
  }
  return 0.0;
}

/// Same, over the cells of Q_d (centered cube of half side d).
inline double residual(const StreamData& s, StreamResidual which, double d) {
  return residual(s, which, box_window(s.spec(), -d, d, -d, d));
}

struct GBound {
  double sup_G = 0.0;      // sup over Q_d of opnorm(G)
  double c_infty = 0.0;    // measured ||T_{Q_b}||
  double C3 = 0.0;         // sup over Q_b of |grad log phi| / lambda
  double bound = 0.0;      // (delta/2) exp(2 c_infty C3 lambda)
  bool holds = false;
};

/// ||G||_{L^inf(Q_d)} <= (delta/2) exp(2 c C3 lambda) with measured constants.
inline GBound check_G_bound(const StreamData& s, const Multiplier& m, double d) {
  if (!s.has_transforms())
    throw Error("check_G_bound: needs attach_transforms()");
  GBound r;
  const GridSpec& g = s.spec();
  r.sup_G = sup_opnorm(s.G, box_window(g, -d, d, -d, d));
  r.c_infty = kernel_mass_exact(Rect{g.x0, g.x1(), g.y0, g.y1()}) / pi;
  r.C3 = sup_abs(gradient_modulus(m.log_phi)) / m.lambda;
  r.bound = 0.5 * s.delta * std::exp(2.0 * r.c_infty * r.C3 * m.lambda);
  r.holds = r.sup_G <= r.bound;
  return r;
}

} // namespace ucplab
