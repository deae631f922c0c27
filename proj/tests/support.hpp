#pragma once

#include <cmath>
#include <vector>

#include "ucplab/elliptic.hpp"
#include "ucplab/field.hpp"

namespace testing_support {

using ucplab::cplx;

/// Observed order of an error sequence under grid doubling (last pair).
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Smallest order over consecutive pairs.
inline double min_order(const std::vector<double>& errs) {
  double m = 1e300;
  for (std::size_t k = 0; k + 1 < errs.size(); ++k)
    m = std::min(m, observed_order(errs[k], errs[k + 1]));
  return m;
}

/// Smooth complex test function built from random trig modes.
struct SmoothComplex {
  ucplab::TrigModes re, im;
  explicit SmoothComplex(std::uint64_t seed) {
    ucplab::Rng rng(seed);
    re = ucplab::TrigModes::random(rng, 4, 1.0);
    im = ucplab::TrigModes::random(rng, 4, 1.0);
  }
  cplx operator()(cplx z) const { return {re(z), im(z)}; }
};

} // namespace testing_support
