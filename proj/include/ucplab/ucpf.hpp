#pragma once

// UCPF binary field files:
//   "UCPF" | u32 version = 1 | u64 n | f64 center_x | f64 center_y | f64 half_side
//   | u8 dtype (0 real, 1 complex) | n*n f64 values, little-endian,
//   row-major from the bottom-left cell, complex values as (re, im) pairs.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <variant>

#include "field.hpp"

namespace ucplab::ucpf {

inline constexpr std::array<char, 4> magic = {'U', 'C', 'P', 'F'};
inline constexpr std::uint32_t version = 1;

enum class DType : std::uint8_t { Real = 0, Complex = 1 };

namespace detail {

template <typename U> void put_le(std::ostream& os, U v) {
  static_assert(std::is_trivially_copyable_v<U>);
  std::array<unsigned char, sizeof(U)> b{};
  std::memcpy(b.data(), &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(U));
}

template <typename U> U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(U)))
    throw Error("UCPF: truncated stream");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  U v;
  std::memcpy(&v, b.data(), sizeof(U));
  return v;
}

inline void write_header(std::ostream& os, const GridSpec& g, DType t) {
  if (!g.is_square())
    throw Error("UCPF: only square grids can be serialized");
  os.write(magic.data(), magic.size());
  put_le<std::uint32_t>(os, version);
  put_le<std::uint64_t>(os, g.nx);
  put_le<double>(os, g.center().real());
  put_le<double>(os, g.center().imag());
  put_le<double>(os, g.half_side());
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t));
}

} // namespace detail

inline void write(std::ostream& os, const RealField& f) {
  detail::write_header(os, f.spec(), DType::Real);
  for (double v : f.values())
    detail::put_le<double>(os, v);
}

inline void write(std::ostream& os, const ComplexField& f) {
  detail::write_header(os, f.spec(), DType::Complex);
  for (const cplx& v : f.values()) {
    detail::put_le<double>(os, v.real());
    detail::put_le<double>(os, v.imag());
  }
}

using AnyField = std::variant<RealField, ComplexField>;

inline AnyField read(std::istream& is) {
  std::array<char, 4> m{};
  if (!is.read(m.data(), m.size()) || m != magic)
    throw Error("UCPF: bad magic");
  if (detail::get_le<std::uint32_t>(is) != version)
    throw Error("UCPF: unsupported version");
  const auto n = detail::get_le<std::uint64_t>(is);
  const double cx = detail::get_le<double>(is);
  const double cy = detail::get_le<double>(is);
  const double hs = detail::get_le<double>(is);
  const auto dt = detail::get_le<std::uint8_t>(is);
  const auto spec = GridSpec::square({cx, cy}, hs, static_cast<std::size_t>(n));
  if (dt == static_cast<std::uint8_t>(DType::Real)) {
    RealField f(spec);
    for (auto& v : f.values())
      v = detail::get_le<double>(is);
    if (!f.all_finite())
      throw Error("UCPF: non-finite value");
    return f;
  }
  if (dt == static_cast<std::uint8_t>(DType::Complex)) {
    ComplexField f(spec);
    for (auto& v : f.values()) {
      const double re = detail::get_le<double>(is);
      const double im = detail::get_le<double>(is);
      v = {re, im};
    }
    if (!f.all_finite())
      throw Error("UCPF: non-finite value");
    return f;
  }
  throw Error("UCPF: unknown dtype");
}

template <typename FieldT> void save(const std::filesystem::path& p, const FieldT& f) {
  std::ofstream os(p, std::ios::binary);
  if (!os)
    throw Error("UCPF: cannot open " + p.string() + " for writing");
  write(os, f);
}

inline AnyField load(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is)
    throw Error("UCPF: cannot open " + p.string());
  return read(is);
}

inline RealField load_real(const std::filesystem::path& p) {
  auto f = load(p);
  if (auto* r = std::get_if<RealField>(&f))
    return std::move(*r);
  throw Error("UCPF: expected a real field in " + p.string());
}

inline ComplexField load_complex(const std::filesystem::path& p) {
  auto f = load(p);
  if (auto* c = std::get_if<ComplexField>(&f))
    return std::move(*c);
  return to_complex(std::get<RealField>(f));
}

} // namespace ucplab::ucpf
