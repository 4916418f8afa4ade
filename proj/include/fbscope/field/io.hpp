#pragma once

// FBSF container (little-endian):
//   "FBSF" | u16 version | u16 dim | u32 cells[dim] | f64 origin[dim] |
//   f64 extent[dim] | f64 u[N] | f64 chi[N]      (N nodes, row-major)

#include "fbscope/field/scalar_field.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace fbscope {

inline constexpr std::uint16_t kFbsfVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const U bits = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = is.get();
    if (c == EOF) throw ParameterError("FBSF: truncated file");
    bits |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace detail

template <int Dim>
void write_fbsf(std::ostream& os, const ScalarField<Dim>& f) {
  const auto& s = f.spec();
  os.write("FBSF", 4);
  detail::put_le<std::uint16_t>(os, kFbsfVersion);
  detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(Dim));
  for (int k = 0; k < Dim; ++k) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.cells[k]));
  for (int k = 0; k < Dim; ++k) detail::put_le<double>(os, s.origin[k]);
  for (int k = 0; k < Dim; ++k) detail::put_le<double>(os, s.cells[k] * s.h);
  for (double v : f.values()) detail::put_le<double>(os, v);
  for (double v : f.chi()) detail::put_le<double>(os, v);
}

template <int Dim>
void write_fbsf(const std::string& path, const ScalarField<Dim>& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("cannot open '" + path + "' for writing");
  write_fbsf(os, f);
}

/// Dimension stored in an FBSF stream, leaving the stream at its start.
inline int peek_fbsf_dim(std::istream& is) {
  const auto pos = is.tellg();
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "FBSF") throw ParameterError("FBSF: bad magic");
  const auto version = detail::get_le<std::uint16_t>(is);
  if (version != kFbsfVersion) throw ParameterError("FBSF: unsupported version");
  const int dim = detail::get_le<std::uint16_t>(is);
  is.seekg(pos);
  return dim;
}

template <int Dim>
ScalarField<Dim> read_fbsf(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "FBSF") throw ParameterError("FBSF: bad magic");
  if (detail::get_le<std::uint16_t>(is) != kFbsfVersion) throw ParameterError("FBSF: unsupported version");
  if (detail::get_le<std::uint16_t>(is) != Dim) throw ParameterError("FBSF: dimension mismatch");
  std::array<int, Dim> cells;
  Vec<Dim> origin, extent;
  for (int k = 0; k < Dim; ++k) cells[k] = static_cast<int>(detail::get_le<std::uint32_t>(is));
  for (int k = 0; k < Dim; ++k) origin[k] = detail::get_le<double>(is);
  for (int k = 0; k < Dim; ++k) extent[k] = detail::get_le<double>(is);
  const auto spec = GridSpec<Dim>::make(origin, extent, cells);
  std::vector<double> u(spec.node_count()), chi(spec.node_count());
  for (auto& v : u) v = detail::get_le<double>(is);
  for (auto& v : chi) v = detail::get_le<double>(is);
  return ScalarField<Dim>(spec, std::move(u), std::move(chi));
}

template <int Dim>
ScalarField<Dim> read_fbsf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("cannot open '" + path + "'");
  return read_fbsf<Dim>(is);
}

/// One node per row: coordinates, u, chi.
template <int Dim>
void write_field_csv(std::ostream& os, const ScalarField<Dim>& f) {
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < Dim; ++k) os << names[k] << ',';
  os << "u,chi\n";
  char buf[64];
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    const auto p = f.spec().node(f.spec().multi_index(i));
    for (int k = 0; k < Dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", p[k]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.values()[i], f.chi()[i]);
    os << buf;
  }
}

}  // namespace fbscope
