#pragma once

// CSV output, diagnostics rows, binary snapshots and run manifests.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fftw3.h>

#include <json.hpp>

#include "zakharov/errors.hpp"
#include "zakharov/functionals.hpp"
#include "zakharov/imethod.hpp"
#include "zakharov/state.hpp"

#ifndef ZAKHAROV_VERSION
#define ZAKHAROV_VERSION "unknown"
#endif

namespace zakharov::harness {

/// Writing or reading an artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// Cell of a CSV row: a number or verbatim text.
struct Cell {
  std::string text;
  Cell(double v) : text(format_double(v)) {}                        // NOLINT
  Cell(std::size_t v) : text(std::to_string(v)) {}                  // NOLINT
  Cell(int v) : text(std::to_string(v)) {}                          // NOLINT
  Cell(const char* s) : text(s) {}                                  // NOLINT
  Cell(std::string s) : text(std::move(s)) {}                       // NOLINT
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + path.string());
    columns_ = header.size();
    write_line(header);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("CsvWriter: row width does not match header");
    std::vector<std::string> t;
    t.reserve(cells.size());
    for (const auto& c : cells) t.push_back(c.text);
    write_line(t);
  }

 private:
  void write_line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("CSV write failed");
  }

  std::ofstream out_;
  std::size_t columns_ = 0;
};

// ---------------------------------------------------------------------------
// Diagnostics

inline const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols = {"t",          "mass",   "E_total",  "E_kinetic", "E_wave",
                                                "E_coupling", "E_modified", "flux", "flux_18",   "flux_19",
                                                "flux_20",    "Hs_u",   "Hsm1_n",   "Hsm1_v"};
  return cols;
}

inline std::vector<Cell> diagnostics_row(double t, const FirstOrderState& f, const Multiplier& I, ProductRule rule,
                                         double s) {
  const ZakharovState z = from_first_order(f);
  const EnergyReport e = energy(z);
  const auto parts = flux_components(f, I, rule);
  return {t,
          mass(f.u),
          e.total,
          e.kinetic,
          e.wave,
          e.coupling,
          modified_energy(f, I),
          modified_energy_flux(f, I, rule),
          parts[0],
          parts[1],
          parts[2],
          sobolev_norm(z.u, s),
          sobolev_norm(z.n, s - 1.0),
          sobolev_norm(z.v, s - 1.0)};
}

// ---------------------------------------------------------------------------
// Snapshots: "ZAKSNAP1", then little-endian u32 version, u64 M, f64 L, f64 t,
// f64 s, f64 N, and u, n+, n- as M interleaved (re, im) f64 pairs each.

inline constexpr char kSnapshotMagic[8] = {'Z', 'A', 'K', 'S', 'N', 'A', 'P', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  std::uint32_t version = kSnapshotVersion;
  std::uint64_t M = 0;
  double L = 0.0;
  double t = 0.0;
  double s = 0.0;
  double N = 0.0;
  ComplexVector u;
  ComplexVector n_plus;
  ComplexVector n_minus;

  FirstOrderState state() const {
    const auto g = make_grid(L, static_cast<std::size_t>(M));
    return FirstOrderState{Field{g, u, Domain::physical}, Field{g, n_plus, Domain::physical},
                           Field{g, n_minus, Domain::physical}};
  }
};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("snapshot: truncated file");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace detail

inline std::string encode_snapshot(const Snapshot& s) {
  std::string out(kSnapshotMagic, kSnapshotMagic + 8);
  detail::put_le<std::uint32_t>(out, s.version);
  detail::put_le<std::uint64_t>(out, s.M);
  for (double v : {s.L, s.t, s.s, s.N}) detail::put_le<double>(out, v);
  for (const ComplexVector* a : {&s.u, &s.n_plus, &s.n_minus}) {
    if (a->size() != s.M) throw InvalidArgument("snapshot: array length differs from M");
    for (const auto& c : *a) {
      detail::put_le<double>(out, c.real());
      detail::put_le<double>(out, c.imag());
    }
  }
  return out;
}

inline Snapshot decode_snapshot(const std::string& in) {
  if (in.size() < 8 || std::memcmp(in.data(), kSnapshotMagic, 8) != 0) throw IoError("snapshot: bad magic");
  std::size_t pos = 8;
  Snapshot s;
  s.version = detail::get_le<std::uint32_t>(in, pos);
  if (s.version != kSnapshotVersion) throw IoError("snapshot: unsupported version");
  s.M = detail::get_le<std::uint64_t>(in, pos);
  s.L = detail::get_le<double>(in, pos);
  s.t = detail::get_le<double>(in, pos);
  s.s = detail::get_le<double>(in, pos);
  s.N = detail::get_le<double>(in, pos);
  if (in.size() != pos + 3 * 16 * s.M) throw IoError("snapshot: size does not match header");
  for (ComplexVector* a : {&s.u, &s.n_plus, &s.n_minus}) {
    a->resize(s.M);
    for (auto& c : *a) {
      const double re = detail::get_le<double>(in, pos);
      const double im = detail::get_le<double>(in, pos);
      c = Complex(re, im);
    }
  }
  return s;
}

inline Snapshot make_snapshot(const FirstOrderState& f, double t, double s, double N) {
  const Field u = to_physical(f.u), p = to_physical(f.n_plus), m = to_physical(f.n_minus);
  Snapshot snap;
  snap.M = u.grid->size();
  snap.L = u.grid->length();
  snap.t = t;
  snap.s = s;
  snap.N = N;
  snap.u = u.values;
  snap.n_plus = p.values;
  snap.n_minus = m.values;
  return snap;
}

inline void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  const std::string bytes = encode_snapshot(s);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::ordered_json versions() {
  nlohmann::ordered_json v;
  v["zakharov_lab"] = ZAKHAROV_VERSION;
  v["fftw"] = std::string(fftw_version);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                       "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["compiler"] = __VERSION__;
  v["cxx_standard"] = static_cast<long>(__cplusplus);
  return v;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace zakharov::harness
