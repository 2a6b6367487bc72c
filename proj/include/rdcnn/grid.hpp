#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace rdcnn {

enum class Precision { Single, Double };

inline const char* precision_name(Precision p) {
  return p == Precision::Single ? "single" : "double";
}

inline Precision parse_precision(const std::string& s) {
  if (s == "single") return Precision::Single;
  if (s == "double") return Precision::Double;
  throw std::invalid_argument("unknown precision: " + s);
}

template <class T>
constexpr Precision precision_of() {
  return std::is_same_v<T, float> ? Precision::Single : Precision::Double;
}

/// The paired u/v layers of an NN x NM toroidal lattice, row-major.
template <class T>
struct GridState {
  static_assert(std::is_floating_point_v<T>);

  int rows = 0;  // NN
  int cols = 0;  // NM
  std::vector<T> u;
  std::vector<T> v;

  GridState() = default;
  GridState(int nn, int nm)
      : rows(nn), cols(nm), u(size_t(nn) * nm, T(0)), v(size_t(nn) * nm, T(0)) {
    if (nn < 3 || nm < 3) throw std::invalid_argument("grid must be at least 3x3");
  }

  size_t cells() const { return size_t(rows) * cols; }
  T& at_u(int i, int j) { return u[size_t(i) * cols + j]; }
  T at_u(int i, int j) const { return u[size_t(i) * cols + j]; }
  T& at_v(int i, int j) { return v[size_t(i) * cols + j]; }
  T at_v(int i, int j) const { return v[size_t(i) * cols + j]; }

  bool operator==(const GridState&) const = default;
};

namespace detail {

// Non-finite IEEE values have an all-ones exponent field.
inline bool finite_bits(float x) {
  uint32_t b;
  std::memcpy(&b, &x, 4);
  return (b & 0x7F800000u) != 0x7F800000u;
}
inline bool finite_bits(double x) {
  uint64_t b;
  std::memcpy(&b, &x, 8);
  return (b & 0x7FF0000000000000ull) != 0x7FF0000000000000ull;
}

}  // namespace detail

template <class T>
bool all_finite(std::span<const T> xs) {
  for (const T& x : xs)
    if (!detail::finite_bits(x)) return false;
  return true;
}

template <class T>
bool all_finite(const GridState<T>& s) {
  return all_finite(std::span<const T>(s.u)) && all_finite(std::span<const T>(s.v));
}

/// Cyclic translation of both layers: entry (i,j) of the result is entry
/// (i-di, j-dj) of the input, indices wrapped. A pure permutation of cells.
template <class T>
GridState<T> cyclic_shift(const GridState<T>& s, int di, int dj) {
  GridState<T> out(s.rows, s.cols);
  auto wrap = [](int x, int m) { return ((x % m) + m) % m; };
  for (int i = 0; i < s.rows; ++i) {
    const int si = wrap(i - di, s.rows);
    for (int j = 0; j < s.cols; ++j) {
      const int sj = wrap(j - dj, s.cols);
      out.at_u(i, j) = s.at_u(si, sj);
      out.at_v(i, j) = s.at_v(si, sj);
    }
  }
  return out;
}

/// FNV-1a over raw bytes; order- and representation-sensitive.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Digest over the raw bit patterns of u then v in row-major order.
/// Equal digests identify bit-identical states of the same precision.
template <class T>
uint64_t checksum(const GridState<T>& s) {
  uint64_t h = fnv1a(s.u.data(), s.u.size() * sizeof(T));
  return fnv1a(s.v.data(), s.v.size() * sizeof(T), h);
}

inline std::string checksum_hex(uint64_t x) {
  char buf[17];
  for (int k = 15; k >= 0; --k) {
    buf[k] = "0123456789abcdef"[x & 0xF];
    x >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace rdcnn
