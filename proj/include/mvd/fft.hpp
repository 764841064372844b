#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mvd {

using cdouble = std::complex<double>;

namespace fft {

constexpr double kPi = 3.141592653589793238462643383279502884;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse.
// No normalization.
inline void radix2(std::vector<cdouble>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const cdouble wlen = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cdouble u = a[i + k];
        const cdouble v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Direct O(n^2) evaluation for sizes that are not powers of two. The
// signals here are tiny (n <= a few hundred), so this is plenty.
inline void direct(std::vector<cdouble>& a, int sign) {
  const std::size_t n = a.size();
  std::vector<cdouble> roots(n);
  for (std::size_t j = 0; j < n; ++j)
    roots[j] = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n));
  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cdouble acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * roots[(j * k) % n];
    out[k] = acc;
  }
  a = std::move(out);
}

}  // namespace detail

// Unnormalized DFT, exponent sign as given: out[k] = sum_j a[j] e^{sign*2pi*i*jk/n}.
inline void transform(std::vector<cdouble>& a, int sign) {
  if (a.empty()) throw std::invalid_argument("fft: empty input");
  if (a.size() == 1) return;
  if (detail::is_pow2(a.size()))
    detail::radix2(a, sign);
  else
    detail::direct(a, sign);
}

// Unitary pair: forward uses e^{-2pi i jk/n}/sqrt(n), inverse the conjugate.
inline std::vector<cdouble> forward_unitary(std::vector<cdouble> a) {
  transform(a, -1);
  const double s = 1.0 / std::sqrt(static_cast<double>(a.size()));
  for (auto& v : a) v *= s;
  return a;
}

inline std::vector<cdouble> inverse_unitary(std::vector<cdouble> a) {
  transform(a, +1);
  const double s = 1.0 / std::sqrt(static_cast<double>(a.size()));
  for (auto& v : a) v *= s;
  return a;
}

inline std::vector<cdouble> to_complex(const std::vector<double>& x) {
  std::vector<cdouble> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = cdouble(x[i], 0.0);
  return out;
}

}  // namespace fft
}  // namespace mvd
