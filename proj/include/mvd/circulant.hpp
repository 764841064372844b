#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mvd/fft.hpp"

namespace mvd {

// A D x D circulant matrix stored as its first row.
//
// Index convention, fixed repo-wide: entry (j, k) = first_row[(k - j) mod D].
// Row j is the first row rotated right by j. Worked D = 4 example for
// first_row = [a, b, c, d]:
//
//     | a b c d |
//     | d a b c |
//     | c d a b |
//     | b c d a |
//
// so (apply(C, x))_j = sum_k first_row[(k - j) mod D] * x_k, i.e. the cyclic
// cross-correlation of x with the first row. Under this convention the
// eigenvalue ("transfer") at frequency m is sum_l first_row[l] e^{+2pi i ml/D}
// and apply(C, x) = IDFTu(transfer .* DFTu(x)) with the unitary DFT pair.
struct CirculantSpec {
  std::vector<double> first_row;

  std::size_t dim() const { return first_row.size(); }
};

// Per-frequency eigenvalues of the circulant under the convention above.
inline std::vector<cdouble> transfer(const CirculantSpec& c) {
  if (c.first_row.empty()) throw std::invalid_argument("CirculantSpec: D >= 1 required");
  auto spec = fft::to_complex(c.first_row);
  fft::transform(spec, +1);
  return spec;
}

// Matrix-vector product through the spectral path.
inline std::vector<double> apply_circulant(const CirculantSpec& c, std::span<const double> x) {
  const std::size_t d = c.dim();
  if (x.size() != d) throw std::invalid_argument("apply_circulant: length mismatch");
  const auto lambda = transfer(c);
  std::vector<cdouble> xhat(d);
  for (std::size_t i = 0; i < d; ++i) xhat[i] = cdouble(x[i], 0.0);
  xhat = fft::forward_unitary(std::move(xhat));
  for (std::size_t m = 0; m < d; ++m) xhat[m] *= lambda[m];
  xhat = fft::inverse_unitary(std::move(xhat));
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = xhat[i].real();
  return y;
}

namespace circ {

// Direct split-loop kernels used by hot paths (no modulo, no allocation).
// Same index convention as apply_circulant.

// y_j = sum_m row[m] * x[(j + m) mod D]
inline void correlate(std::span<const double> row, std::span<const double> x,
                      std::span<double> y) {
  const std::size_t d = row.size();
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    std::size_t m = 0;
    for (; m < d - j; ++m) acc += row[m] * x[j + m];
    for (; m < d; ++m) acc += row[m] * x[j + m - d];
    y[j] = acc;
  }
}

// Transpose product: y_j = sum_m row[m] * x[(j - m) mod D]
inline void correlate_transpose(std::span<const double> row, std::span<const double> x,
                                std::span<double> y) {
  const std::size_t d = row.size();
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    std::size_t m = 0;
    for (; m <= j; ++m) acc += row[m] * x[j - m];
    for (; m < d; ++m) acc += row[m] * x[j + d - m];
    y[j] = acc;
  }
}

}  // namespace circ
}  // namespace mvd
