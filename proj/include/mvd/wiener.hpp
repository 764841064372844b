#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvd/signal1d.hpp"

namespace mvd {

// The unitary DFT of size D, entry (k,l) = e^{-2pi i kl/D}/sqrt(D).
struct DftMatrix {
  std::size_t dim;

  std::vector<cdouble> apply(std::vector<cdouble> x) const {
    if (x.size() != dim) throw std::invalid_argument("DftMatrix: length mismatch");
    return fft::forward_unitary(std::move(x));
  }
  std::vector<cdouble> apply_inverse(std::vector<cdouble> x) const {
    if (x.size() != dim) throw std::invalid_argument("DftMatrix: length mismatch");
    return fft::inverse_unitary(std::move(x));
  }
};

// Optimal linear estimator W = R_phi H^T (H R_phi H^T + R_n)^{-1}. All the
// factors are circulant, so W is too, and both construction and application
// reduce to per-frequency scalar arithmetic.
struct WienerFilter {
  CirculantSpec first_row;          // first row of W
  std::vector<cdouble> response;    // cached frequency response
  SignalModel1D model;              // the model W was built from
};

inline WienerFilter build_wiener(const SignalModel1D& model) {
  const std::size_t d = model.dim();
  const auto& sd = model.signal_stddev();
  const auto h = transfer(model.blur());
  const double noise_var = model.sigma_n() * model.sigma_n();

  std::vector<cdouble> w(d);
  for (std::size_t m = 0; m < d; ++m) {
    const double r = sd[m] * sd[m];
    const double denom = r * std::norm(h[m]) + noise_var;
    if (denom <= 1e-14)
      throw std::runtime_error("build_wiener: singular denominator at frequency " +
                               std::to_string(m));
    w[m] = r * std::conj(h[m]) / denom;
  }

  // Recover the first row: row_l = (1/D) sum_m w_m e^{-2pi i ml/D}.
  std::vector<cdouble> row = w;
  fft::transform(row, -1);
  WienerFilter out{CirculantSpec{}, std::move(w), model};
  out.first_row.first_row.resize(d);
  for (std::size_t l = 0; l < d; ++l)
    out.first_row.first_row[l] = row[l].real() / static_cast<double>(d);
  return out;
}

// phi_hat = W phi_data, evaluated as pointwise multiplication in frequency.
inline std::vector<double> apply(const WienerFilter& filter, std::span<const double> phi_data) {
  const std::size_t d = filter.model.dim();
  if (phi_data.size() != d) throw std::invalid_argument("wiener apply: length mismatch");
  std::vector<cdouble> x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = cdouble(phi_data[i], 0.0);
  x = fft::forward_unitary(std::move(x));
  for (std::size_t m = 0; m < d; ++m) x[m] *= filter.response[m];
  x = fft::inverse_unitary(std::move(x));
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i].real();
  return y;
}

// Exact expected squared error of the Wiener estimator,
// trace(R_phi - W H R_phi), evaluated per frequency. With
// w = r conj(h) / (r|h|^2 + s^2) each term collapses to r s^2 / (r|h|^2 + s^2).
inline double analytic_ese(const SignalModel1D& model) {
  const std::size_t d = model.dim();
  const auto& sd = model.signal_stddev();
  const auto h = transfer(model.blur());
  const double noise_var = model.sigma_n() * model.sigma_n();
  double total = 0.0;
  for (std::size_t m = 0; m < d; ++m) {
    const double r = sd[m] * sd[m];
    const double denom = r * std::norm(h[m]) + noise_var;
    if (denom <= 1e-14)
      throw std::runtime_error("analytic_ese: singular denominator at frequency " +
                               std::to_string(m));
    total += r * noise_var / denom;
  }
  return total;
}

using Estimator = std::function<std::vector<double>(std::span<const double>)>;

struct MseStats {
  double mse = 0.0;
  double std_error = 0.0;  // Monte-Carlo standard error of the mean
};

// Mean over pairs of ||f(phi_data) - phi||^2, unscaled (not divided by D).
inline MseStats empirical_mse_stats(const Estimator& estimator,
                                    std::span<const SamplePair1D> pairs) {
  if (pairs.empty()) throw std::invalid_argument("empirical_mse: empty test set");
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : pairs) {
    const auto out = estimator(p.phi_data);
    double err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double e = out[i] - p.phi[i];
      err += e * e;
    }
    sum += err;
    sum_sq += err * err;
  }
  const double n = static_cast<double>(pairs.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

inline double empirical_mse(const Estimator& estimator, std::span<const SamplePair1D> pairs) {
  return empirical_mse_stats(estimator, pairs).mse;
}

}  // namespace mvd
