#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvd/circulant.hpp"
#include "mvd/rng.hpp"

namespace mvd {

// 1-D cyclostationary Gaussian data model:
//
//   phi ~ N(0, R_phi),  phi_data = H phi + n,  n ~ N(0, sigma_n^2 I)
//
// with R_phi and H circulant. sigma_n is a standard deviation throughout.

// First row of R_phi: entry k = rho^min(k, D-k). Symmetric and, for
// rho in (0,1), positive semidefinite.
inline CirculantSpec make_autocorrelation(double rho, std::size_t dim) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("make_autocorrelation: rho must be in (0,1)");
  if (dim < 1) throw std::invalid_argument("make_autocorrelation: D >= 1 required");
  CirculantSpec c;
  c.first_row.resize(dim);
  for (std::size_t k = 0; k < dim; ++k)
    c.first_row[k] = std::pow(rho, static_cast<double>(std::min(k, dim - k)));
  return c;
}

// Local smoothing convolution: first row has 1 at indices 0, 1, D-1.
inline CirculantSpec make_blur(std::size_t dim) {
  if (dim < 3) throw std::invalid_argument("make_blur: D >= 3 required");
  CirculantSpec c;
  c.first_row.assign(dim, 0.0);
  c.first_row[0] = c.first_row[1] = c.first_row[dim - 1] = 1.0;
  return c;
}

struct SamplePair1D {
  std::vector<double> phi;
  std::vector<double> phi_data;
};

class SignalModel1D {
 public:
  SignalModel1D(double rho, std::size_t dim, CirculantSpec blur, double sigma_n)
      : dim_(dim), rho_(rho), blur_(std::move(blur)), sigma_n_(sigma_n) {
    if (dim_ < 1) throw std::invalid_argument("SignalModel1D: D >= 1 required");
    if (sigma_n_ < 0.0) throw std::invalid_argument("SignalModel1D: sigma_n >= 0 required");
    if (blur_.dim() != dim_) throw std::invalid_argument("SignalModel1D: blur dimension mismatch");
    autocorr_ = make_autocorrelation(rho, dim_);
    auto spec = transfer(autocorr_);
    signal_stddev_.resize(dim_);
    for (std::size_t m = 0; m < dim_; ++m) {
      double lambda = spec[m].real();  // symmetric first row => real spectrum
      if (lambda < -1e-12)
        throw std::runtime_error("SignalModel1D: autocorrelation spectrum negative at frequency " +
                                 std::to_string(m));
      if (lambda < 0.0) lambda = 0.0;
      signal_stddev_[m] = std::sqrt(lambda);
    }
  }

  std::size_t dim() const { return dim_; }
  double rho() const { return rho_; }
  double sigma_n() const { return sigma_n_; }
  const CirculantSpec& blur() const { return blur_; }
  const CirculantSpec& autocorrelation() const { return autocorr_; }
  // sqrt of the (clamped) R_phi eigenvalues, indexed by frequency.
  const std::vector<double>& signal_stddev() const { return signal_stddev_; }

 private:
  std::size_t dim_;
  double rho_;
  CirculantSpec blur_;
  double sigma_n_;
  CirculantSpec autocorr_;
  std::vector<double> signal_stddev_;
};

// The reference benchmark configuration:
// blur normalized to unit DC gain and noise variance 0.1.
inline constexpr double kReferenceSigmaN = 0.31622776601683794;  // sqrt(0.1)
inline constexpr double kReferenceBlurGain = 1.0 / 3.0;

inline SignalModel1D make_model(double rho, std::size_t dim, double sigma_n,
                                double blur_gain = kReferenceBlurGain) {
  CirculantSpec h = make_blur(dim);
  for (auto& v : h.first_row) v *= blur_gain;
  return SignalModel1D(rho, dim, std::move(h), sigma_n);
}

inline SignalModel1D reference_model() { return make_model(0.95, 32, kReferenceSigmaN); }

// Exact N(0, R_phi) draw through the spectral factorization of the
// circulant covariance. Draw order is fixed: DC, then one (re, im) pair
// per conjugate frequency pair in increasing order, then Nyquist when D
// is even.
inline std::vector<double> sample_signal(const SignalModel1D& model, Rng& rng) {
  const std::size_t d = model.dim();
  const auto& sd = model.signal_stddev();
  std::vector<cdouble> spec(d);
  spec[0] = cdouble(sd[0] * rng.normal(), 0.0);
  const double inv_sqrt2 = 0.7071067811865476;
  for (std::size_t k = 1; 2 * k < d; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    spec[k] = cdouble(sd[k] * re * inv_sqrt2, sd[k] * im * inv_sqrt2);
    spec[d - k] = std::conj(spec[k]);
  }
  if (d % 2 == 0 && d > 1) spec[d / 2] = cdouble(sd[d / 2] * rng.normal(), 0.0);
  spec = fft::inverse_unitary(std::move(spec));
  std::vector<double> phi(d);
  for (std::size_t i = 0; i < d; ++i) phi[i] = spec[i].real();
  return phi;
}

// phi_data = H phi + n with n i.i.d. N(0, sigma_n^2).
inline SamplePair1D degrade(const SignalModel1D& model, std::span<const double> phi, Rng& rng) {
  if (phi.size() != model.dim()) throw std::invalid_argument("degrade: length mismatch");
  SamplePair1D pair;
  pair.phi.assign(phi.begin(), phi.end());
  pair.phi_data = apply_circulant(model.blur(), phi);
  for (auto& v : pair.phi_data) v += model.sigma_n() * rng.normal();
  return pair;
}

// N independent pairs. Sample i draws from stream.fork(i), so parallel
// generation would be bit-identical to this serial loop.
inline std::vector<SamplePair1D> generate_dataset(const SignalModel1D& model, std::size_t n,
                                                  RngStream stream) {
  if (n < 1) throw std::invalid_argument("generate_dataset: N >= 1 required");
  std::vector<SamplePair1D> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = stream.fork(static_cast<std::uint64_t>(i)).rng();
    auto phi = sample_signal(model, rng);
    out.push_back(degrade(model, phi, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset file format "MVD1": header {magic "MVD1", version u16, D u32,
// N u64}, then N records of 2*D little-endian doubles (phi, then phi_data).

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian; big-endian hosts are unsupported");

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

inline void save_dataset(const std::string& path, std::size_t dim,
                         std::span<const SamplePair1D> pairs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  os.write("MVD1", 4);
  detail::write_pod(os, static_cast<std::uint16_t>(1));
  detail::write_pod(os, static_cast<std::uint32_t>(dim));
  detail::write_pod(os, static_cast<std::uint64_t>(pairs.size()));
  for (const auto& p : pairs) {
    if (p.phi.size() != dim || p.phi_data.size() != dim)
      throw std::invalid_argument("save_dataset: record dimension mismatch");
    os.write(reinterpret_cast<const char*>(p.phi.data()), static_cast<std::streamsize>(dim * 8));
    os.write(reinterpret_cast<const char*>(p.phi_data.data()), static_cast<std::streamsize>(dim * 8));
  }
  if (!os) throw std::runtime_error("save_dataset: write failed for " + path);
}

inline std::vector<SamplePair1D> load_dataset(const std::string& path, std::size_t* dim_out = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MVD1", 4) != 0)
    throw std::runtime_error("load_dataset: bad magic in " + path);
  const auto version = detail::read_pod<std::uint16_t>(is);
  if (version != 1) throw std::runtime_error("load_dataset: unsupported version");
  const auto dim = detail::read_pod<std::uint32_t>(is);
  const auto n = detail::read_pod<std::uint64_t>(is);
  std::vector<SamplePair1D> out(n);
  for (auto& p : out) {
    p.phi.resize(dim);
    p.phi_data.resize(dim);
    is.read(reinterpret_cast<char*>(p.phi.data()), static_cast<std::streamsize>(dim) * 8);
    is.read(reinterpret_cast<char*>(p.phi_data.data()), static_cast<std::streamsize>(dim) * 8);
  }
  if (!is) throw std::runtime_error("load_dataset: truncated file " + path);
  if (dim_out) *dim_out = dim;
  return out;
}

}  // namespace mvd
