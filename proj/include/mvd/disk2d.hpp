#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvd/rng.hpp"
#include "mvd/signal1d.hpp"  // little-endian pod helpers

namespace mvd {

// Square grayscale raster on a centered grid. Pixel (row, col) sits at
// x = col - (D-1)/2, y = (D-1)/2 - row, so x grows rightward and y grows
// upward; the image domain is [-(D-1)/2, (D-1)/2]^2.
struct Image {
  std::size_t dim = 0;
  std::vector<double> pixels;  // row-major

  Image() = default;
  Image(std::size_t d, double fill = 0.0) : dim(d), pixels(d * d, fill) {}

  double& at(std::size_t row, std::size_t col) { return pixels[row * dim + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * dim + col]; }

  double half_extent() const { return (static_cast<double>(dim) - 1.0) / 2.0; }
  double col_to_x(double col) const { return col - half_extent(); }
  double row_to_y(double row) const { return half_extent() - row; }
};

struct DiskParams {
  double radius = 0.0;
  double cx = 0.0, cy = 0.0;
  double fg = 0.0;  // intensity inside the disk
  double bg = 0.0;  // intensity outside
};

struct DegradeConfig {
  double sigma_b = 2.0;  // blur std, pixels
  double sigma_n = 0.1;  // noise std, intensity units
};

inline constexpr double kMinContrast = 50.0 / 255.0;

// Disk parameter distribution: radius uniform on
// [eps_r/2 * (D-1)/4, (1-eps_r/2)(D-1)/4] with eps_r = 0.4, center uniform
// on the centered square with margin eps_c = 0.5, background uniform on
// [0,1] and foreground uniform on [0,1] \ [bg-delta, bg+delta], drawn by
// inverse CDF over the two remaining segments (no rejection). Draw order:
// radius, cx, cy, bg, fg.
inline DiskParams sample_disk_params(std::size_t dim, Rng& rng) {
  if (dim < 3 || dim % 2 == 0)
    throw std::invalid_argument("sample_disk_params: D must be odd and >= 3");
  const double d1 = static_cast<double>(dim) - 1.0;
  constexpr double eps_r = 0.4, eps_c = 0.5;
  DiskParams p;
  p.radius = rng.uniform(eps_r / 2.0 * d1 / 4.0, (1.0 - eps_r / 2.0) * d1 / 4.0);
  const double c_lo = d1 * eps_c / 2.0 - d1 / 2.0;
  const double c_hi = d1 * (1.0 - eps_c / 2.0) - d1 / 2.0;
  p.cx = rng.uniform(c_lo, c_hi);
  p.cy = rng.uniform(c_lo, c_hi);
  p.bg = rng.uniform01();
  const double below = std::max(0.0, p.bg - kMinContrast);
  const double above = 1.0 - std::min(1.0, p.bg + kMinContrast);
  const double measure = below + above;
  if (measure <= 0.0) throw std::runtime_error("sample_disk_params: empty foreground support");
  const double u = rng.uniform01() * measure;
  p.fg = u < below ? u : std::min(1.0, p.bg + kMinContrast) + (u - below);
  return p;
}

// Hard indicator on pixel centers; the boundary (distance exactly r)
// belongs to the disk.
inline Image render(const DiskParams& p, std::size_t dim) {
  if (dim < 3 || dim % 2 == 0) throw std::invalid_argument("render: D must be odd and >= 3");
  Image img(dim);
  for (std::size_t row = 0; row < dim; ++row) {
    const double dy = img.row_to_y(static_cast<double>(row)) - p.cy;
    for (std::size_t col = 0; col < dim; ++col) {
      const double dx = img.col_to_x(static_cast<double>(col)) - p.cx;
      img.at(row, col) = dx * dx + dy * dy <= p.radius * p.radius ? p.fg : p.bg;
    }
  }
  return img;
}

// Discrete Gaussian kernel: ceil(3 sigma) taps per side, renormalized to
// unit sum. sigma = 0 degenerates to the identity kernel.
inline std::vector<double> gaussian_taps(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_taps: sigma >= 0 required");
  if (sigma == 0.0) return {1.0};
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * half + 1);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    taps[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += taps[static_cast<std::size_t>(i + half)];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable blur with replicate padding at the borders.
inline Image gaussian_blur(const Image& img, double sigma) {
  const auto taps = gaussian_taps(sigma);
  const int half = static_cast<int>(taps.size() / 2);
  if (half == 0) return img;
  const int d = static_cast<int>(img.dim);
  Image tmp(img.dim), out(img.dim);
  for (int row = 0; row < d; ++row)
    for (int col = 0; col < d; ++col) {
      double acc = 0.0;
      for (int t = -half; t <= half; ++t) {
        const int c = std::clamp(col + t, 0, d - 1);
        acc += taps[static_cast<std::size_t>(t + half)] * img.at(row, c);
      }
      tmp.at(row, col) = acc;
    }
  for (int row = 0; row < d; ++row)
    for (int col = 0; col < d; ++col) {
      double acc = 0.0;
      for (int t = -half; t <= half; ++t) {
        const int r = std::clamp(row + t, 0, d - 1);
        acc += taps[static_cast<std::size_t>(t + half)] * tmp.at(r, col);
      }
      out.at(row, col) = acc;
    }
  return out;
}

// phi_data = g_sigma_b * phi + n. Noise is drawn in row-major pixel order
// and the result is deliberately not clipped to [0, 1].
inline Image degrade2d(const Image& img, const DegradeConfig& cfg, Rng& rng) {
  Image out = gaussian_blur(img, cfg.sigma_b);
  if (cfg.sigma_n > 0.0)
    for (auto& v : out.pixels) v += cfg.sigma_n * rng.normal();
  return out;
}

struct DiskSample {
  DiskParams params;
  Image degraded;
};

// Per-sample substreams: image i draws its parameters and its noise from
// stream.fork(i), so generation order (or parallelism) cannot change the
// data.
inline void for_each_disk_sample(std::size_t n, std::size_t dim, const DegradeConfig& cfg,
                                 RngStream stream,
                                 const std::function<void(std::size_t, const DiskSample&)>& fn) {
  if (n < 1) throw std::invalid_argument("generate_dataset2d: n >= 1 required");
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = stream.fork(i).rng();
    DiskSample sample;
    sample.params = sample_disk_params(dim, rng);
    sample.degraded = degrade2d(render(sample.params, dim), cfg, rng);
    fn(i, sample);
  }
}

inline std::vector<DiskSample> generate_dataset2d(std::size_t n, std::size_t dim,
                                                  const DegradeConfig& cfg, RngStream stream) {
  std::vector<DiskSample> out(n);
  for_each_disk_sample(n, dim, cfg, stream,
                       [&](std::size_t i, const DiskSample& s) { out[i] = s; });
  return out;
}

// Radius scaled to [-1, 1]-ish label space: r_s = 8/(D-1) (r - (D-1)/8).
// Reported metrics always use the original scale; this exists for parity
// with the label convention of the network training recipe.
inline double scaled_radius(double radius, std::size_t dim) {
  const double d1 = static_cast<double>(dim) - 1.0;
  return 8.0 / d1 * (radius - d1 / 8.0);
}

// ---------------------------------------------------------------------------
// Image files: a flat little-endian float64 raster (D*D values, row-major;
// D is recovered from the file size) plus a JSON sidecar with the ground
// truth. A dataset directory holds img_XXXXX.f64 / img_XXXXX.json and a
// manifest.json.

inline void write_raster(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_raster: cannot open " + path);
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size() * 8));
  if (!os) throw std::runtime_error("write_raster: write failed for " + path);
}

inline Image read_raster(const std::string& path) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw std::runtime_error("read_raster: cannot open " + path);
  const auto bytes = static_cast<std::size_t>(is.tellg());
  if (bytes % 8 != 0) throw std::runtime_error("read_raster: size not a multiple of 8");
  const std::size_t count = bytes / 8;
  const auto dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  if (dim * dim != count) throw std::runtime_error("read_raster: raster is not square");
  Image img(dim);
  is.seekg(0);
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(bytes));
  if (!is) throw std::runtime_error("read_raster: truncated file " + path);
  return img;
}

inline nlohmann::json params_to_json(const DiskParams& p) {
  return nlohmann::json{{"radius", p.radius}, {"cx", p.cx}, {"cy", p.cy}, {"fg", p.fg}, {"bg", p.bg}};
}

inline DiskParams params_from_json(const nlohmann::json& j) {
  DiskParams p;
  p.radius = j.at("radius").get<double>();
  p.cx = j.at("cx").get<double>();
  p.cy = j.at("cy").get<double>();
  p.fg = j.at("fg").get<double>();
  p.bg = j.at("bg").get<double>();
  return p;
}

}  // namespace mvd
